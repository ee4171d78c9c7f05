#include "doctest.h"

#include <cmath>
#include <sstream>

#include "isbm/error.hpp"
#include "isbm/path.hpp"
#include "isbm/stats.hpp"

using namespace isbm;

TEST_CASE("grid construction ends exactly at the horizon") {
    const TimeGrid g = make_grid(0.0, 1.0, 3e-4);
    CHECK(g.horizon() == 1.0);
    CHECK(g.steps() == 3333);
    CHECK(g.index_at_or_before(0.5) == g.steps() / 2);
    CHECK(g.index_at_or_before(-1.0) == 0);
    CHECK(g.index_at_or_before(5.0) == g.steps());
    CHECK_THROWS_AS(make_grid(0.0, 0.0, 0.1), InvalidArgument);
    CHECK_THROWS_AS(TimeGrid(0.0, -1.0, 4), InvalidArgument);
}

TEST_CASE("sample path validation") {
    const TimeGrid g(0.0, 1.0, 2);
    CHECK_THROWS_AS(SamplePath(g, {0.0, 1.0}), InvalidArgument);
    CHECK_THROWS_AS(SamplePath(g, {0.0, NAN, 1.0}), InvalidArgument);
    const SamplePath p(g, {0.0, -2.0, 1.0});
    CHECK(p.abs()[1] == 2.0);
    CHECK_THROWS_AS(require_same_grid(p, SamplePath::constant(TimeGrid(0.0, 0.5, 2), 1.0), "t"), GridMismatch);
}

TEST_CASE("brownian paths are reproducible with N(0, dt) increments") {
    const TimeGrid g = make_grid(0.0, 1.0, 1e-4);
    const RngSpec rng{11, Purpose::signs, 2};
    const SamplePath a = simulate_bm(g, rng, 0.3);
    CHECK(a == simulate_bm(g, rng.with_purpose(Purpose::brownian), 0.3));
    CHECK(a[0] == 0.3);
    CHECK(!(a == simulate_bm(g, rng.for_path(3), 0.3)));
    std::vector<double> inc;
    for (std::size_t k = 0; k < g.steps(); ++k) inc.push_back((a[k + 1] - a[k]) / std::sqrt(g.dt()));
    const Summary s = summarize(inc);
    CHECK(std::fabs(s.mean) < 4.0 * s.se);
    CHECK(s.sd == doctest::Approx(1.0).epsilon(0.03));
    CHECK(quadratic_variation(a).back() == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("left-point stieltjes sum and quadratic variation") {
    const TimeGrid g(0.0, 1.0, 3);
    const SamplePath f(g, {1.0, 2.0, 3.0, 4.0});
    const SamplePath x(g, {0.0, 1.0, 3.0, 2.0});
    const SamplePath i = stieltjes_integral(f, x);
    CHECK(i[0] == 0.0);
    CHECK(i[1] == 1.0);
    CHECK(i[2] == 5.0);
    CHECK(i[3] == 2.0);
    CHECK(quadratic_variation(x).back() == 6.0);
}

TEST_CASE("path csv round trip is exact") {
    const TimeGrid g = make_grid(0.0, 1.0, 0.1);
    const SamplePath p = simulate_bm(g, RngSpec{5, Purpose::brownian, 0});
    std::stringstream ss;
    write_path_csv(ss, p);
    CHECK(ss.str().rfind("t,value\n", 0) == 0);
    const SamplePath q = read_path_csv(ss);
    CHECK(q.values().size() == p.values().size());
    for (std::size_t k = 0; k < p.size(); ++k) CHECK(q[k] == p[k]);
    std::stringstream bad("t,val\n0,0\n");
    CHECK_THROWS_AS(read_path_csv(bad), InvalidArgument);
}
