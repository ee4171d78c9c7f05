#include "doctest.h"

#include <cmath>
#include <sstream>

#include "isbm/alpha.hpp"
#include "isbm/error.hpp"
#include "isbm/rng.hpp"

using namespace isbm;

namespace {

std::string error_of(std::string_view text) {
    try {
        parse_alpha_inline(text, 1.0);
    } catch (const InvalidArgument& e) {
        return e.what();
    }
    return {};
}

BorelAlpha identity() { return BorelAlpha{[](double t) { return t; }, 1.0, 0, "t"}; }

}  // namespace

TEST_CASE("step function evaluation is right-continuous") {
    const AlphaStep a({0.0, 0.5}, {0.9, 0.1}, 1.0);
    CHECK(a(0.0) == 0.9);
    CHECK(a(0.4999) == 0.9);
    CHECK(a(0.5) == 0.1);
    CHECK(a(1.0) == 0.1);
    CHECK(a.interval_index(0.75) == 1);
    CHECK(a.breakpoints() == std::vector<double>{0.5});
    CHECK_THROWS_AS(AlphaStep({0.1}, {0.5}, 1.0), InvalidArgument);
    CHECK_THROWS_AS(AlphaStep({0.0, 0.5, 0.5}, {0.5, 0.5, 0.5}, 1.0), InvalidArgument);
    CHECK_THROWS_AS(AlphaStep({0.0}, {1.2}, 1.0), InvalidArgument);
}

TEST_CASE("inline grammar") {
    const AlphaStep a = parse_alpha_inline("0:0.9,0.5:0.1", 1.0);
    CHECK(a == AlphaStep({0.0, 0.5}, {0.9, 0.1}, 1.0));
    CHECK(parse_alpha_inline(to_inline(a), 1.0) == a);
    CHECK(error_of("0:1.5").find("\"0:1.5\"") != std::string::npos);
    CHECK(error_of("0.2:0.5").find("\"0.2:0.5\"") != std::string::npos);
    CHECK(error_of("0:0.5,0.5:0.2,0.4:0.1").find("\"0.4:0.1\"") != std::string::npos);
    CHECK(error_of("0:x").find("\"0:x\"") != std::string::npos);
    CHECK_FALSE(error_of("").empty());
    CHECK_FALSE(error_of("0:0.5,2:0.1").empty());
}

TEST_CASE("discretization samples left endpoints") {
    const AlphaStep c = discretize_alpha(AlphaStep::constant(0.3, 1.0), 4);
    CHECK(c.pieces() == 4);
    for (double v : c.values()) CHECK(v == 0.3);
    CHECK(discretize_alpha(identity(), 2).values() == std::vector<double>{0.0, 0.5});
    for (std::size_t n : {4, 16, 64}) {
        const AlphaStep d = discretize_alpha(identity(), n);
        double sup = 0.0;
        for (int k = 0; k <= 100000; ++k) {
            const double t = k / 100000.0 * (1.0 - 1e-12);
            sup = std::max(sup, std::fabs(d(t) - t));
        }
        CHECK(sup == doctest::Approx(1.0 / static_cast<double>(n)).epsilon(1e-4));
    }
    const AlphaStep aligned({0.0, 0.25, 0.5, 0.75}, {0.1, 0.2, 0.3, 0.4}, 1.0);
    CHECK(discretize_alpha(aligned, 4) == aligned);
    CHECK_THROWS_AS(discretize_alpha(BorelAlpha{[](double) { return 2.0; }, 1.0, 0, "bad"}, 2), InvalidArgument);
    CHECK_THROWS_AS(discretize_alpha(identity(), 0), InvalidArgument);
}

TEST_CASE("borel specs with a level evaluate through the discretization") {
    BorelAlpha b = identity();
    CHECK(evaluate(b, 0.3) == 0.3);
    b.level = 2;
    CHECK(evaluate(b, 0.3) == 0.0);
    CHECK(evaluate(b, 0.7) == 0.5);
    CHECK(horizon_of(b) == 1.0);
}

TEST_CASE("shift operator") {
    const AlphaStep a({0.0, 0.5}, {1.0, 0.0}, 1.0);
    CHECK(shift_alpha(a, 0.0) == a);
    const AlphaStep half = shift_alpha(a, 0.5);
    CHECK(half.pieces() == 1);
    CHECK(half.values()[0] == 0.0);
    CHECK(half.horizon() == doctest::Approx(0.5));
    CHECK_THROWS_AS(shift_alpha(a, 1.5), InvalidArgument);

    const CounterRng rng(RngSpec{2, Purpose::calibration, 9});
    std::vector<double> starts{0.0}, values{rng.uniform(0)};
    for (int i = 1; i < 8; ++i) {
        starts.push_back(starts.back() + 0.05 + 0.1 * rng.uniform(i));
        values.push_back(rng.uniform(100 + i));
    }
    const AlphaStep r(starts, values, 1.5);
    const double s = 0.3 + 0.4 * rng.uniform(1000);
    const AlphaStep sh = shift_alpha(r, s);
    for (int k = 0; k < 100; ++k) {
        const double u = (1.5 - s) * rng.uniform(2000 + k);
        CHECK(sh(u) == r(s + u));
    }
}

TEST_CASE("csv formats") {
    const AlphaStep a({0.0, 0.25, 0.6}, {0.2, 1.0, 0.0}, 1.0);
    std::stringstream ss;
    write_alpha_csv(ss, a);
    CHECK(ss.str().rfind("t,alpha\n", 0) == 0);
    CHECK(read_alpha_csv(ss, 1.0) == a);
    std::stringstream bad("t,alpha\n0.1,0.5\n");
    CHECK_THROWS_AS(read_alpha_csv(bad, 1.0), InvalidArgument);
    std::stringstream seq("n,t,alpha\n2,0,0\n2,0.5,0.5\n8,0,0.25\n");
    const auto list = read_alpha_sequence_csv(seq, 1.0);
    REQUIRE(list.size() == 2);
    CHECK(list[0] == AlphaStep({0.0, 0.5}, {0.0, 0.5}, 1.0));
    CHECK(list[1] == AlphaStep::constant(0.25, 1.0));
    std::stringstream unordered("n,t,alpha\n8,0,0\n2,0,0.5\n");
    CHECK_THROWS_AS(read_alpha_sequence_csv(unordered, 1.0), InvalidArgument);
}
