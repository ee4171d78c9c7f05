#include "doctest.h"

#include <cmath>
#include <numbers>

#include "json.hpp"

#include "isbm/error.hpp"
#include "isbm/excursion.hpp"
#include "isbm/stats.hpp"

using namespace isbm;

namespace {

SamplePath triangle() { return SamplePath(TimeGrid(0.0, 1.0, 4), {0.0, 1.0, 0.0, -1.0, 0.0}); }

// n teeth 0 -> h -> 0, each rising and falling over `half` steps.
SamplePath sawtooth(std::size_t n, double h, std::size_t half, double dt) {
    std::vector<double> v{0.0};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 1; k <= half; ++k) v.push_back(h * static_cast<double>(k) / static_cast<double>(half));
        for (std::size_t k = half; k-- > 0;) v.push_back(h * static_cast<double>(k) / static_cast<double>(half));
    }
    const std::size_t steps = v.size() - 1;
    return SamplePath(TimeGrid(0.0, dt, steps), std::move(v));
}

}  // namespace

TEST_CASE("triangle fixture decomposes into two excursions") {
    const ExcursionSet ex = decompose_excursions(triangle());
    REQUIRE(ex.size() == 2);
    CHECK(ex[0].g == 0.0);
    CHECK(ex[0].d == 2.0);
    CHECK(ex[0].sign == 1);
    CHECK(ex[1].g == 2.0);
    CHECK(ex[1].d == 4.0);
    CHECK(ex[1].sign == -1);
    CHECK(ex[1].complete);
    CHECK(ex.owner(2) == ExcursionSet::kZeroSet);
    CHECK(ex.last_zero(1.5) == 0.0);
    CHECK(ex.last_zero(2.0) == 2.0);
    CHECK(ex.last_zero(3.0) == 2.0);
}

TEST_CASE("sign changes insert interpolated zeros") {
    const SamplePath p(TimeGrid(0.0, 1.0, 3), {0.0, 1.0, -3.0, -1.0});
    const ExcursionSet ex = decompose_excursions(p);
    REQUIRE(ex.size() == 2);
    CHECK(ex[0].d == doctest::Approx(1.25));
    CHECK(ex[1].g == doctest::Approx(1.25));
    CHECK_FALSE(ex[1].complete);
    CHECK(ex[1].d == 3.0);
    CHECK(ex.zero_inside_step(1));
    CHECK(ex.last_zero(2.5) == doctest::Approx(1.25));
}

TEST_CASE("strictly positive path is one incomplete excursion") {
    const SamplePath p(TimeGrid(0.0, 0.5, 3), {0.5, 1.0, 2.0, 0.1});
    const ExcursionSet ex = decompose_excursions(p);
    REQUIRE(ex.size() == 1);
    CHECK_FALSE(ex[0].complete);
    CHECK_FALSE(ex[0].starts_at_zero);
    CHECK(ex[0].first == 0);
    CHECK(ex[0].last == 3);
}

TEST_CASE("long excursions match a brute-force scan") {
    const TimeGrid g = make_grid(0.0, 1.0, 1e-4);
    const SamplePath b = simulate_bm(g, RngSpec{3, Purpose::brownian, 0});
    std::size_t expected_count = 0;
    // Oracle: walk the array, locate zeros from exact zeros and sign changes.
    double last_zero = 0.0;
    const auto v = b.values();
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
        double z = -1.0;
        if (v[k + 1] == 0.0) {
            z = g.time(k + 1);
        } else if (v[k] != 0.0 && (v[k] > 0) != (v[k + 1] > 0)) {
            z = g.time(k) + g.dt() * std::fabs(v[k]) / (std::fabs(v[k]) + std::fabs(v[k + 1]));
        }
        if (z >= 0.0) {
            if (z - last_zero > 0.1) ++expected_count;
            last_zero = z;
        }
    }
    if (g.horizon() - last_zero > 0.1) ++expected_count;
    std::size_t count = 0;
    std::size_t covered = 0;
    const ExcursionSet ex = decompose_excursions(b);
    for (const auto& e : ex.intervals()) {
        if (e.d - e.g > 0.1) ++count;
        covered += e.last - e.first + 1;
    }
    CHECK(count == expected_count);
    CHECK(expected_count > 0);
    // Every nonzero grid point belongs to exactly one excursion.
    std::size_t nonzero = 0;
    for (double x : v) nonzero += x != 0.0;
    CHECK(covered == nonzero);
}

TEST_CASE("upcrossing counts on fixtures") {
    CHECK(count_upcrossings(triangle(), 0.5, 0.0, 4.0) == 2);
    CHECK(count_upcrossings(triangle(), 2.0, 0.0, 4.0) == 0);
    CHECK(count_upcrossings(triangle(), 0.5, 0.0, 1.0) == 1);
    CHECK(count_upcrossings(triangle(), 0.5, 1.0, 4.0) == 1);
    CHECK(count_upcrossings(triangle(), 0.5, 2.0, 3.0) == 1);
    CHECK(count_upcrossings(triangle(), 0.5, 2.5, 4.0) == 0);
    CHECK_THROWS_AS(count_upcrossings(triangle(), 0.0, 0.0, 4.0), InvalidArgument);
    CHECK_THROWS_AS(count_upcrossings(triangle(), 0.5, 2.0, 2.0), InvalidArgument);
    CHECK_THROWS_AS(count_upcrossings(triangle(), 0.5, 0.0, 9.0), InvalidArgument);
}

TEST_CASE("windowed counts are additive up to one straddling passage") {
    const TimeGrid g = make_grid(0.0, 1.0, 1e-4);
    for (std::uint64_t i = 0; i < 20; ++i) {
        const SamplePath b = simulate_bm(g, RngSpec{4, Purpose::brownian, i});
        for (Barriers barriers : {Barriers::grid, Barriers::overshoot_corrected}) {
            const auto whole = static_cast<long>(count_upcrossings(b, 0.05, 0.0, 1.0, barriers));
            const auto parts = static_cast<long>(count_upcrossings(b, 0.05, 0.0, 0.37, barriers) +
                                                 count_upcrossings(b, 0.05, 0.37, 1.0, barriers));
            CHECK(std::labs(whole - parts) <= 1);
        }
    }
}

TEST_CASE("sawtooth local time is eps times the number of teeth") {
    const SamplePath saw = sawtooth(7, 1.0, 50, 1e-4);
    const LocalTimeCurve lt = local_time_upcrossing(saw, 0.1);
    CHECK(lt.final_value() == doctest::Approx(0.7));
    CHECK(lt.crossing_times.size() == 7);
    CHECK(local_time_upcrossing(saw, 0.1, Barriers::grid).final_value() == doctest::Approx(0.7));
    CHECK(local_time_upcrossing(saw, 2.0).final_value() == 0.0);
}

TEST_CASE("local time curves are nondecreasing and move only near zero") {
    const TimeGrid g = make_grid(0.0, 1.0, 1e-4);
    const SamplePath b = simulate_bm(g, RngSpec{8, Purpose::brownian, 1});
    const double eps = 0.05;
    for (const LocalTimeCurve& lt : {local_time_upcrossing(b, eps), local_time_occupation(b, eps)}) {
        CHECK(lt.at(0) == 0.0);
        for (std::size_t k = 0; k + 1 < b.size(); ++k) {
            const double d = lt.at(k + 1) - lt.at(k);
            REQUIRE(d >= 0.0);
            if (d > 0.0) REQUIRE(std::min(std::fabs(b[k]), std::fabs(b[k + 1])) <= eps);
        }
    }
}

TEST_CASE("resolution floor is enforced") {
    const TimeGrid g = make_grid(0.0, 1.0, 1e-4);
    const SamplePath b = SamplePath::constant(g, 0.0);
    CHECK(resolution_floor(g) == doctest::Approx(0.03));
    CHECK_THROWS_AS(local_time_upcrossing(b, 0.02), CalibrationError);
    CHECK_THROWS_AS(local_time_occupation(b, 0.02), CalibrationError);
    const SamplePath away = SamplePath::constant(g, 1.0);
    CHECK(local_time_occupation(away, 0.05).final_value() == 0.0);
}

TEST_CASE("occupation bias shrinks over a refinement ladder") {
    // One fine path per sample, observed at three resolutions (eps = 10 sqrt(dt)).
    const TimeGrid fine = make_grid(0.0, 1.0, 2.5e-5);
    const double target = std::sqrt(2.0 / std::numbers::pi);
    const std::size_t strides[] = {16, 4, 1};
    const double eps[] = {0.2, 0.1, 0.05};
    const std::size_t n = 400;
    std::vector<std::vector<double>> est(3, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const SamplePath b = simulate_bm(fine, RngSpec{21, Purpose::brownian, i});
        for (int lvl = 0; lvl < 3; ++lvl) {
            std::vector<double> v;
            for (std::size_t k = 0; k < b.size(); k += strides[lvl]) v.push_back(b[k]);
            const std::size_t steps = v.size() - 1;
            const SamplePath coarse(TimeGrid(0.0, fine.dt() * static_cast<double>(strides[lvl]), steps), std::move(v));
            est[lvl][i] = local_time_occupation(coarse, eps[lvl]).final_value();
        }
    }
    double prev_bias = INFINITY;
    for (int lvl = 0; lvl < 3; ++lvl) {
        const double bias = std::fabs(summarize(est[lvl]).mean - target);
        CHECK(bias < prev_bias);
        prev_bias = bias;
    }
}

TEST_CASE("upcrossing estimator is calibrated for reflected Brownian motion") {
    const TimeGrid g = make_grid(0.0, 1.0, 1e-5);
    std::vector<double> up;
    for (std::uint64_t i = 0; i < 400; ++i) {
        const SamplePath b = simulate_bm(g, RngSpec{31, Purpose::brownian, i});
        up.push_back(local_time_upcrossing(b, 0.02).final_value());
    }
    const Summary s = summarize(up);
    CHECK(std::fabs(s.mean - std::sqrt(2.0 / std::numbers::pi)) < 3.0 * s.se + 0.01);
}

TEST_CASE("local time csv and metadata") {
    const LocalTimeCurve lt = local_time_upcrossing(sawtooth(2, 1.0, 50, 1e-4), 0.1);
    std::ostringstream out;
    write_local_time_csv(out, lt);
    CHECK(out.str().rfind("t,L\n", 0) == 0);
    const auto meta = nlohmann::json::parse(local_time_metadata_json(lt));
    CHECK(meta.at("eps").get<double>() == 0.1);
    CHECK(meta.at("kind").get<std::string>() == "upcrossing");
}
