#include "isbm/excursion.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "json.hpp"

#include "isbm/error.hpp"

namespace isbm {

ExcursionSet::ExcursionSet(TimeGrid grid, std::vector<Excursion> intervals, std::vector<std::int32_t> owner)
    : grid_(grid), intervals_(std::move(intervals)), owner_(std::move(owner)) {
    if (owner_.size() != grid_.size()) throw InvalidArgument("ExcursionSet: ownership map has wrong length");
}

double ExcursionSet::last_zero(double t) const {
    // First interval with d > t; it contains t iff g < t.
    auto it = std::upper_bound(intervals_.begin(), intervals_.end(), t,
                               [](double v, const Excursion& e) { return v < e.d; });
    if (it != intervals_.end() && it->g < t) return it->g;
    // t at the horizon inside an incomplete final excursion
    if (!intervals_.empty() && !intervals_.back().complete && t >= intervals_.back().d &&
        intervals_.back().g < t) {
        return intervals_.back().g;
    }
    return t;
}

namespace {

// Runs of nonzero grid points, split wherever `zero_in_step(j)` returns a zero
// time strictly inside step j (NaN for none).
template <class ZeroInStep>
ExcursionSet build_excursions(const SamplePath& path, ZeroInStep&& zero_in_step) {
    const TimeGrid& grid = path.grid();
    const auto v = path.values();
    const std::size_t n = grid.steps();
    std::vector<Excursion> out;
    std::vector<std::int32_t> owner(v.size(), ExcursionSet::kZeroSet);

    std::size_t k = 0;
    while (k <= n) {
        if (v[k] == 0.0) {
            ++k;
            continue;
        }
        Excursion e;
        e.first = k;
        e.sign = v[k] > 0 ? 1 : -1;
        if (k == 0) {
            e.g = grid.time(0);
            e.starts_at_zero = false;
        } else if (v[k - 1] == 0.0) {
            e.g = grid.time(k - 1);
        } else {
            e.g = zero_in_step(k - 1);
        }
        std::size_t j = k;
        double split = std::nan("");
        while (j < n && v[j + 1] != 0.0) {
            split = zero_in_step(j);
            if (!std::isnan(split)) break;
            ++j;
        }
        e.last = j;
        if (j == n) {
            e.d = grid.horizon();
            e.complete = false;
        } else if (v[j + 1] == 0.0) {
            e.d = grid.time(j + 1);
        } else {
            e.d = split;
        }
        const auto index = static_cast<std::int32_t>(out.size());
        std::fill(owner.begin() + static_cast<std::ptrdiff_t>(e.first),
                  owner.begin() + static_cast<std::ptrdiff_t>(e.last + 1), index);
        out.push_back(e);
        k = j + 1;
    }
    return ExcursionSet(grid, std::move(out), std::move(owner));
}

}  // namespace

ExcursionSet decompose_excursions(const SamplePath& path) {
    const auto v = path.values();
    const TimeGrid& grid = path.grid();
    return build_excursions(path, [&](std::size_t j) {
        const double a = v[j];
        const double b = v[j + 1];
        if ((a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0)) {
            return grid.time(j) + grid.dt() * a / (a - b);
        }
        return std::nan("");
    });
}

ExcursionSet decompose_marked(const SamplePath& reflected, std::span<const std::size_t> zero_steps) {
    const auto v = reflected.values();
    for (double x : v) {
        if (x < 0.0) throw InvalidArgument("decompose_marked: path must be nonnegative");
    }
    std::vector<char> marked(v.size(), 0);
    for (std::size_t j : zero_steps) {
        if (j + 1 >= v.size()) throw InvalidArgument("decompose_marked: step index out of range");
        marked[j] = 1;
    }
    const TimeGrid& grid = reflected.grid();
    return build_excursions(reflected, [&](std::size_t j) {
        if (!marked[j]) return std::nan("");
        return grid.time(j) + grid.dt() * v[j] / (v[j] + v[j + 1]);
    });
}

namespace {

struct BarrierLevels {
    double low;
    double high;
};

BarrierLevels barrier_levels(const TimeGrid& grid, double eps, Barriers barriers) {
    if (barriers == Barriers::grid) return {0.0, eps};
    const double shift = kOvershootConstant * std::sqrt(grid.dt());
    return {shift, eps - shift};
}

// Grid indices at which upcrossings complete, scanning indices [ka, kb].
std::vector<std::size_t> upcrossing_completions(std::span<const double> v, std::size_t ka, std::size_t kb,
                                                BarrierLevels lv) {
    std::vector<std::size_t> done;
    auto at_zero = [&](std::size_t k) { return std::fabs(v[k]) <= lv.low; };
    bool armed = at_zero(ka);  // a passage has started from 0
    for (std::size_t k = ka + 1; k <= kb; ++k) {
        if (armed) {
            if (std::fabs(v[k]) > lv.high) {
                done.push_back(k);
                armed = false;
            }
        } else if (at_zero(k) || (v[k - 1] > 0.0 && v[k] < 0.0) || (v[k - 1] < 0.0 && v[k] > 0.0)) {
            armed = true;
        }
    }
    return done;
}

}  // namespace

std::size_t count_upcrossings(const SamplePath& path, double eps, double a, double b, Barriers barriers) {
    if (!(eps > 0.0)) throw InvalidArgument("count_upcrossings: eps must be positive");
    const TimeGrid& grid = path.grid();
    const double tol = 1e-9 * grid.dt();
    if (a < grid.origin() - tol || b > grid.horizon() + tol) {
        throw InvalidArgument("count_upcrossings: window outside the grid span");
    }
    if (!(b > a)) throw InvalidArgument("count_upcrossings: empty window");
    const std::size_t ka = grid.index_at_or_before(a) + (grid.time(grid.index_at_or_before(a)) < a - tol ? 1 : 0);
    const std::size_t kb = grid.index_at_or_before(b);
    if (ka >= kb) return 0;
    return upcrossing_completions(path.values(), ka, kb, barrier_levels(grid, eps, barriers)).size();
}

std::string to_string(LocalTimeEstimator kind) {
    return kind == LocalTimeEstimator::upcrossing ? "upcrossing" : "occupation";
}

double resolution_floor(const TimeGrid& grid) noexcept { return 3.0 * std::sqrt(grid.dt()); }

namespace {

void check_floor(const TimeGrid& grid, double eps) {
    const double floor = resolution_floor(grid);
    // 1e-12 slack so that eps = 3*sqrt(dt) itself is admissible after roundoff
    if (!(eps >= floor * (1.0 - 1e-12))) {
        throw CalibrationError("local time level eps is below the resolution floor 3*sqrt(dt)", eps, floor);
    }
}

}  // namespace

LocalTimeCurve local_time_upcrossing(const SamplePath& reflected, double eps, Barriers barriers) {
    const TimeGrid& grid = reflected.grid();
    check_floor(grid, eps);
    auto done = upcrossing_completions(reflected.values(), 0, grid.steps(), barrier_levels(grid, eps, barriers));
    std::vector<double> L(grid.size(), 0.0);
    std::size_t next = 0;
    double acc = 0.0;
    for (std::size_t k = 0; k < L.size(); ++k) {
        while (next < done.size() && done[next] == k) {
            acc += eps;
            ++next;
        }
        L[k] = acc;
    }
    std::vector<double> times(done.size());
    std::transform(done.begin(), done.end(), times.begin(), [&](std::size_t k) { return grid.time(k); });
    return LocalTimeCurve{SamplePath(grid, std::move(L)), LocalTimeEstimator::upcrossing, eps, barriers,
                          std::move(done), std::move(times)};
}

LocalTimeCurve local_time_occupation(const SamplePath& reflected, double eps) {
    const TimeGrid& grid = reflected.grid();
    check_floor(grid, eps);
    const auto v = reflected.values();
    const double weight = grid.dt() / (2.0 * eps);
    std::vector<double> L(v.size(), 0.0);
    std::size_t hits = 0;
    for (std::size_t j = 0; j + 1 < v.size(); ++j) {
        if (std::fabs(v[j]) <= eps) ++hits;
        L[j + 1] = static_cast<double>(hits) * weight;
    }
    return LocalTimeCurve{SamplePath(grid, std::move(L)), LocalTimeEstimator::occupation, eps,
                          Barriers::grid, {}, {}};
}

void write_local_time_csv(std::ostream& out, const LocalTimeCurve& curve) {
    out << "t,L\n" << std::setprecision(17);
    const TimeGrid& grid = curve.values.grid();
    for (std::size_t k = 0; k < grid.size(); ++k) out << grid.time(k) << ',' << curve.values[k] << '\n';
}

std::string local_time_metadata_json(const LocalTimeCurve& curve) {
    nlohmann::json j;
    j["kind"] = to_string(curve.kind);
    j["eps"] = curve.eps;
    j["dt"] = curve.values.grid().dt();
    j["horizon"] = curve.values.grid().horizon();
    if (curve.kind == LocalTimeEstimator::upcrossing) {
        j["barriers"] = curve.barriers == Barriers::grid ? "grid" : "overshoot_corrected";
        j["upcrossings"] = curve.crossing_times.size();
        j["crossing_times"] = curve.crossing_times;
    }
    j["final_value"] = curve.final_value();
    return j.dump(2);
}

}  // namespace isbm
