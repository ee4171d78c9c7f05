#include "isbm/path.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "isbm/error.hpp"

namespace isbm {

TimeGrid::TimeGrid(double origin, double dt, std::size_t n) : origin_(origin), dt_(dt), n_(n) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidArgument("TimeGrid: dt must be positive and finite");
    }
    if (n < 1) {
        throw InvalidArgument("TimeGrid: at least one step is required");
    }
    if (!std::isfinite(origin)) {
        throw InvalidArgument("TimeGrid: origin must be finite");
    }
}

std::size_t TimeGrid::index_at_or_before(double t) const noexcept {
    if (t <= origin_) return 0;
    const double raw = (t - origin_) / dt_;
    // Absorb roundoff so that t == time(k) maps back to k.
    const double k = std::floor(raw + 1e-9);
    if (k >= static_cast<double>(n_)) return n_;
    return static_cast<std::size_t>(k);
}

TimeGrid make_grid(double origin, double horizon, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("make_grid: dt must be positive");
    if (!(horizon > origin)) throw InvalidArgument("make_grid: horizon must exceed origin");
    const double steps = std::round((horizon - origin) / dt);
    if (!(steps < static_cast<double>(std::numeric_limits<std::uint32_t>::max()))) {
        throw InvalidArgument("make_grid: too many steps");
    }
    const auto n = static_cast<std::size_t>(std::max(1.0, steps));
    return TimeGrid(origin, (horizon - origin) / static_cast<double>(n), n);
}

SamplePath::SamplePath(TimeGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw InvalidArgument("SamplePath: expected " + std::to_string(grid_.size()) + " values, got " +
                              std::to_string(values_.size()));
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw InvalidArgument("SamplePath: non-finite value");
    }
}

SamplePath SamplePath::constant(const TimeGrid& grid, double value) {
    return SamplePath(grid, std::vector<double>(grid.size(), value));
}

SamplePath SamplePath::abs() const {
    std::vector<double> out(values_.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::fabs(values_[k]);
    return SamplePath(grid_, std::move(out));
}

void require_same_grid(const SamplePath& a, const SamplePath& b, const char* what) {
    if (!(a.grid() == b.grid())) {
        throw GridMismatch(std::string(what) + ": paths are sampled on different grids");
    }
}

SamplePath simulate_bm(const TimeGrid& grid, const RngSpec& rng, double x0) {
    const CounterRng stream(rng.with_purpose(Purpose::brownian));
    const double sd = std::sqrt(grid.dt());
    const std::size_t n = grid.steps();
    std::vector<double> v(n + 1);
    v[0] = x0;
    for (std::size_t j = 0; j < n; j += 2) {
        const auto z = stream.normal_pair(j / 2);
        v[j + 1] = v[j] + sd * z[0];
        if (j + 1 < n) v[j + 2] = v[j + 1] + sd * z[1];
    }
    return SamplePath(grid, std::move(v));
}

SamplePath stieltjes_integral(const SamplePath& integrand, const SamplePath& integrator) {
    require_same_grid(integrand, integrator, "stieltjes_integral");
    const auto f = integrand.values();
    const auto g = integrator.values();
    std::vector<double> out(f.size());
    out[0] = 0.0;
    for (std::size_t j = 0; j + 1 < f.size(); ++j) out[j + 1] = out[j] + f[j] * (g[j + 1] - g[j]);
    return SamplePath(integrand.grid(), std::move(out));
}

SamplePath quadratic_variation(const SamplePath& path) {
    const auto v = path.values();
    std::vector<double> out(v.size());
    out[0] = 0.0;
    for (std::size_t j = 0; j + 1 < v.size(); ++j) {
        const double d = v[j + 1] - v[j];
        out[j + 1] = out[j] + d * d;
    }
    return SamplePath(path.grid(), std::move(out));
}

void write_path_csv(std::ostream& out, const SamplePath& path) {
    out << "t,value\n" << std::setprecision(17);
    for (std::size_t k = 0; k < path.size(); ++k) out << path.grid().time(k) << ',' << path[k] << '\n';
}

SamplePath read_path_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "t,value") throw InvalidArgument("path CSV: expected header t,value");
    std::vector<double> t, v;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        double a = 0, b = 0;
        char comma = 0;
        if (!(row >> a >> comma >> b) || comma != ',') throw InvalidArgument("path CSV: malformed row '" + line + "'");
        t.push_back(a);
        v.push_back(b);
    }
    if (t.size() < 2) throw InvalidArgument("path CSV: need at least two rows");
    const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    for (std::size_t k = 1; k < t.size(); ++k) {
        if (std::fabs((t[k] - t[k - 1]) - dt) > 1e-9 * std::max(1.0, std::fabs(t.back()))) {
            throw InvalidArgument("path CSV: times are not on a uniform grid");
        }
    }
    return SamplePath(TimeGrid(t.front(), dt, t.size() - 1), std::move(v));
}

}  // namespace isbm
