#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "isbm/rng.hpp"

namespace isbm {

/// Uniform time grid origin + k*dt, k = 0..n.
class TimeGrid {
public:
    TimeGrid(double origin, double dt, std::size_t n);

    double origin() const noexcept { return origin_; }
    double dt() const noexcept { return dt_; }
    std::size_t steps() const noexcept { return n_; }
    std::size_t size() const noexcept { return n_ + 1; }
    double time(std::size_t k) const noexcept { return origin_ + static_cast<double>(k) * dt_; }
    double horizon() const noexcept { return time(n_); }

    /// Largest k with time(k) <= t (clamped to [0, n]).
    std::size_t index_at_or_before(double t) const noexcept;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    double origin_;
    double dt_;
    std::size_t n_;
};

/// Grid from `origin` to `horizon` with step close to `dt`; n = round((horizon-origin)/dt)
/// and the step is adjusted so that the last grid time equals the horizon.
TimeGrid make_grid(double origin, double horizon, double dt);

/// Real-valued process sampled on every point of a TimeGrid.
class SamplePath {
public:
    SamplePath(TimeGrid grid, std::vector<double> values);

    /// Constant path.
    static SamplePath constant(const TimeGrid& grid, double value);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t k) const noexcept { return values_[k]; }
    std::size_t size() const noexcept { return values_.size(); }
    double back() const noexcept { return values_.back(); }

    /// Pointwise |path|.
    SamplePath abs() const;

    friend bool operator==(const SamplePath&, const SamplePath&) = default;

private:
    TimeGrid grid_;
    std::vector<double> values_;
};

/// Throws GridMismatch unless a and b are sampled on the same grid.
void require_same_grid(const SamplePath& a, const SamplePath& b, const char* what);

/// Brownian motion started at x0: i.i.d. N(0, dt) increments drawn from the
/// Purpose::brownian stream of `rng` (purpose field is overridden).
SamplePath simulate_bm(const TimeGrid& grid, const RngSpec& rng, double x0 = 0.0);

/// Left-point sum  out(k) = sum_{j<k} integrand(j) * (integrator(j+1) - integrator(j)).
SamplePath stieltjes_integral(const SamplePath& integrand, const SamplePath& integrator);

/// Realized quadratic variation  out(k) = sum_{j<k} (path(j+1) - path(j))^2.
SamplePath quadratic_variation(const SamplePath& path);

/// CSV with header `t,value`, one row per grid point, 17 significant digits.
void write_path_csv(std::ostream& out, const SamplePath& path);
SamplePath read_path_csv(std::istream& in);

}  // namespace isbm
