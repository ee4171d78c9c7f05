#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "isbm/path.hpp"

namespace isbm {

/// One maximal interval (g, d) on which the path is nonzero.
struct Excursion {
    double g = 0.0;             ///< left zero (grid time or interpolated crossing)
    double d = 0.0;             ///< right zero, or the horizon when incomplete
    int sign = 0;               ///< sign of the path inside the interval
    bool complete = true;       ///< false when the path has not returned to 0 by the horizon
    bool starts_at_zero = true; ///< false for the initial segment of a path started away from 0
    std::size_t first = 0;      ///< first grid index strictly inside
    std::size_t last = 0;       ///< last grid index strictly inside
};

/// Excursion intervals of a sampled path together with the grid-point ownership map.
/// Grid points with value 0 belong to the zero set and to no excursion.
class ExcursionSet {
public:
    static constexpr std::int32_t kZeroSet = -1;

    ExcursionSet(TimeGrid grid, std::vector<Excursion> intervals, std::vector<std::int32_t> owner);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::span<const Excursion> intervals() const noexcept { return intervals_; }
    std::size_t size() const noexcept { return intervals_.size(); }
    const Excursion& operator[](std::size_t n) const noexcept { return intervals_[n]; }

    /// Excursion index owning grid point k, or kZeroSet.
    std::int32_t owner(std::size_t k) const noexcept { return owner_[k]; }

    /// True when a zero lies strictly between grid points j and j+1
    /// (both nonzero but owned by different excursions).
    bool zero_inside_step(std::size_t j) const noexcept {
        return owner_[j] != kZeroSet && owner_[j + 1] != kZeroSet && owner_[j] != owner_[j + 1];
    }

    /// Last zero gamma_t = sup{s <= t : path(s) = 0}; t itself on the zero set.
    double last_zero(double t) const;

private:
    TimeGrid grid_;
    std::vector<Excursion> intervals_;
    std::vector<std::int32_t> owner_;
};

/// Zeros are grid points with value exactly 0 plus linearly interpolated
/// crossing times between consecutive grid points of opposite sign.
ExcursionSet decompose_excursions(const SamplePath& path);

/// Excursions of a nonnegative path whose zero set is marked externally: exact
/// zeros, plus one zero inside each step listed in `zero_steps` (step j joins
/// grid points j and j+1). The zero time inside a marked step is
/// t_j + dt * x_j / (x_j + x_{j+1}).
ExcursionSet decompose_marked(const SamplePath& reflected, std::span<const std::size_t> zero_steps);

/// Overshoot constant of a Gaussian random walk, -zeta(1/2)/sqrt(2*pi).
inline constexpr double kOvershootConstant = 0.5825971579390106;

/// Barrier placement for the upcrossing stopping times.
enum class Barriers {
    /// Literal stopping times at grid resolution: reach above eps, return to 0.
    grid,
    /// Both barriers moved inward by kOvershootConstant * sqrt(dt) so that the
    /// sampled walk emulates the continuous passage times of [0, eps].
    overshoot_corrected,
};

/// Number of completed passages of |path| from 0 to above eps that start at a
/// zero inside [a, b] and complete by b. Zeros of a signed path are also
/// detected from sign changes, so B may be passed in place of |B|.
std::size_t count_upcrossings(const SamplePath& path, double eps, double a, double b,
                              Barriers barriers = Barriers::grid);

enum class LocalTimeEstimator { upcrossing, occupation };

std::string to_string(LocalTimeEstimator kind);

/// Estimate of the symmetric local time at 0 of any sign-flipped version of a
/// reflected path, on the path's grid.
struct LocalTimeCurve {
    SamplePath values;
    LocalTimeEstimator kind = LocalTimeEstimator::upcrossing;
    double eps = 0.0;
    Barriers barriers = Barriers::overshoot_corrected;
    std::vector<std::size_t> crossing_indices;  ///< grid indices of the upcrossing completions
    std::vector<double> crossing_times;

    double at(std::size_t k) const noexcept { return values[k]; }
    double final_value() const noexcept { return values.back(); }
};

/// Smallest admissible eps for a grid: 3 * sqrt(dt).
double resolution_floor(const TimeGrid& grid) noexcept;

/// L(t) = eps * N(0, t, eps) with a jump of eps at every upcrossing completion.
/// Throws CalibrationError when eps < resolution_floor.
LocalTimeCurve local_time_upcrossing(const SamplePath& reflected, double eps,
                                     Barriers barriers = Barriers::overshoot_corrected);

/// L(t) = (1 / (2 eps)) * int_0^t 1{|path| <= eps} ds, left Riemann sum.
LocalTimeCurve local_time_occupation(const SamplePath& reflected, double eps);

/// CSV `t,L`.
void write_local_time_csv(std::ostream& out, const LocalTimeCurve& curve);
/// JSON sidecar with estimator metadata.
std::string local_time_metadata_json(const LocalTimeCurve& curve);

}  // namespace isbm
