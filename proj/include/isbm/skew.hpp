#pragma once

#include <cstddef>
#include <vector>

#include "isbm/alpha.hpp"
#include "isbm/excursion.hpp"
#include "isbm/path.hpp"
#include "isbm/rng.hpp"

namespace isbm {

/// Sign chosen for one excursion.
struct SignRecord {
    std::size_t excursion = 0;
    std::size_t alpha_interval = 0;  ///< alpha piece containing the excursion start g
    double uniform = 0.0;            ///< u_n; NaN when no draw was made
    double alpha = 0.0;              ///< alpha(g) used for the draw
    int sign = 0;                    ///< +1 iff u_n < alpha(g)
    bool drawn = true;               ///< false for the initial segment of a path started away from 0
};

/// Per-excursion signs and the step process Z on the grid (0 on the zero set).
struct SignAssignment {
    ExcursionSet excursions;
    std::vector<SignRecord> records;
    SamplePath z;
};

/// One uniform per excursion, read from the Purpose::signs stream of `rng` at
/// block index = excursion ordinal, so every alpha sees the same uniforms for a
/// given path (monotone coupling). An initial segment that does not start at a
/// zero keeps the sign of the path.
SignAssignment draw_signs(const ExcursionSet& excursions, const AlphaSpec& alpha, const RngSpec& rng);

struct IsbmPath {
    SamplePath x;
    SignAssignment signs;
};

/// X = Z * |B| with Z from draw_signs on the excursions of B.
IsbmPath construct_isbm(const SamplePath& bm, const AlphaSpec& alpha, const RngSpec& rng);

/// Same construction reusing an excursion decomposition of `bm`.
IsbmPath construct_isbm(const SamplePath& bm, const ExcursionSet& excursions, const AlphaSpec& alpha,
                        const RngSpec& rng);

/// Nonnegative submartingale X = N + A with dA carried by {X = 0}.
struct SigmaDecomposition {
    SamplePath x;
    SamplePath martingale;
    SamplePath increasing;
    /// A may only grow over steps whose smaller endpoint value of X is <= zero_tol.
    double zero_tol = 0.0;
};

/// Throws InvalidArgument naming the first violated invariant.
void validate(const SigmaDecomposition& sigma);

/// M = Z * X with fair signs on the excursions of X. Zeros of X are its exact
/// zero grid points plus one zero inside every step where A increases.
SamplePath unfold_submartingale(const SigmaDecomposition& sigma, const RngSpec& rng);

/// R(t) = k_{gamma_t} Y_t - k_0 Y_0 - int_0^t k_{s-} dY_s on the excursions of Y.
/// Throws InvalidArgument if k varies inside an excursion of Y.
SamplePath balayage_residual(const SamplePath& k_path, const SamplePath& y);

/// sum over grid steps of (2 alpha - 1) dL, alpha read at the time the
/// increment is recorded (jump time for upcrossing curves, left point otherwise).
SamplePath skew_local_time_integral(const LocalTimeCurve& local_time, const AlphaSpec& alpha);

/// sup_t |Z_t Y_t - Z_0 Y_0 - int_0^t Z dY - int_0^t (2 alpha - 1) dL|, where Y is
/// the reflected path whose excursions are recorded in `signs`. On steps that
/// straddle a zero the integrator increment is the unfolded one, -(Y_j + Y_{j+1}),
/// which realizes Z = 0 on the zero set.
double skew_identity_residual(const SignAssignment& signs, const SamplePath& y, const AlphaSpec& alpha,
                              const LocalTimeCurve& local_time);

struct SdeResidual {
    double sup_residual = 0.0;
    double driver_qv = 0.0;  ///< quadratic variation of W at the horizon
    bool driver_qv_ok = false;  ///< within horizon * (1 +- 5%)
    SamplePath driver;          ///< W = sum Z sgn(B) dB
};

/// Residual of X = x0 + W + int (2 alpha - 1) dL with the driver W rebuilt from (X, B).
SdeResidual sde_residual(const SamplePath& x, const SamplePath& bm, const AlphaSpec& alpha,
                         const LocalTimeCurve& local_time, double x0);

}  // namespace isbm
