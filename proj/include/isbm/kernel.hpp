#pragma once

#include <cstddef>
#include <vector>

#include "isbm/alpha.hpp"

namespace isbm {

struct QuadratureSettings {
    double quad_tol = 1e-8;        ///< relative tolerance
    std::size_t max_subdiv = 64;   ///< bisection budget per integral
};

/// Arguments of p^alpha(s, t; x, y).
struct KernelQuery {
    double s = 0.0;
    double t = 1.0;
    double x = 0.0;
    double y = 0.0;
    QuadratureSettings quad{};

    void validate() const;
};

struct DensityValue {
    double value = 0.0;
    double error = 0.0;   ///< quadrature error estimate
    std::size_t intervals = 0;
};

/// Transition density of the skew process with time-dependent alpha.
///
/// The first-passage integral over the last zero u in (0, t - s) is split at
/// u = (t - s)/2 and at the breakpoints of alpha shifted by s. On the left half
/// u = v^2 removes the 1/sqrt(u) singularity; on the right half
/// r = |y| / sqrt(2 (t - s - u)) turns the first-passage factor into
/// (2/sqrt(pi)) exp(-r^2) dr. At y = 0 the value is the mean of the limits at
/// y = +-1e-6 sqrt(t - s). Throws QuadratureError if the tolerance is not met.
DensityValue transition_density_detailed(const KernelQuery& q, const AlphaStep& alpha);
double transition_density(const KernelQuery& q, const AlphaStep& alpha);

/// Closed form for constant alpha = a over time tau:
/// phi(y - x) 1{xy > 0} + (1 + sgn(y)(2a - 1)) phi(|x| + |y|) - phi(y + x) 1{xy > 0}.
double constant_alpha_density(double tau, double x, double y, double a);

/// int p(s, t; x, y) dy over [-c, c], c = |x| + 8 sqrt(t - s).
double density_normalization(double s, double t, double x, const AlphaStep& alpha,
                             const QuadratureSettings& quad = {});

/// | int p(s, r; x, z) p(r, t; z, y) dz - p(s, t; x, y) |.
double chapman_kolmogorov_residual(double s, double r, double t, double x, double y, const AlphaStep& alpha,
                                   const QuadratureSettings& quad = {});

/// E(X_t | X_s = xs) = xs + int_0^{t-s} (2 alpha(s + u) - 1) exp(-xs^2 / 2u) / sqrt(2 pi u) du.
double conditional_mean(double s, double t, double xs, const AlphaStep& alpha, const QuadratureSettings& quad = {});

/// int y p(s, t; x, y) dy, used to cross-check conditional_mean.
double kernel_first_moment(double s, double t, double x, const AlphaStep& alpha, const QuadratureSettings& quad = {});

/// Cumulative distribution of p(s, t; x, .) tabulated by exact segment integrals
/// on a y-grid with spacing `step` (0 is always a node), linear in between.
class KernelCdf {
public:
    KernelCdf(std::vector<double> nodes, std::vector<double> cumulative);
    double operator()(double y) const noexcept;
    double total_mass() const noexcept { return cumulative_.back(); }
    const std::vector<double>& nodes() const noexcept { return nodes_; }

private:
    std::vector<double> nodes_;
    std::vector<double> cumulative_;
};

KernelCdf tabulate_kernel_cdf(double s, double t, double x, const AlphaStep& alpha, double step = 0.005,
                              const QuadratureSettings& quad = {});

}  // namespace isbm
