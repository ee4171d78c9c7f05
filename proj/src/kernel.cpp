#include "isbm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "isbm/error.hpp"
#include "isbm/quadrature.hpp"

namespace isbm {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;  // 1/sqrt(2 pi)
constexpr double kAbsTol = 1e-15;
// r-range beyond the lower limit: exp(-(r0 + 12)^2) is below exp(-144).
constexpr double kGaussianReach = 12.0;

double gaussian_pdf(double var, double z) noexcept { return kInvSqrt2Pi / std::sqrt(var) * std::exp(-z * z / (2.0 * var)); }

int sgn(double v) noexcept { return (v > 0.0) - (v < 0.0); }

void check_covers(const AlphaStep& alpha, double t, const char* what) {
    if (t > alpha.horizon() * (1.0 + 1e-12) + 1e-12) {
        throw InvalidArgument(std::string(what) + ": alpha does not cover [s, t]");
    }
}

// Shifted breakpoints u_b = b - s with s < b < t.
std::vector<double> shifted_breaks(const AlphaStep& alpha, double s, double t) {
    std::vector<double> out;
    for (double b : alpha.breakpoints()) {
        if (b > s && b < t) out.push_back(b - s);
    }
    return out;
}

DensityValue density_off_zero(double s, double t, double x, double y, const AlphaStep& alpha,
                              const QuadratureSettings& quad) {
    const double tau = t - s;
    const double half = 0.5 * tau;
    const double ay = std::fabs(y);
    const double sy = static_cast<double>(sgn(y));
    const auto breaks = shifted_breaks(alpha, s, t);
    auto skew_weight = [&](double u) { return 1.0 + sy * (2.0 * alpha(s + u) - 1.0); };

    // Left half, u = v^2 in (0, tau/2].
    auto left = [&](double v) {
        const double u = v * v;
        const double start = u > 0.0 ? std::exp(-x * x / (2.0 * u)) : (x == 0.0 ? 1.0 : 0.0);
        const double w = tau - u;
        const double passage = ay * kInvSqrt2Pi / (w * std::sqrt(w)) * std::exp(-y * y / (2.0 * w));
        return skew_weight(u) * 2.0 * kInvSqrt2Pi * start * passage;
    };
    std::vector<double> left_pts{0.0};
    for (double ub : breaks) {
        if (ub < half) left_pts.push_back(std::sqrt(ub));
    }
    left_pts.push_back(std::sqrt(half));

    // Right half, r = |y| / sqrt(2 (tau - u)) in [|y|/sqrt(tau), inf).
    const double r0 = ay / std::sqrt(tau);
    const double r_max = r0 + kGaussianReach;
    auto right = [&](double r) {
        const double w = y * y / (2.0 * r * r);
        const double u = tau - w;
        return skew_weight(u) * gaussian_pdf(u, x) * (2.0 / std::sqrt(std::numbers::pi)) * std::exp(-r * r);
    };
    std::vector<double> right_pts{r0};
    for (auto it = breaks.rbegin(); it != breaks.rend(); ++it) {
        if (*it > half) {
            const double rb = ay / std::sqrt(2.0 * (tau - *it));
            if (rb < r_max) right_pts.push_back(rb);
        }
    }
    // For small |y| the start factor varies on the scale r ~ r0; resolve it geometrically.
    for (double r = 4.0 * r0; r < 1.0; r *= 4.0) right_pts.push_back(r);
    right_pts.push_back(r_max);
    std::sort(right_pts.begin(), right_pts.end());
    right_pts.erase(std::unique(right_pts.begin(), right_pts.end()), right_pts.end());

    const QuadResult a = integrate_adaptive(left, left_pts, quad.quad_tol, kAbsTol, quad.max_subdiv);
    const QuadResult b = integrate_adaptive(right, right_pts, quad.quad_tol, kAbsTol, quad.max_subdiv);
    double value = a.value + b.value;
    if (x * y > 0.0) value += gaussian_pdf(tau, y - x) - gaussian_pdf(tau, y + x);
    return DensityValue{value, a.error + b.error, a.intervals + b.intervals};
}

}  // namespace

void KernelQuery::validate() const {
    if (!(t > s)) throw InvalidArgument("KernelQuery: t must exceed s");
    if (!(quad.quad_tol > 0.0)) throw InvalidArgument("KernelQuery: quad_tol must be positive");
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(s) || !std::isfinite(t)) {
        throw InvalidArgument("KernelQuery: non-finite argument");
    }
}

DensityValue transition_density_detailed(const KernelQuery& q, const AlphaStep& alpha) {
    q.validate();
    check_covers(alpha, q.t, "transition_density");
    DensityValue out;
    if (q.y == 0.0) {
        const double delta = 1e-6 * std::sqrt(q.t - q.s);
        const DensityValue up = density_off_zero(q.s, q.t, q.x, delta, alpha, q.quad);
        const DensityValue down = density_off_zero(q.s, q.t, q.x, -delta, alpha, q.quad);
        out = {0.5 * (up.value + down.value), 0.5 * (up.error + down.error), up.intervals + down.intervals};
    } else {
        out = density_off_zero(q.s, q.t, q.x, q.y, alpha, q.quad);
    }
    // Quadrature noise can dip marginally below zero in the far tails.
    if (out.value < 0.0) out.value = 0.0;
    return out;
}

double transition_density(const KernelQuery& q, const AlphaStep& alpha) {
    return transition_density_detailed(q, alpha).value;
}

double constant_alpha_density(double tau, double x, double y, double a) {
    if (!(tau > 0.0)) throw InvalidArgument("constant_alpha_density: tau must be positive");
    if (!(a >= 0.0 && a <= 1.0)) throw InvalidArgument("constant_alpha_density: a outside [0, 1]");
    double p = (1.0 + sgn(y) * (2.0 * a - 1.0)) * gaussian_pdf(tau, std::fabs(x) + std::fabs(y));
    if (x * y > 0.0) p += gaussian_pdf(tau, y - x) - gaussian_pdf(tau, y + x);
    return p;
}

namespace {

QuadratureSettings outer_settings(const QuadratureSettings& quad) {
    return {quad.quad_tol, std::max<std::size_t>(quad.max_subdiv, 256)};
}

}  // namespace

double density_normalization(double s, double t, double x, const AlphaStep& alpha, const QuadratureSettings& quad) {
    KernelQuery q{s, t, x, 0.0, quad};
    q.validate();
    check_covers(alpha, t, "density_normalization");
    const double c = std::fabs(x) + 8.0 * std::sqrt(t - s);
    const double pts[] = {-c, 0.0, c};
    const auto outer = outer_settings(quad);
    auto p = [&](double y) {
        KernelQuery qy = q;
        qy.y = y;
        return transition_density(qy, alpha);
    };
    return integrate_adaptive(p, pts, outer.quad_tol, kAbsTol, outer.max_subdiv).value;
}

double chapman_kolmogorov_residual(double s, double r, double t, double x, double y, const AlphaStep& alpha,
                                   const QuadratureSettings& quad) {
    if (!(s < r && r < t)) throw InvalidArgument("chapman_kolmogorov_residual: need s < r < t");
    check_covers(alpha, t, "chapman_kolmogorov_residual");
    const double c = std::max(std::fabs(x), std::fabs(y)) + 8.0 * std::sqrt(t - s);
    const double pts[] = {-c, 0.0, c};
    const auto outer = outer_settings(quad);
    auto integrand = [&](double z) {
        return transition_density(KernelQuery{s, r, x, z, quad}, alpha) *
               transition_density(KernelQuery{r, t, z, y, quad}, alpha);
    };
    const double composed = integrate_adaptive(integrand, pts, outer.quad_tol, kAbsTol, outer.max_subdiv).value;
    return std::fabs(composed - transition_density(KernelQuery{s, t, x, y, quad}, alpha));
}

double conditional_mean(double s, double t, double xs, const AlphaStep& alpha, const QuadratureSettings& quad) {
    KernelQuery{s, t, xs, 0.0, quad}.validate();
    check_covers(alpha, t, "conditional_mean");
    const double tau = t - s;
    auto integrand = [&](double v) {
        const double u = v * v;
        const double start = u > 0.0 ? std::exp(-xs * xs / (2.0 * u)) : (xs == 0.0 ? 1.0 : 0.0);
        return (2.0 * alpha(s + u) - 1.0) * 2.0 * kInvSqrt2Pi * start;
    };
    std::vector<double> pts{0.0};
    for (double ub : shifted_breaks(alpha, s, t)) pts.push_back(std::sqrt(ub));
    pts.push_back(std::sqrt(tau));
    return xs + integrate_adaptive(integrand, pts, quad.quad_tol, kAbsTol, quad.max_subdiv).value;
}

double kernel_first_moment(double s, double t, double x, const AlphaStep& alpha, const QuadratureSettings& quad) {
    KernelQuery q{s, t, x, 0.0, quad};
    q.validate();
    check_covers(alpha, t, "kernel_first_moment");
    const double c = std::fabs(x) + 9.0 * std::sqrt(t - s);
    const double pts[] = {-c, 0.0, c};
    const auto outer = outer_settings(quad);
    auto integrand = [&](double y) {
        KernelQuery qy = q;
        qy.y = y;
        return y * transition_density(qy, alpha);
    };
    return integrate_adaptive(integrand, pts, outer.quad_tol, kAbsTol, outer.max_subdiv).value;
}

KernelCdf::KernelCdf(std::vector<double> nodes, std::vector<double> cumulative)
    : nodes_(std::move(nodes)), cumulative_(std::move(cumulative)) {
    if (nodes_.size() < 2 || nodes_.size() != cumulative_.size()) {
        throw InvalidArgument("KernelCdf: need matching node and value arrays");
    }
}

double KernelCdf::operator()(double y) const noexcept {
    if (y <= nodes_.front()) return 0.0;
    if (y >= nodes_.back()) return cumulative_.back();
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), y);
    const std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
    const double w = (y - nodes_[i]) / (nodes_[i + 1] - nodes_[i]);
    return cumulative_[i] + w * (cumulative_[i + 1] - cumulative_[i]);
}

KernelCdf tabulate_kernel_cdf(double s, double t, double x, const AlphaStep& alpha, double step,
                              const QuadratureSettings& quad) {
    KernelQuery q{s, t, x, 0.0, quad};
    q.validate();
    check_covers(alpha, t, "tabulate_kernel_cdf");
    if (!(step > 0.0)) throw InvalidArgument("tabulate_kernel_cdf: step must be positive");
    const double c = std::fabs(x) + 8.0 * std::sqrt(t - s);
    const auto per_side = static_cast<std::size_t>(std::ceil(c / step));
    std::vector<double> nodes;
    nodes.reserve(2 * per_side + 1);
    for (std::size_t i = per_side; i > 0; --i) nodes.push_back(-static_cast<double>(i) * step);
    nodes.push_back(0.0);
    for (std::size_t i = 1; i <= per_side; ++i) nodes.push_back(static_cast<double>(i) * step);

    auto p = [&](double y) {
        KernelQuery qy = q;
        qy.y = y;
        return transition_density(qy, alpha);
    };
    const auto outer = outer_settings(quad);
    std::vector<double> cumulative(nodes.size(), 0.0);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double pts[] = {nodes[i], nodes[i + 1]};
        cumulative[i + 1] = cumulative[i] + integrate_adaptive(p, pts, outer.quad_tol, kAbsTol, outer.max_subdiv).value;
    }
    return KernelCdf(std::move(nodes), std::move(cumulative));
}

}  // namespace isbm
