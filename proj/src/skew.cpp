#include "isbm/skew.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "isbm/error.hpp"

namespace isbm {

namespace {

std::size_t piece_index(const AlphaSpec& alpha, double t) {
    if (const auto* step = std::get_if<AlphaStep>(&alpha)) return step->interval_index(t);
    const auto& b = std::get<BorelAlpha>(alpha);
    if (b.level == 0) return 0;
    const double width = b.horizon / static_cast<double>(b.level);
    return static_cast<std::size_t>(std::clamp(std::floor(t / width), 0.0, static_cast<double>(b.level - 1)));
}

void require_covers(const AlphaSpec& alpha, const TimeGrid& grid, const char* what) {
    const double h = horizon_of(alpha);
    if (grid.horizon() > h * (1.0 + 1e-12) + 1e-12) {
        throw InvalidArgument(std::string(what) + ": alpha horizon does not cover the path");
    }
}

int sign_of(double v) noexcept { return (v > 0.0) - (v < 0.0); }

}  // namespace

SignAssignment draw_signs(const ExcursionSet& excursions, const AlphaSpec& alpha, const RngSpec& rng) {
    require_covers(alpha, excursions.grid(), "draw_signs");
    const CounterRng stream(rng.with_purpose(Purpose::signs));
    std::vector<SignRecord> records(excursions.size());
    for (std::size_t n = 0; n < excursions.size(); ++n) {
        const Excursion& e = excursions[n];
        SignRecord& r = records[n];
        r.excursion = n;
        r.alpha_interval = piece_index(alpha, e.g);
        r.alpha = evaluate(alpha, e.g);
        if (!e.starts_at_zero) {
            r.drawn = false;
            r.uniform = std::numeric_limits<double>::quiet_NaN();
            r.sign = e.sign;
        } else {
            r.uniform = stream.uniform(n);
            r.sign = r.uniform < r.alpha ? 1 : -1;
        }
    }
    const TimeGrid& grid = excursions.grid();
    std::vector<double> z(grid.size(), 0.0);
    for (std::size_t k = 0; k < z.size(); ++k) {
        const auto n = excursions.owner(k);
        if (n != ExcursionSet::kZeroSet) z[k] = records[static_cast<std::size_t>(n)].sign;
    }
    return SignAssignment{excursions, std::move(records), SamplePath(grid, std::move(z))};
}

IsbmPath construct_isbm(const SamplePath& bm, const ExcursionSet& excursions, const AlphaSpec& alpha,
                        const RngSpec& rng) {
    if (!(excursions.grid() == bm.grid())) throw GridMismatch("construct_isbm: excursions from another grid");
    SignAssignment signs = draw_signs(excursions, alpha, rng);
    const auto b = bm.values();
    const auto z = signs.z.values();
    std::vector<double> x(b.size());
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = z[k] * std::fabs(b[k]);
    return IsbmPath{SamplePath(bm.grid(), std::move(x)), std::move(signs)};
}

IsbmPath construct_isbm(const SamplePath& bm, const AlphaSpec& alpha, const RngSpec& rng) {
    return construct_isbm(bm, decompose_excursions(bm), alpha, rng);
}

namespace {

double path_scale(std::span<const double> v) {
    double s = 1.0;
    for (double x : v) s = std::max(s, std::fabs(x));
    return s;
}

}  // namespace

void validate(const SigmaDecomposition& sigma) {
    require_same_grid(sigma.x, sigma.martingale, "SigmaDecomposition");
    require_same_grid(sigma.x, sigma.increasing, "SigmaDecomposition");
    const auto x = sigma.x.values();
    const auto n = sigma.martingale.values();
    const auto a = sigma.increasing.values();
    const double roundoff = 1e-12 * path_scale(x);
    if (std::fabs(a[0]) > roundoff) throw InvalidArgument("SigmaDecomposition: A(0) must be 0");
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k] < 0.0) throw InvalidArgument("SigmaDecomposition: X must be nonnegative");
        if (std::fabs(x[k] - n[k] - a[k]) > roundoff) {
            throw InvalidArgument("SigmaDecomposition: X != N + A at grid index " + std::to_string(k));
        }
    }
    for (std::size_t j = 0; j + 1 < x.size(); ++j) {
        const double da = a[j + 1] - a[j];
        if (da < -roundoff) throw InvalidArgument("SigmaDecomposition: A decreases at step " + std::to_string(j));
        if (da > roundoff && std::min(x[j], x[j + 1]) > sigma.zero_tol) {
            throw InvalidArgument("SigmaDecomposition: A increases away from {X = 0} at step " + std::to_string(j));
        }
    }
}

SamplePath unfold_submartingale(const SigmaDecomposition& sigma, const RngSpec& rng) {
    validate(sigma);
    const auto x = sigma.x.values();
    const auto a = sigma.increasing.values();
    const double roundoff = 1e-12 * path_scale(x);
    std::vector<std::size_t> zero_steps;
    for (std::size_t j = 0; j + 1 < x.size(); ++j) {
        if (a[j + 1] - a[j] > roundoff && x[j] > 0.0 && x[j + 1] > 0.0) zero_steps.push_back(j);
    }
    const ExcursionSet excursions = decompose_marked(sigma.x, zero_steps);
    const SignAssignment signs =
        draw_signs(excursions, AlphaStep::constant(0.5, sigma.x.grid().horizon()), rng);
    std::vector<double> m(x.size());
    const auto z = signs.z.values();
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = z[k] * x[k];
    return SamplePath(sigma.x.grid(), std::move(m));
}

SamplePath balayage_residual(const SamplePath& k_path, const SamplePath& y) {
    require_same_grid(k_path, y, "balayage_residual");
    const ExcursionSet excursions = decompose_excursions(y);
    const auto k = k_path.values();
    const auto v = y.values();
    for (const Excursion& e : excursions.intervals()) {
        for (std::size_t j = e.first + 1; j <= e.last; ++j) {
            if (k[j] != k[e.first]) {
                throw InvalidArgument("balayage_residual: k varies inside the excursion starting at t=" +
                                      std::to_string(e.g));
            }
        }
    }
    std::vector<double> r(v.size());
    double integral = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) integral += k[i - 1] * (v[i] - v[i - 1]);
        // k at the last zero: the excursion value, or k itself on the zero set
        r[i] = k[i] * v[i] - k[0] * v[0] - integral;
    }
    return SamplePath(y.grid(), std::move(r));
}

SamplePath skew_local_time_integral(const LocalTimeCurve& local_time, const AlphaSpec& alpha) {
    const TimeGrid& grid = local_time.values.grid();
    require_covers(alpha, grid, "skew_local_time_integral");
    const auto l = local_time.values.values();
    const bool at_jump = local_time.kind == LocalTimeEstimator::upcrossing;
    std::vector<double> out(l.size(), 0.0);
    double last_t = std::numeric_limits<double>::quiet_NaN();
    double weight = 0.0;
    for (std::size_t j = 0; j + 1 < l.size(); ++j) {
        const double dl = l[j + 1] - l[j];
        if (dl != 0.0) {
            const double t = grid.time(at_jump ? j + 1 : j);
            if (t != last_t) {
                weight = 2.0 * evaluate(alpha, t) - 1.0;
                last_t = t;
            }
            out[j + 1] = out[j] + weight * dl;
        } else {
            out[j + 1] = out[j];
        }
    }
    return SamplePath(grid, std::move(out));
}

double skew_identity_residual(const SignAssignment& signs, const SamplePath& y, const AlphaSpec& alpha,
                              const LocalTimeCurve& local_time) {
    require_same_grid(signs.z, y, "skew_identity_residual");
    require_same_grid(y, local_time.values, "skew_identity_residual");
    const auto z = signs.z.values();
    const auto v = y.values();
    const SamplePath lt = skew_local_time_integral(local_time, alpha);
    const auto skew = lt.values();
    double integral = 0.0;
    double sup = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k > 0) {
            const std::size_t j = k - 1;
            const double dy = signs.excursions.zero_inside_step(j) ? -(v[j] + v[k]) : v[k] - v[j];
            integral += z[j] * dy;
        }
        sup = std::max(sup, std::fabs(z[k] * v[k] - z[0] * v[0] - integral - skew[k]));
    }
    return sup;
}

SdeResidual sde_residual(const SamplePath& x, const SamplePath& bm, const AlphaSpec& alpha,
                         const LocalTimeCurve& local_time, double x0) {
    require_same_grid(x, bm, "sde_residual");
    require_same_grid(x, local_time.values, "sde_residual");
    const auto xv = x.values();
    const auto bv = bm.values();
    for (std::size_t k = 0; k < xv.size(); ++k) {
        if (std::fabs(xv[k]) != std::fabs(bv[k])) {
            throw InvalidArgument("sde_residual: |X| differs from |B|; X was not built from B");
        }
    }
    std::vector<double> w(xv.size(), 0.0);
    for (std::size_t j = 0; j + 1 < xv.size(); ++j) {
        const double zs = static_cast<double>(sign_of(xv[j]) * sign_of(bv[j]));
        w[j + 1] = w[j] + zs * (bv[j + 1] - bv[j]);
    }
    SdeResidual out{0.0, 0.0, false, SamplePath(x.grid(), std::move(w))};
    const SamplePath lt = skew_local_time_integral(local_time, alpha);
    const auto skew = lt.values();
    const auto wv = out.driver.values();
    for (std::size_t k = 0; k < xv.size(); ++k) {
        out.sup_residual = std::max(out.sup_residual, std::fabs(xv[k] - x0 - wv[k] - skew[k]));
    }
    out.driver_qv = quadratic_variation(out.driver).back();
    const double span = x.grid().horizon() - x.grid().origin();
    out.driver_qv_ok = std::fabs(out.driver_qv - span) <= 0.05 * span;
    return out;
}

}  // namespace isbm
