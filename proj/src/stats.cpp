#include "isbm/stats.hpp"

#include <algorithm>
#include <cmath>

#include "isbm/error.hpp"

namespace isbm {

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double reflected_normal_cdf(double y, double start, double var) noexcept {
    if (y <= 0.0) return 0.0;
    const double sd = std::sqrt(var);
    const double a = std::fabs(start);
    return normal_cdf((y - a) / sd) - normal_cdf((-y - a) / sd);
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw InvalidArgument("ks_distance: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_critical_95(std::size_t n) noexcept { return 1.36 / std::sqrt(static_cast<double>(n)); }

Summary summarize(std::span<const double> xs) noexcept {
    Summary s;
    s.n = xs.size();
    if (xs.empty()) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
        s.se = s.sd / std::sqrt(static_cast<double>(s.n));
    }
    return s;
}

double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw InvalidArgument("quantile: empty sample");
    std::sort(xs.begin(), xs.end());
    const double h = (static_cast<double>(xs.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("ols_slope: need two or more paired points");
    const Summary sx = summarize(x);
    const Summary sy = summarize(y);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - sx.mean) * (y[i] - sy.mean);
        sxx += (x[i] - sx.mean) * (x[i] - sx.mean);
    }
    return sxy / sxx;
}

}  // namespace isbm
