#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace isbm {

double normal_cdf(double z) noexcept;

/// P(|start + W_var| <= y) for a centered Gaussian W_var of variance var.
double reflected_normal_cdf(double y, double start, double var) noexcept;

/// Sup distance between the empirical CDF of `sample` and `cdf`, both one-sided gaps.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

/// 95% asymptotic critical value 1.36/sqrt(n) of the one-sample KS statistic.
double ks_critical_95(std::size_t n) noexcept;

struct Summary {
    double mean = 0.0;
    double sd = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

Summary summarize(std::span<const double> xs) noexcept;

/// Empirical quantile (type 7, linear between order statistics).
double quantile(std::vector<double> xs, double q);

/// Least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace isbm
