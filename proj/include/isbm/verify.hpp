#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "isbm/alpha.hpp"
#include "isbm/kernel.hpp"
#include "isbm/skew.hpp"

namespace isbm {

/// Monte Carlo budget shared by all experiments.
struct MonteCarloConfig {
    std::size_t paths = 50000;
    double dt = 1e-4;
    double eps = 0.03;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    double x0 = 0.0;
    QuadratureSettings quad{};

    /// Thread count is left out: results do not depend on it.
    nlohmann::json to_json() const;
};

/// Outcome of one experiment. Statistics are objects {value, se}; thresholds are
/// objects {value, null_quantile, allowance} with value = null_quantile + allowance.
struct ExperimentReport {
    std::string experiment;
    nlohmann::json params = nlohmann::json::object();
    nlohmann::json stats = nlohmann::json::object();
    nlohmann::json thresholds = nlohmann::json::object();
    bool pass = false;

    nlohmann::json to_json() const;
};

nlohmann::json statistic(double value, double se);
nlohmann::json threshold(double null_quantile, double allowance);

/// Path i of an experiment: B from stream (seed, brownian, i), signs from (seed, signs, i).
struct SimulatedPath {
    SamplePath bm;
    IsbmPath isbm;
};
SimulatedPath simulate_isbm(const TimeGrid& grid, const AlphaSpec& alpha, std::uint64_t seed, std::size_t index,
                            double x0);

/// KS(|X_t|, law of |x0 + B_t|) < 1.5 * 1.36/sqrt(N) + 0.003.
ExperimentReport reflection_law_test(const AlphaSpec& alpha, double t, const MonteCarloConfig& cfg);

/// KS(X_t, CDF of p^alpha(0, t; x0, .)) with the same threshold.
ExperimentReport marginal_vs_kernel_test(const AlphaStep& alpha, double t, const MonteCarloConfig& cfg);

/// m4(eps) = E|X_{t+eps} - X_t|^4; pass iff the log-log slope lies in [1.9, 2.1].
/// With `reference_ratio`, every m4(eps)/eps^2 must also lie within 0.15 of it.
ExperimentReport moment_scaling_test(const AlphaSpec& alpha, double t, const std::vector<double>& eps_grid,
                                     const MonteCarloConfig& cfg, std::optional<double> reference_ratio = {});

/// (a) binned X_t - E(X_t | X_s) within 3 s.e. in every bin; (b) M = X - int (2 alpha - 1) dL
/// has mean increment 0 within 3 s.e. and quadratic variation (t - s)(1 +- 5%).
/// Bins are equal-count quantile bins of X_s (a single bin when X_s is deterministic).
ExperimentReport martingale_identity_test(const AlphaStep& alpha, double s, double t, const MonteCarloConfig& cfg,
                                          std::size_t bins = 10);

/// D_n = E sup_t |X^{alpha_n}_t - X^alpha_t|^2 under shared Brownian paths and shared
/// per-excursion uniforms.
ExperimentReport stability_experiment(const std::vector<AlphaSpec>& alpha_seq, const AlphaSpec& alpha_limit,
                                      const MonteCarloConfig& cfg, double horizon = 1.0);
/// `index,pieces,D,se,disagreement_rate,expected_rate` rows from a stability report.
std::string stability_csv(const ExperimentReport& report);

/// Same inputs give bitwise-equal paths; another sign seed changes X but not |X|.
ExperimentReport uniqueness_probe(const AlphaSpec& alpha, const MonteCarloConfig& cfg, double horizon = 1.0);

/// Mean of the upcrossing estimate of L_t for BM within sqrt(2t/pi)(1 +- 3%), and
/// agreement of the upcrossing and occupation means within 0.05.
ExperimentReport local_time_calibration_test(double t, const MonteCarloConfig& cfg);

/// Sup residuals of the skew identity and of the SDE for `alpha`, against the q95
/// envelope of an independent alpha = 1 baseline at the same (dt, eps).
ExperimentReport pathwise_identity_test(const AlphaSpec& alpha, const MonteCarloConfig& cfg, double horizon = 1.0);

/// transition_density vs constant_alpha_density over the reference grid.
ExperimentReport kernel_reduction_check(const QuadratureSettings& quad = {});
/// 10 constant-alpha and 10 16-piece configurations.
ExperimentReport kernel_normalization_check(std::uint64_t seed, const QuadratureSettings& quad = {});
/// 10 configurations with a breakpoint at the intermediate time.
ExperimentReport chapman_kolmogorov_check(std::uint64_t seed, const QuadratureSettings& quad = {});

}  // namespace isbm
