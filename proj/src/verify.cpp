#include "isbm/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <variant>

#include "isbm/error.hpp"
#include "isbm/excursion.hpp"
#include "isbm/parallel.hpp"
#include "isbm/stats.hpp"

namespace isbm {

using nlohmann::json;

namespace {

constexpr double kKsAllowance = 0.003;

double ks_threshold_quantile(std::size_t n) { return 1.5 * ks_critical_95(n); }

json summary_json(const Summary& s) { return statistic(s.mean, s.se); }

json alpha_json(const AlphaSpec& spec) {
    if (const auto* step = std::get_if<AlphaStep>(&spec)) {
        return {{"kind", "step"}, {"inline", to_inline(*step)}, {"horizon", step->horizon()}};
    }
    const auto& borel = std::get<BorelAlpha>(spec);
    return {{"kind", "function"}, {"name", borel.name}, {"level", borel.level}, {"horizon", borel.horizon}};
}

json base_params(const MonteCarloConfig& cfg, const AlphaSpec& alpha) {
    json p = cfg.to_json();
    p["alpha"] = alpha_json(alpha);
    return p;
}

void check_paths(const MonteCarloConfig& cfg, std::size_t minimum, const char* what) {
    if (cfg.paths < minimum) {
        throw InvalidArgument(std::string(what) + ": at least " + std::to_string(minimum) + " paths required");
    }
}

bool degenerate_alpha(const AlphaSpec& spec) {
    const auto* step = std::get_if<AlphaStep>(&spec);
    if (!step) return false;
    return std::all_of(step->values().begin(), step->values().end(), [](double a) { return a == 0.0 || a == 1.0; });
}

}  // namespace

json MonteCarloConfig::to_json() const {
    return {{"paths", paths}, {"dt", dt}, {"eps", eps}, {"seed", seed}, {"x0", x0},
            {"quad_tol", quad.quad_tol}, {"max_subdiv", quad.max_subdiv}};
}

json ExperimentReport::to_json() const {
    return {{"experiment", experiment}, {"params", params}, {"stats", stats}, {"thresholds", thresholds}, {"pass", pass}};
}

json statistic(double value, double se) { return {{"value", value}, {"se", se}}; }

json threshold(double null_quantile, double allowance) {
    return {{"value", null_quantile + allowance}, {"null_quantile", null_quantile}, {"allowance", allowance}};
}

SimulatedPath simulate_isbm(const TimeGrid& grid, const AlphaSpec& alpha, std::uint64_t seed, std::size_t index,
                            double x0) {
    const RngSpec rng{seed, Purpose::brownian, index};
    SamplePath bm = simulate_bm(grid, rng, x0);
    IsbmPath isbm = construct_isbm(bm, alpha, rng.with_purpose(Purpose::signs));
    return {std::move(bm), std::move(isbm)};
}

ExperimentReport reflection_law_test(const AlphaSpec& alpha, double t, const MonteCarloConfig& cfg) {
    check_paths(cfg, 1000, "reflection_law_test");
    const TimeGrid grid = make_grid(0.0, t, cfg.dt);
    std::vector<double> sample(cfg.paths);
    std::vector<char> abs_match(cfg.paths, 0);
    parallel_for(cfg.paths, cfg.threads, [&](std::size_t i) {
        const auto sim = simulate_isbm(grid, alpha, cfg.seed, i, cfg.x0);
        sample[i] = std::fabs(sim.isbm.x.back());
        bool same = true;
        for (std::size_t k = 0; k < grid.size() && same; ++k) same = std::fabs(sim.isbm.x[k]) == std::fabs(sim.bm[k]);
        abs_match[i] = same;
    });
    const double horizon = grid.horizon();
    const double ks = ks_distance(sample, [&](double y) { return reflected_normal_cdf(y, cfg.x0, horizon); });
    const auto mismatched = static_cast<std::size_t>(std::count(abs_match.begin(), abs_match.end(), 0));

    ExperimentReport r;
    r.experiment = "reflection";
    r.params = base_params(cfg, alpha);
    r.params["t"] = horizon;
    // se: asymptotic sd of the Kolmogorov distribution, 0.2605/sqrt(N).
    r.stats["ks"] = statistic(ks, 0.2605 / std::sqrt(static_cast<double>(cfg.paths)));
    r.stats["abs_mismatch_paths"] = statistic(static_cast<double>(mismatched), 0.0);
    r.thresholds["ks"] = threshold(ks_threshold_quantile(cfg.paths), kKsAllowance);
    r.pass = ks < r.thresholds["ks"]["value"].get<double>() && mismatched == 0;
    return r;
}

ExperimentReport marginal_vs_kernel_test(const AlphaStep& alpha, double t, const MonteCarloConfig& cfg) {
    check_paths(cfg, 10000, "marginal_vs_kernel_test");
    const TimeGrid grid = make_grid(0.0, t, cfg.dt);
    std::vector<double> sample(cfg.paths);
    parallel_for(cfg.paths, cfg.threads, [&](std::size_t i) {
        sample[i] = simulate_isbm(grid, alpha, cfg.seed, i, cfg.x0).isbm.x.back();
    });
    const KernelCdf cdf = tabulate_kernel_cdf(0.0, grid.horizon(), cfg.x0, alpha, 0.005, cfg.quad);
    const double ks = ks_distance(sample, [&](double y) { return cdf(y); });

    ExperimentReport r;
    r.experiment = "marginal";
    r.params = base_params(cfg, alpha);
    r.params["t"] = grid.horizon();
    r.params["cdf_step"] = 0.005;
    r.stats["ks"] = statistic(ks, 0.2605 / std::sqrt(static_cast<double>(cfg.paths)));
    r.stats["kernel_mass"] = statistic(cdf.total_mass(), 0.0);
    r.thresholds["ks"] = threshold(ks_threshold_quantile(cfg.paths), kKsAllowance);
    r.pass = ks < r.thresholds["ks"]["value"].get<double>();
    return r;
}

ExperimentReport moment_scaling_test(const AlphaSpec& alpha, double t, const std::vector<double>& eps_grid,
                                     const MonteCarloConfig& cfg, std::optional<double> reference_ratio) {
    check_paths(cfg, 10000, "moment_scaling_test");
    if (eps_grid.size() < 2) throw InvalidArgument("moment_scaling_test: need at least two eps values");
    const double max_eps = *std::max_element(eps_grid.begin(), eps_grid.end());
    if (!(*std::min_element(eps_grid.begin(), eps_grid.end()) > 0.0) || t + max_eps > horizon_of(alpha) + 1e-12) {
        throw InvalidArgument("moment_scaling_test: eps grid must lie in (0, horizon - t]");
    }
    const TimeGrid grid = make_grid(0.0, t + max_eps, cfg.dt);
    const std::size_t kt = grid.index_at_or_before(t + 0.5 * grid.dt());
    std::vector<std::size_t> ke;
    for (double e : eps_grid) ke.push_back(grid.index_at_or_before(t + e + 0.5 * grid.dt()));

    std::vector<std::vector<double>> m4(eps_grid.size(), std::vector<double>(cfg.paths));
    parallel_for(cfg.paths, cfg.threads, [&](std::size_t i) {
        const auto sim = simulate_isbm(grid, alpha, cfg.seed, i, cfg.x0);
        for (std::size_t e = 0; e < ke.size(); ++e) m4[e][i] = std::pow(sim.isbm.x[ke[e]] - sim.isbm.x[kt], 4);
    });

    ExperimentReport r;
    r.experiment = "moments";
    r.params = base_params(cfg, alpha);
    r.params["t"] = t;
    r.params["eps_grid"] = eps_grid;

    std::vector<double> log_eps, log_m, var_log_m;
    json rows = json::array();
    double fitted_c = 0.0;
    double worst_ratio_gap = 0.0;
    double worst_ratio_se = 0.0;
    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
        const Summary s = summarize(m4[e]);
        const double lag = grid.time(ke[e]) - grid.time(kt);
        const double ratio = s.mean / (lag * lag);
        const double ratio_se = s.se / (lag * lag);
        fitted_c = std::max(fitted_c, ratio);
        if (reference_ratio) {
            const double gap = std::fabs(ratio - *reference_ratio);
            if (gap >= worst_ratio_gap) {
                worst_ratio_gap = gap;
                worst_ratio_se = ratio_se;
            }
        }
        log_eps.push_back(std::log(lag));
        log_m.push_back(std::log(s.mean));
        var_log_m.push_back((s.se / s.mean) * (s.se / s.mean));
        rows.push_back({{"eps", lag}, {"m4", statistic(s.mean, s.se)}, {"ratio", statistic(ratio, ratio_se)}});
    }
    const double slope = ols_slope(log_eps, log_m);
    const double mean_x = std::accumulate(log_eps.begin(), log_eps.end(), 0.0) / static_cast<double>(log_eps.size());
    double sxx = 0.0;
    for (double x : log_eps) sxx += (x - mean_x) * (x - mean_x);
    double slope_var = 0.0;
    for (std::size_t e = 0; e < log_eps.size(); ++e) {
        const double w = (log_eps[e] - mean_x) / sxx;
        slope_var += w * w * var_log_m[e];
    }

    r.stats["per_eps"] = rows;
    r.stats["slope"] = statistic(slope, std::sqrt(slope_var));
    r.stats["fitted_constant"] = statistic(fitted_c, 0.0);
    r.thresholds["slope_low"] = threshold(2.0, -0.1);
    r.thresholds["slope_high"] = threshold(2.0, 0.1);
    r.pass = slope >= 1.9 && slope <= 2.1;
    if (reference_ratio) {
        const double band = 0.15;
        const double q = std::min(band, 3.0 * worst_ratio_se);
        r.params["reference_ratio"] = *reference_ratio;
        r.stats["max_ratio_deviation"] = statistic(worst_ratio_gap, worst_ratio_se);
        r.thresholds["ratio_deviation"] = threshold(q, band - q);
        r.pass = r.pass && worst_ratio_gap <= band;
    }
    return r;
}

ExperimentReport martingale_identity_test(const AlphaStep& alpha, double s, double t, const MonteCarloConfig& cfg,
                                          std::size_t bins) {
    check_paths(cfg, 1000, "martingale_identity_test");
    if (!(s < t)) throw InvalidArgument("martingale_identity_test: s < t required");
    if (bins == 0) throw InvalidArgument("martingale_identity_test: bins must be positive");
    const TimeGrid grid = make_grid(0.0, t, cfg.dt);
    const std::size_t ks = grid.index_at_or_before(s + 0.5 * grid.dt());
    const std::size_t kt = grid.steps();
    const double s_grid = grid.time(ks);
    const double t_grid = grid.horizon();

    std::vector<double> xs(cfg.paths), residual(cfg.paths), dm(cfg.paths), qv(cfg.paths);
    parallel_for(cfg.paths, cfg.threads, [&](std::size_t i) {
        const auto sim = simulate_isbm(grid, alpha, cfg.seed, i, cfg.x0);
        const SamplePath& x = sim.isbm.x;
        xs[i] = x[ks];
        residual[i] = x[kt] - conditional_mean(s_grid, t_grid, x[ks], alpha, cfg.quad);
        const LocalTimeCurve lt = local_time_occupation(sim.bm, cfg.eps);
        const SamplePath drift = skew_local_time_integral(lt, alpha);
        auto m = [&](std::size_t k) { return x[k] - drift[k]; };
        dm[i] = m(kt) - m(ks);
        double q = 0.0;
        for (std::size_t k = ks; k < kt; ++k) {
            const double d = m(k + 1) - m(k);
            q += d * d;
        }
        qv[i] = q;
    });

    ExperimentReport r;
    r.experiment = "martingale";
    r.params = base_params(cfg, alpha);
    r.params["s"] = s_grid;
    r.params["t"] = t_grid;
    r.params["bins"] = bins;
    r.params["local_time_estimator"] = "occupation";

    std::vector<std::size_t> order(cfg.paths);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    const bool single_start = xs[order.front()] == xs[order.back()];
    const std::size_t nb = single_start ? 1 : std::min(bins, cfg.paths);
    json bin_rows = json::array();
    double worst_z = 0.0;
    bool bins_ok = true;
    for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t lo = cfg.paths * b / nb;
        const std::size_t hi = cfg.paths * (b + 1) / nb;
        std::vector<double> res;
        res.reserve(hi - lo);
        for (std::size_t j = lo; j < hi; ++j) res.push_back(residual[order[j]]);
        const Summary sum = summarize(res);
        const double z = sum.se > 0.0 ? std::fabs(sum.mean) / sum.se : (sum.mean == 0.0 ? 0.0 : INFINITY);
        worst_z = std::max(worst_z, z);
        bins_ok = bins_ok && z <= 3.0;
        bin_rows.push_back({{"x_low", xs[order[lo]]},
                            {"x_high", xs[order[hi - 1]]},
                            {"paths", hi - lo},
                            {"mean_residual", summary_json(sum)}});
    }
    const Summary inc = summarize(dm);
    const Summary q = summarize(qv);
    const double len = t_grid - s_grid;
    const double inc_z = inc.se > 0.0 ? std::fabs(inc.mean) / inc.se : 0.0;
    const double qv_rel = q.mean / len - 1.0;

    r.stats["bins"] = bin_rows;
    r.stats["max_bin_z"] = statistic(worst_z, 0.0);
    r.stats["increment_mean"] = summary_json(inc);
    r.stats["quadratic_variation"] = summary_json(q);
    r.stats["quadratic_variation_relative_error"] = statistic(qv_rel, q.se / len);
    r.thresholds["bin_z"] = threshold(3.0, 0.0);
    r.thresholds["increment_z"] = threshold(3.0, 0.0);
    r.thresholds["quadratic_variation_relative_error"] = threshold(0.0, 0.05);
    r.pass = bins_ok && inc_z <= 3.0 && std::fabs(qv_rel) <= 0.05;
    return r;
}

ExperimentReport stability_experiment(const std::vector<AlphaSpec>& alpha_seq, const AlphaSpec& alpha_limit,
                                      const MonteCarloConfig& cfg, double horizon) {
    if (alpha_seq.empty()) throw InvalidArgument("stability_experiment: empty alpha sequence");
    if (cfg.paths < 2) throw InvalidArgument("stability_experiment: at least two paths required");
    const double h = horizon_of(alpha_limit);
    for (const auto& a : alpha_seq) {
        if (std::fabs(horizon_of(a) - h) > 1e-12) throw InvalidArgument("stability_experiment: horizon mismatch");
    }
    if (horizon > h + 1e-12) throw InvalidArgument("stability_experiment: horizon exceeds alpha horizon");
    const TimeGrid grid = make_grid(0.0, horizon, cfg.dt);
    const std::size_t m = alpha_seq.size();

    std::vector<std::vector<double>> dist(m, std::vector<double>(cfg.paths));
    std::vector<std::vector<double>> flips(m, std::vector<double>(cfg.paths));
    std::vector<std::vector<double>> expected(m, std::vector<double>(cfg.paths));
    std::vector<std::vector<double>> expected_var(m, std::vector<double>(cfg.paths));
    std::vector<double> drawn(cfg.paths);
    std::vector<char> geometry_shared(cfg.paths, 1);

    parallel_for(cfg.paths, cfg.threads, [&](std::size_t i) {
        const RngSpec rng{cfg.seed, Purpose::brownian, i};
        const SamplePath bm = simulate_bm(grid, rng, cfg.x0);
        const ExcursionSet ex = decompose_excursions(bm);
        const RngSpec signs = rng.with_purpose(Purpose::signs);
        const IsbmPath limit = construct_isbm(bm, ex, alpha_limit, signs);
        std::size_t n_drawn = 0;
        for (const auto& rec : limit.signs.records) n_drawn += rec.drawn ? 1 : 0;
        drawn[i] = static_cast<double>(n_drawn);
        for (std::size_t n = 0; n < m; ++n) {
            const IsbmPath xn = construct_isbm(bm, ex, alpha_seq[n], signs);
            double sup = 0.0;
            for (std::size_t k = 0; k < grid.size(); ++k) {
                const double d = xn.x[k] - limit.x[k];
                sup = std::max(sup, d * d);
            }
            dist[n][i] = sup;
            if (xn.signs.records.size() != limit.signs.records.size()) geometry_shared[i] = 0;
            double f = 0.0, e = 0.0, v = 0.0;
            for (std::size_t j = 0; j < limit.signs.records.size(); ++j) {
                const auto& a = xn.signs.records[j];
                const auto& b = limit.signs.records[j];
                if (!b.drawn) continue;
                f += a.sign != b.sign ? 1.0 : 0.0;
                const double p = std::fabs(a.alpha - b.alpha);
                e += p;
                v += p * (1.0 - p);
            }
            flips[n][i] = f;
            expected[n][i] = e;
            expected_var[n][i] = v;
        }
    });

    ExperimentReport r;
    r.experiment = "stability";
    r.params = base_params(cfg, alpha_limit);
    r.params["horizon"] = grid.horizon();
    json seq = json::array();
    for (const auto& a : alpha_seq) seq.push_back(alpha_json(a));
    r.params["alpha_seq"] = seq;

    const double total_drawn = std::accumulate(drawn.begin(), drawn.end(), 0.0);
    json rows = json::array();
    std::vector<Summary> d(m);
    bool flips_ok = true;
    for (std::size_t n = 0; n < m; ++n) {
        d[n] = summarize(dist[n]);
        const double f = std::accumulate(flips[n].begin(), flips[n].end(), 0.0);
        const double e = std::accumulate(expected[n].begin(), expected[n].end(), 0.0);
        const double v = std::accumulate(expected_var[n].begin(), expected_var[n].end(), 0.0);
        const double rate = total_drawn > 0 ? f / total_drawn : 0.0;
        const double rate_expected = total_drawn > 0 ? e / total_drawn : 0.0;
        const double rate_se = total_drawn > 0 ? std::sqrt(v) / total_drawn : 0.0;
        flips_ok = flips_ok && std::fabs(rate - rate_expected) <= 3.0 * rate_se + 1e-15;
        std::size_t pieces = 0;
        if (const auto* step = std::get_if<AlphaStep>(&alpha_seq[n])) pieces = step->pieces();
        if (const auto* borel = std::get_if<BorelAlpha>(&alpha_seq[n])) pieces = borel->level;
        rows.push_back({{"n", n},
                        {"pieces", pieces},
                        {"D", summary_json(d[n])},
                        {"disagreement_rate", statistic(rate, rate_se)},
                        {"expected_rate", rate_expected}});
    }

    bool nonincreasing = true;
    bool strictly_decreasing = true;
    json steps = json::array();
    for (std::size_t n = 0; n + 1 < m; ++n) {
        std::vector<double> diff(cfg.paths);
        for (std::size_t i = 0; i < cfg.paths; ++i) diff[i] = dist[n][i] - dist[n + 1][i];
        const Summary ds = summarize(diff);
        nonincreasing = nonincreasing && d[n + 1].mean <= d[n].mean + d[n].se;
        strictly_decreasing = strictly_decreasing && ds.mean > ds.se;
        steps.push_back(summary_json(ds));
    }
    const bool shrinks = d.back().mean < d.front().mean / 4.0;
    const bool all_zero = std::all_of(d.begin(), d.end(), [](const Summary& s) { return s.mean == 0.0; });
    const bool shared = std::all_of(geometry_shared.begin(), geometry_shared.end(), [](char c) { return c != 0; });

    r.stats["per_n"] = rows;
    r.stats["paired_decrease"] = steps;
    r.stats["excursions_drawn"] = statistic(total_drawn, 0.0);
    r.stats["nonincreasing_within_se"] = nonincreasing;
    r.stats["strictly_decreasing_beyond_se"] = strictly_decreasing;
    r.stats["last_below_quarter_first"] = shrinks;
    r.stats["all_distances_zero"] = all_zero;
    r.stats["disagreement_rates_within_3se"] = flips_ok;
    r.stats["excursion_geometry_shared"] = shared;
    r.thresholds["last_over_first"] = threshold(0.25, 0.0);
    r.thresholds["step_decrease_se"] = threshold(1.0, 0.0);
    r.pass = nonincreasing && shrinks && shared;
    return r;
}

std::string stability_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "index,pieces,D,se,disagreement_rate,expected_rate\n";
    for (const auto& row : report.stats.at("per_n")) {
        out << row.at("n").get<std::size_t>() << ',' << row.at("pieces").get<std::size_t>() << ','
            << row.at("D").at("value").get<double>() << ',' << row.at("D").at("se").get<double>() << ','
            << row.at("disagreement_rate").at("value").get<double>() << ','
            << row.at("expected_rate").get<double>() << '\n';
    }
    return out.str();
}

ExperimentReport uniqueness_probe(const AlphaSpec& alpha, const MonteCarloConfig& cfg, double horizon) {
    if (cfg.paths == 0) throw InvalidArgument("uniqueness_probe: at least one path required");
    const TimeGrid grid = make_grid(0.0, horizon, cfg.dt);
    std::vector<char> rerun_equal(cfg.paths), abs_equal(cfg.paths), differs(cfg.paths);
    parallel_for(cfg.paths, cfg.threads, [&](std::size_t i) {
        const RngSpec rng{cfg.seed, Purpose::brownian, i};
        const SamplePath bm = simulate_bm(grid, rng, cfg.x0);
        const RngSpec signs = rng.with_purpose(Purpose::signs);
        const IsbmPath a = construct_isbm(bm, alpha, signs);
        const IsbmPath b = construct_isbm(simulate_bm(grid, rng, cfg.x0), alpha, signs);
        const IsbmPath c = construct_isbm(bm, alpha, signs.with_seed(cfg.seed + 0x9e3779b97f4a7c15ULL));
        rerun_equal[i] = a.x == b.x;
        differs[i] = !(a.x == c.x);
        bool same_abs = true;
        for (std::size_t k = 0; k < grid.size() && same_abs; ++k) same_abs = std::fabs(a.x[k]) == std::fabs(c.x[k]);
        abs_equal[i] = same_abs;
    });
    auto count = [&](const std::vector<char>& v) {
        return static_cast<double>(std::count_if(v.begin(), v.end(), [](char c) { return c != 0; }));
    };
    const double n = static_cast<double>(cfg.paths);
    const bool degenerate = degenerate_alpha(alpha);

    ExperimentReport r;
    r.experiment = "uniqueness";
    r.params = base_params(cfg, alpha);
    r.params["horizon"] = grid.horizon();
    r.stats["rerun_identical"] = statistic(count(rerun_equal), 0.0);
    r.stats["abs_identical_across_sign_seeds"] = statistic(count(abs_equal), 0.0);
    r.stats["differ_across_sign_seeds"] = statistic(count(differs), 0.0);
    r.stats["degenerate_alpha"] = degenerate;
    r.pass = count(rerun_equal) == n && count(abs_equal) == n &&
             (degenerate ? count(differs) == 0.0 : count(differs) > 0.0);
    return r;
}

ExperimentReport local_time_calibration_test(double t, const MonteCarloConfig& cfg) {
    check_paths(cfg, 100, "local_time_calibration_test");
    const TimeGrid grid = make_grid(0.0, t, cfg.dt);
    std::vector<double> up(cfg.paths), occ(cfg.paths), absdiff(cfg.paths);
    parallel_for(cfg.paths, cfg.threads, [&](std::size_t i) {
        const SamplePath bm = simulate_bm(grid, RngSpec{cfg.seed, Purpose::brownian, i}, 0.0);
        up[i] = local_time_upcrossing(bm, cfg.eps).final_value();
        occ[i] = local_time_occupation(bm, cfg.eps).final_value();
        absdiff[i] = std::fabs(up[i] - occ[i]);
    });
    const Summary su = summarize(up);
    const Summary so = summarize(occ);
    std::vector<double> diff(cfg.paths);
    for (std::size_t i = 0; i < cfg.paths; ++i) diff[i] = up[i] - occ[i];
    const Summary sd = summarize(diff);
    const Summary sa = summarize(absdiff);
    const double target = std::sqrt(2.0 * grid.horizon() / std::numbers::pi);

    ExperimentReport r;
    r.experiment = "localtime";
    r.params = cfg.to_json();
    r.params["t"] = grid.horizon();
    r.params["barriers"] = "overshoot_corrected";
    r.stats["target"] = statistic(target, 0.0);
    r.stats["upcrossing_mean"] = summary_json(su);
    r.stats["occupation_mean"] = summary_json(so);
    r.stats["upcrossing_relative_error"] = statistic(su.mean / target - 1.0, su.se / target);
    r.stats["occupation_relative_error"] = statistic(so.mean / target - 1.0, so.se / target);
    r.stats["mean_difference"] = summary_json(sd);
    r.stats["mean_absolute_difference"] = summary_json(sa);
    r.thresholds["upcrossing_relative_error"] = threshold(0.0, 0.03);
    r.thresholds["mean_difference"] = threshold(0.0, 0.05);
    r.pass = std::fabs(su.mean / target - 1.0) <= 0.03 && std::fabs(sd.mean) < 0.05;
    return r;
}

ExperimentReport pathwise_identity_test(const AlphaSpec& alpha, const MonteCarloConfig& cfg, double horizon) {
    check_paths(cfg, 20, "pathwise_identity_test");
    const TimeGrid grid = make_grid(0.0, horizon, cfg.dt);
    const AlphaStep tanaka = AlphaStep::constant(1.0, horizon_of(alpha));
    const std::size_t n = cfg.paths;

    std::vector<double> skew(n), sde(n), base_skew(n), base_sde(n), driver_qv(n);
    std::vector<char> driver_ok(n);
    auto residuals = [&](const AlphaSpec& a, std::size_t index, double& rs, double& rd, double* qv, char* ok) {
        const RngSpec rng{cfg.seed, Purpose::brownian, index};
        const SamplePath bm = simulate_bm(grid, rng, cfg.x0);
        const IsbmPath x = construct_isbm(bm, a, rng.with_purpose(Purpose::signs));
        const LocalTimeCurve lt = local_time_upcrossing(bm, cfg.eps);
        rs = skew_identity_residual(x.signs, bm.abs(), a, lt);
        const SdeResidual res = sde_residual(x.x, bm, a, lt, cfg.x0);
        rd = res.sup_residual;
        if (qv) *qv = res.driver_qv;
        if (ok) *ok = res.driver_qv_ok;
    };
    parallel_for(2 * n, cfg.threads, [&](std::size_t j) {
        if (j < n) {
            residuals(alpha, j, skew[j], sde[j], &driver_qv[j], &driver_ok[j]);
        } else {
            residuals(tanaka, j, base_skew[j - n], base_sde[j - n], nullptr, nullptr);
        }
    });

    const double env_skew = quantile(base_skew, 0.95);
    const double env_sde = quantile(base_sde, 0.95);
    auto frac_below = [&](const std::vector<double>& v, double bound) {
        return static_cast<double>(std::count_if(v.begin(), v.end(), [&](double x) { return x < bound; })) /
               static_cast<double>(v.size());
    };
    auto frac_se = [&](double p) { return std::sqrt(p * (1.0 - p) / static_cast<double>(n)); };
    const double fs = frac_below(skew, env_skew);
    const double fd = frac_below(sde, env_sde);
    const double fs_target = frac_below(skew, 0.05);
    const double fd_target = frac_below(sde, 0.05);
    const double qv_ok = static_cast<double>(std::count(driver_ok.begin(), driver_ok.end(), 1)) / static_cast<double>(n);

    ExperimentReport r;
    r.experiment = "identities";
    r.params = base_params(cfg, alpha);
    r.params["horizon"] = grid.horizon();
    r.params["baseline_alpha"] = "constant 1";
    r.params["baseline_path_offset"] = n;
    r.stats["skew_residual"] = summary_json(summarize(skew));
    r.stats["sde_residual"] = summary_json(summarize(sde));
    r.stats["baseline_skew_residual"] = summary_json(summarize(base_skew));
    r.stats["baseline_sde_residual"] = summary_json(summarize(base_sde));
    r.stats["skew_fraction_within_envelope"] = statistic(fs, frac_se(fs));
    r.stats["sde_fraction_within_envelope"] = statistic(fd, frac_se(fd));
    r.stats["skew_fraction_below_0.05"] = statistic(fs_target, frac_se(fs_target));
    r.stats["sde_fraction_below_0.05"] = statistic(fd_target, frac_se(fd_target));
    r.stats["driver_qv"] = summary_json(summarize(driver_qv));
    r.stats["driver_qv_within_5pct_fraction"] = statistic(qv_ok, frac_se(qv_ok));
    r.thresholds["skew_envelope"] = threshold(env_skew, 0.0);
    r.thresholds["sde_envelope"] = threshold(env_sde, 0.0);
    r.thresholds["fraction_within_envelope"] = threshold(0.95, 0.0);
    r.pass = fs >= 0.95 && fd >= 0.95;
    return r;
}

ExperimentReport kernel_reduction_check(const QuadratureSettings& quad) {
    const double as[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    const double xs[] = {-1.0, 0.0, 1.0};
    const double ys[] = {-2.0, -1.0, 0.0, 1.0, 2.0};
    const double taus[] = {0.25, 1.0, 4.0};
    double worst = 0.0;
    std::size_t count = 0;
    json worst_case;
    for (double a : as) {
        for (double tau : taus) {
            const AlphaStep alpha = AlphaStep::constant(a, tau);
            for (double x : xs) {
                for (double y : ys) {
                    const double p = transition_density(KernelQuery{0.0, tau, x, y, quad}, alpha);
                    const double ref = constant_alpha_density(tau, x, y, a);
                    const double err = std::fabs(p - ref) / std::max(1.0, std::fabs(ref));
                    ++count;
                    if (err >= worst) {
                        worst = err;
                        worst_case = {{"a", a}, {"tau", tau}, {"x", x}, {"y", y}, {"p", p}, {"reference", ref}};
                    }
                }
            }
        }
    }
    ExperimentReport r;
    r.experiment = "kernel_reduction";
    r.params = {{"quad_tol", quad.quad_tol}, {"max_subdiv", quad.max_subdiv}, {"queries", count}};
    r.stats["max_relative_error"] = statistic(worst, 0.0);
    r.stats["worst_case"] = worst_case;
    r.thresholds["max_relative_error"] = threshold(0.0, 1e-6);
    r.pass = worst <= 1e-6;
    return r;
}

namespace {

AlphaStep random_step(const CounterRng& rng, std::uint64_t& ctr, std::size_t pieces, double horizon) {
    std::vector<double> cuts;
    for (std::size_t i = 1; i < pieces; ++i) cuts.push_back(rng.uniform(ctr++) * horizon);
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> starts{0.0};
    for (double c : cuts) {
        if (c > starts.back() + 1e-6 && c < horizon - 1e-6) starts.push_back(c);
    }
    std::vector<double> values;
    for (std::size_t i = 0; i < starts.size(); ++i) values.push_back(rng.uniform(ctr++));
    return AlphaStep(std::move(starts), std::move(values), horizon);
}

}  // namespace

ExperimentReport kernel_normalization_check(std::uint64_t seed, const QuadratureSettings& quad) {
    const CounterRng rng(RngSpec{seed, Purpose::calibration, 1});
    std::uint64_t ctr = 0;
    double worst_const = 0.0, worst_step = 0.0;
    json cases = json::array();
    for (int c = 0; c < 20; ++c) {
        const bool constant = c < 10;
        const double s = 0.5 * rng.uniform(ctr++);
        const double t = s + 0.25 + 0.75 * rng.uniform(ctr++);
        const double x = 2.0 * rng.uniform(ctr++) - 1.0;
        const AlphaStep alpha = constant ? AlphaStep::constant(rng.uniform(ctr++), t) : random_step(rng, ctr, 16, t);
        const double err = std::fabs(density_normalization(s, t, x, alpha, quad) - 1.0);
        (constant ? worst_const : worst_step) = std::max(constant ? worst_const : worst_step, err);
        cases.push_back({{"s", s}, {"t", t}, {"x", x}, {"alpha", to_inline(alpha)}, {"abs_error", err}});
    }
    ExperimentReport r;
    r.experiment = "kernel_normalization";
    r.params = {{"seed", seed}, {"quad_tol", quad.quad_tol}, {"max_subdiv", quad.max_subdiv}, {"configurations", 20}};
    r.stats["cases"] = cases;
    r.stats["max_error_constant"] = statistic(worst_const, 0.0);
    r.stats["max_error_step"] = statistic(worst_step, 0.0);
    r.thresholds["constant"] = threshold(0.0, 1e-6);
    r.thresholds["step"] = threshold(0.0, 1e-5);
    r.pass = worst_const < 1e-6 && worst_step < 1e-5;
    return r;
}

ExperimentReport chapman_kolmogorov_check(std::uint64_t seed, const QuadratureSettings& quad) {
    const CounterRng rng(RngSpec{seed, Purpose::calibration, 2});
    std::uint64_t ctr = 0;
    double worst = 0.0;
    json cases = json::array();
    for (int c = 0; c < 10; ++c) {
        const double s = 0.3 * rng.uniform(ctr++);
        const double r_mid = s + 0.2 + 0.4 * rng.uniform(ctr++);
        const double t = r_mid + 0.2 + 0.4 * rng.uniform(ctr++);
        const double x = 2.0 * rng.uniform(ctr++) - 1.0;
        const double y = 3.0 * rng.uniform(ctr++) - 1.5;
        std::vector<double> starts{0.0};
        if (s > 1e-3) starts.push_back(0.5 * s);
        starts.push_back(r_mid);
        starts.push_back(0.5 * (r_mid + t));
        std::vector<double> values;
        for (std::size_t i = 0; i < starts.size(); ++i) values.push_back(rng.uniform(ctr++));
        const AlphaStep alpha(std::move(starts), std::move(values), t);
        const double res = chapman_kolmogorov_residual(s, r_mid, t, x, y, alpha, quad);
        worst = std::max(worst, res);
        cases.push_back(
            {{"s", s}, {"r", r_mid}, {"t", t}, {"x", x}, {"y", y}, {"alpha", to_inline(alpha)}, {"residual", res}});
    }
    ExperimentReport r;
    r.experiment = "chapman_kolmogorov";
    r.params = {{"seed", seed}, {"quad_tol", quad.quad_tol}, {"max_subdiv", quad.max_subdiv}, {"configurations", 10}};
    r.stats["cases"] = cases;
    r.stats["max_residual"] = statistic(worst, 0.0);
    r.thresholds["residual"] = threshold(0.0, 1e-4);
    r.pass = worst < 1e-4;
    return r;
}

}  // namespace isbm
