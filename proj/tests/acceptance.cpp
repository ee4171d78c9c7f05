// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "isbm/cli.hpp"
#include "isbm/verify.hpp"

using namespace isbm;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    double budget_seconds;
    std::function<Outcome()> body;
};

unsigned worker_count() {
    if (const char* env = std::getenv("ISBM_THREADS")) return static_cast<unsigned>(std::stoul(env));
    return std::max(1u, std::thread::hardware_concurrency());
}

MonteCarloConfig budget(std::size_t paths, double dt, double eps) {
    MonteCarloConfig c;
    c.paths = paths;
    c.dt = dt;
    c.eps = eps;
    c.seed = 20240601;
    c.threads = worker_count();
    return c;
}

double stat(const ExperimentReport& r, const char* key) { return r.stats.at(key).at("value").get<double>(); }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

const AlphaStep kStep({0.0, 0.5}, {0.9, 0.1}, 1.0);

Outcome reduction() {
    const auto r = kernel_reduction_check();
    return {r.pass, fmt("max relative error %.2e over 225 queries (< 1e-6)", stat(r, "max_relative_error"))};
}

Outcome normalization() {
    const auto r = kernel_normalization_check(7);
    return {r.pass, fmt("max |mass-1| constant %.2e (< 1e-6), 16-piece %.2e (< 1e-5)", stat(r, "max_error_constant"),
                        stat(r, "max_error_step"))};
}

Outcome chapman() {
    const auto r = chapman_kolmogorov_check(7);
    return {r.pass, fmt("max residual %.2e over 10 configurations (< 1e-4)", stat(r, "max_residual"))};
}

Outcome reflection() {
    const std::vector<AlphaStep> alphas{AlphaStep::constant(0.5, 1.0), AlphaStep::constant(0.7, 1.0),
                                        AlphaStep({0.0, 0.25, 0.5, 0.75}, {0.2, 0.8, 0.4, 1.0}, 1.0)};
    Outcome o{true, "KS"};
    for (const auto& a : alphas) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = reflection_law_test(a, 1.0, budget(50000, 1e-4, 0.03));
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const double ks = stat(r, "ks");
        o.pass = o.pass && r.pass && ks < 0.01 && secs < 180.0;
        o.detail += " [" + to_inline(a) + "] " + fmt("%.4f (%.0fs)", ks, secs);
    }
    o.detail += "; each < 0.01 within 3 min";
    return o;
}

Outcome marginal() {
    Outcome o{true, "KS"};
    for (const auto& a : {AlphaStep::constant(0.7, 1.0), kStep}) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = marginal_vs_kernel_test(a, 1.0, budget(50000, 1e-4, 0.03));
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const double ks = stat(r, "ks");
        o.pass = o.pass && ks < 0.012 && secs < 300.0;
        o.detail += " [" + to_inline(a) + "] " + fmt("%.4f (%.0fs)", ks, secs);
    }
    o.detail += "; each < 0.012 within 5 min";
    return o;
}

Outcome local_time() {
    const auto r = local_time_calibration_test(1.0, budget(2000, 1e-5, 0.02));
    const double up = stat(r, "upcrossing_mean");
    const double diff = stat(r, "mean_difference");
    return {r.pass, fmt("upcrossing mean %.4f vs %.4f (rel %+.4f, |rel| <= 0.03); occupation mean diff %.4f (< 0.05)",
                        up, stat(r, "target"), stat(r, "upcrossing_relative_error"), diff)};
}

Outcome identities() {
    const auto r = pathwise_identity_test(kStep, budget(200, 1e-5, 0.03));
    const double env_skew = r.thresholds.at("skew_envelope").at("value").get<double>();
    const double env_sde = r.thresholds.at("sde_envelope").at("value").get<double>();
    Outcome o{r.pass, fmt("within alpha=1 envelope: skew %.3f (q95 %.3f), sde %.3f (q95 %.3f)",
                          stat(r, "skew_fraction_within_envelope"), env_skew, stat(r, "sde_fraction_within_envelope"),
                          env_sde)};
    o.detail += fmt("; need >= 0.95. below 0.05: skew %.3f, sde %.3f", stat(r, "skew_fraction_below_0.05"),
                    stat(r, "sde_fraction_below_0.05"));
    return o;
}

Outcome moments() {
    const std::vector<double> eps{1e-3, 1e-2, 1e-1};
    const auto half = moment_scaling_test(AlphaStep::constant(0.5, 1.0), 0.5, eps, budget(50000, 1e-4, 0.03), 3.0);
    const auto step = moment_scaling_test(kStep, 0.5, eps, budget(50000, 1e-4, 0.03));
    std::string ratios;
    for (const auto& row : half.stats.at("per_eps")) ratios += fmt(" %.3f", row.at("ratio").at("value").get<double>());
    return {half.pass && step.pass,
            fmt("slope alpha=1/2 %.4f, step %.4f (in [1.9, 2.1]); fitted C step %.3f; alpha=1/2 ratios",
                stat(half, "slope"), stat(step, "slope"), stat(step, "fitted_constant")) +
                ratios + " (3 +- 0.15)"};
}

Outcome martingale() {
    const auto r = martingale_identity_test(kStep, 0.5, 1.0, budget(20000, 1e-5, 0.03));
    return {r.pass, fmt("max bin |z| %.2f (<= 3); increment mean %.4f; QV rel error %+.4f (|.| <= 0.05)",
                        stat(r, "max_bin_z"), stat(r, "increment_mean"), stat(r, "quadratic_variation_relative_error"))};
}

Outcome stability() {
    const BorelAlpha limit{[](double t) { return t; }, 1.0, 0, "t"};
    std::vector<AlphaSpec> seq;
    for (std::size_t n : {2, 8, 32}) seq.emplace_back(discretize_alpha(limit, n));
    const auto r = stability_experiment(seq, limit, budget(5000, 1e-4, 0.03));
    const auto same = stability_experiment({limit, limit, limit}, limit, budget(500, 1e-4, 0.03));
    const auto& rows = r.stats.at("per_n");
    auto d = [&](std::size_t i) { return rows[i].at("D").at("value").get<double>(); };
    const bool strict = r.stats.at("strictly_decreasing_beyond_se").get<bool>();
    const bool quarter = d(2) < d(0) / 4.0;
    const bool zero = same.stats.at("all_distances_zero").get<bool>();
    return {strict && quarter && zero && r.pass,
            fmt("D_2 %.4f, D_8 %.4f, D_32 %.4f; strictly decreasing beyond 1 se: ", d(0), d(1), d(2)) +
                (strict ? "yes" : "no") + "; D_32 < D_2/4: " + (quarter ? "yes" : "no") +
                "; alpha_n = alpha gives D = 0: " + (zero ? "yes" : "no")};
}

std::string run_cli(std::vector<std::string> args, unsigned threads, int& code) {
    args.insert(args.begin(), "isbm");
    args.push_back("--threads");
    args.push_back(std::to_string(threads));
    std::ostringstream help, out, err;
    code = cli::run(cli::parse_args(args, help), out, err);
    return out.str();
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "isbm_acceptance_determinism";
    fs::create_directories(dir);
    const std::vector<std::vector<std::string>> commands{
        {"simulate", "--alpha", "0:0.9,0.5:0.1", "--paths", "10", "--dt", "1e-4", "--seed", "1"},
        {"density", "--alpha", "0:0.9,0.5:0.1", "--t", "1", "--x", "0.3", "--y-grid", "-3:3:0.05"},
        {"verify", "--suite", "uniqueness,localtime,identities", "--paths", "200", "--dt", "1e-4", "--seed", "9"},
        {"stability", "--paths", "500", "--dt", "1e-4", "--seed", "3"},
    };
    bool same = true;
    std::size_t bytes = 0;
    for (std::size_t c = 0; c < commands.size(); ++c) {
        std::string outputs[2];
        for (int rep = 0; rep < 2; ++rep) {
            for (unsigned threads : {1u, 4u}) {
                auto args = commands[c];
                const std::string stem = (dir / ("c" + std::to_string(c))).string();
                args.insert(args.end(), {"--out", stem + ".csv", "--report", stem + ".json"});
                int code = 0;
                run_cli(args, threads, code);
                const std::string blob = slurp(stem + ".csv") + slurp(stem + ".json") + std::to_string(code);
                if (outputs[0].empty()) {
                    outputs[0] = blob;
                } else {
                    same = same && blob == outputs[0];
                }
            }
        }
        bytes += outputs[0].size();
    }
    fs::remove_all(dir);
    return {same, fmt("4 subcommands x 2 runs x threads {1,4}: outputs byte-identical over %.0f bytes",
                      static_cast<double>(bytes))};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "Constant-alpha kernel reduction", 10, reduction},
        {2, "Kernel normalization", 30, normalization},
        {3, "Chapman-Kolmogorov", 120, chapman},
        {4, "Reflection law", 540, reflection},
        {5, "Marginal vs kernel", 600, marginal},
        {6, "Local-time estimator calibration", 300, local_time},
        {7, "Pathwise identities", 300, identities},
        {8, "Fourth-moment scaling", 180, moments},
        {9, "Martingale / conditional-mean identity", 300, martingale},
        {10, "Stability under monotone coupling", 600, stability},
        {11, "Determinism", 60, determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.budget_seconds;
        const bool pass = o.pass && in_time;
        failed += !pass;
        std::printf("[%s] %2d %s: %s; runtime %.1fs (< %.0fs)\n", pass ? "PASS" : "FAIL", c.id, c.title.c_str(),
                    o.detail.c_str(), secs, c.budget_seconds);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
