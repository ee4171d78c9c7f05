#include "isbm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "isbm/alpha.hpp"
#include "isbm/kernel.hpp"
#include "isbm/parallel.hpp"
#include "isbm/path.hpp"

namespace isbm::cli {

using nlohmann::json;

namespace {

class IoError : public Error {
public:
    using Error::Error;
};

struct YGrid {
    double min, max, step;
};

YGrid parse_y_grid(const std::string& text) {
    const auto a = text.find(':');
    const auto b = a == std::string::npos ? a : text.find(':', a + 1);
    if (b == std::string::npos) throw UsageError("--y-grid: expected min:max:step, got \"" + text + "\"");
    YGrid g{};
    try {
        std::size_t used = 0;
        const std::string parts[] = {text.substr(0, a), text.substr(a + 1, b - a - 1), text.substr(b + 1)};
        double* dst[] = {&g.min, &g.max, &g.step};
        for (int i = 0; i < 3; ++i) {
            *dst[i] = std::stod(parts[i], &used);
            if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
        }
    } catch (const std::logic_error&) {
        throw UsageError("--y-grid: malformed number in \"" + text + "\"");
    }
    if (!(g.step > 0.0) || !(g.max >= g.min) || !std::isfinite(g.min) || !std::isfinite(g.max)) {
        throw UsageError("--y-grid: need min <= max and step > 0 in \"" + text + "\"");
    }
    return g;
}

std::vector<double> y_nodes(const YGrid& g) {
    const auto n = static_cast<std::size_t>(std::floor((g.max - g.min) / g.step + 1e-9));
    std::vector<double> ys;
    ys.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) ys.push_back(g.min + static_cast<double>(i) * g.step);
    return ys;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path + " for reading");
    return in;
}

std::optional<AlphaStep> resolve_alpha(const RunConfig& cfg, double horizon) {
    if (!cfg.alpha.empty()) return parse_alpha_inline(cfg.alpha, horizon);
    if (!cfg.alpha_file.empty()) {
        auto in = open_in(cfg.alpha_file);
        return read_alpha_csv(in, horizon);
    }
    return std::nullopt;
}

AlphaStep require_alpha(const RunConfig& cfg, double horizon) {
    auto a = resolve_alpha(cfg, horizon);
    return a ? *a : AlphaStep::constant(0.5, horizon);
}

MonteCarloConfig budget(const RunConfig& cfg, std::size_t paths, double dt, double eps) {
    MonteCarloConfig mc;
    mc.paths = cfg.paths.value_or(paths);
    mc.dt = cfg.dt.value_or(dt);
    mc.eps = cfg.eps.value_or(eps);
    mc.seed = cfg.seed;
    mc.threads = cfg.threads;
    mc.x0 = cfg.x;
    mc.quad.quad_tol = cfg.quad_tol;
    return mc;
}

std::vector<AlphaStep> default_or(const RunConfig& cfg, std::vector<std::string> defaults) {
    if (auto a = resolve_alpha(cfg, cfg.horizon)) return {*a};
    std::vector<AlphaStep> out;
    for (const auto& d : defaults) out.push_back(parse_alpha_inline(d, cfg.horizon));
    return out;
}

BorelAlpha identity_alpha(double horizon) {
    return BorelAlpha{[horizon](double t) { return std::clamp(t / horizon, 0.0, 1.0); }, horizon, 0, "t/horizon"};
}

ExperimentReport default_stability(const RunConfig& cfg) {
    const BorelAlpha limit = identity_alpha(cfg.horizon);
    std::vector<AlphaSpec> seq;
    for (std::size_t n : {2, 8, 32}) seq.emplace_back(discretize_alpha(limit, n));
    return stability_experiment(seq, limit, budget(cfg, 2000, 1e-4, 0.03), cfg.horizon);
}

void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
    if (path.empty() || path == "-") {
        fallback << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << text;
    if (!f) throw IoError("write failed for " + path);
}

json report_envelope(const RunConfig& cfg) {
    return {{"command", cfg.subcommand}, {"config", cfg.to_json()}};
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    const AlphaStep alpha = require_alpha(cfg, cfg.horizon);
    const TimeGrid grid = make_grid(0.0, cfg.horizon, cfg.dt.value_or(1e-4));
    const std::size_t n = cfg.paths.value_or(1);
    if (n == 0) throw UsageError("--paths: must be positive");
    std::vector<std::vector<double>> xs(n);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        const auto sim = simulate_isbm(grid, alpha, cfg.seed, i, cfg.x);
        xs[i].assign(sim.isbm.x.values().begin(), sim.isbm.x.values().end());
    });
    std::ostringstream csv;
    csv.precision(17);
    csv << (n == 1 ? "t,value\n" : "path,t,value\n");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < grid.size(); ++k) {
            if (n > 1) csv << i << ',';
            csv << grid.time(k) << ',' << xs[i][k] << '\n';
        }
    }
    write_text(cfg.out, csv.str(), out);
    if (!cfg.report.empty()) {
        json r = report_envelope(cfg);
        r["metadata"] = {{"paths", n}, {"steps", grid.steps()}, {"dt", grid.dt()}, {"alpha", to_inline(alpha)}};
        r["pass"] = true;
        write_text(cfg.report, r.dump(2) + "\n", out);
    }
    return 0;
}

int cmd_density(const RunConfig& cfg, std::ostream& out) {
    const double s = cfg.s.value_or(0.0);
    const double horizon = std::max(cfg.horizon, cfg.t);
    const AlphaStep alpha = require_alpha(cfg, horizon);
    const std::vector<double> ys = y_nodes(parse_y_grid(cfg.y_grid));
    const QuadratureSettings quad{cfg.quad_tol, 64};
    KernelQuery base{s, cfg.t, cfg.x, 0.0, quad};
    try {
        base.validate();
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    std::vector<DensityValue> vals(ys.size());
    parallel_for(ys.size(), cfg.threads, [&](std::size_t i) {
        KernelQuery q = base;
        q.y = ys[i];
        vals[i] = transition_density_detailed(q, alpha);
    });
    std::ostringstream csv;
    csv.precision(17);
    csv << "y,p\n";
    double max_err = 0.0;
    std::size_t max_intervals = 0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        csv << ys[i] << ',' << std::max(vals[i].value, 0.0) << '\n';
        max_err = std::max(max_err, vals[i].error);
        max_intervals = std::max(max_intervals, vals[i].intervals);
    }
    write_text(cfg.out, csv.str(), out);
    if (!cfg.report.empty()) {
        json r = report_envelope(cfg);
        r["metadata"] = {{"points", ys.size()},
                         {"quad_tol", quad.quad_tol},
                         {"max_subdiv", quad.max_subdiv},
                         {"max_error_estimate", max_err},
                         {"max_intervals", max_intervals},
                         {"alpha", to_inline(alpha)}};
        r["pass"] = true;
        write_text(cfg.report, r.dump(2) + "\n", out);
    }
    return 0;
}

std::vector<std::string> split_suites(const std::string& text) {
    std::vector<std::string> names;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "all") {
            const auto all = suite_names();
            names.insert(names.end(), all.begin(), all.end());
        } else {
            const auto known = suite_names();
            if (std::find(known.begin(), known.end(), item) == known.end()) {
                throw UsageError("--suite: unknown suite \"" + item + "\"");
            }
            names.push_back(item);
        }
    }
    if (names.empty()) throw UsageError("--suite: empty suite list");
    return names;
}

int finish_reports(const RunConfig& cfg, const std::vector<ExperimentReport>& reports, std::ostream& out) {
    bool pass = true;
    json list = json::array();
    for (const auto& r : reports) {
        out << r.experiment << ": " << (r.pass ? "PASS" : "FAIL") << '\n';
        pass = pass && r.pass;
        list.push_back(r.to_json());
    }
    if (!cfg.report.empty()) {
        json doc = report_envelope(cfg);
        doc["reports"] = list;
        doc["pass"] = pass;
        write_text(cfg.report, doc.dump(2) + "\n", out);
    }
    return pass ? 0 : 1;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
    const auto names = split_suites(cfg.suite);
    std::vector<ExperimentReport> reports;
    for (const auto& name : names) {
        auto rs = run_suite(name, cfg);
        reports.insert(reports.end(), rs.begin(), rs.end());
    }
    return finish_reports(cfg, reports, out);
}

int cmd_stability(const RunConfig& cfg, std::ostream& out) {
    ExperimentReport report;
    if (cfg.alpha_seq.empty()) {
        if (!cfg.alpha.empty() || !cfg.alpha_file.empty()) {
            throw UsageError("stability: --alpha-seq is required when a limit alpha is given");
        }
        report = default_stability(cfg);
    } else {
        const auto limit = resolve_alpha(cfg, cfg.horizon);
        if (!limit) throw UsageError("stability: --alpha or --alpha-file is required with --alpha-seq");
        auto in = open_in(cfg.alpha_seq);
        std::vector<AlphaSpec> seq;
        for (auto& a : read_alpha_sequence_csv(in, cfg.horizon)) seq.emplace_back(std::move(a));
        report = stability_experiment(seq, *limit, budget(cfg, 2000, 1e-4, 0.03), cfg.horizon);
    }
    write_text(cfg.out, stability_csv(report), out);
    if (!cfg.report.empty()) {
        json doc = report_envelope(cfg);
        doc["reports"] = json::array({report.to_json()});
        doc["pass"] = report.pass;
        write_text(cfg.report, doc.dump(2) + "\n", out);
    }
    return report.pass ? 0 : 1;
}

}  // namespace

json RunConfig::to_json() const {
    json j = {{"subcommand", subcommand}, {"alpha", alpha},   {"alpha_file", alpha_file}, {"alpha_seq", alpha_seq},
              {"t", t},                   {"x", x},           {"y_grid", y_grid},         {"horizon", horizon},
              {"seed", seed},             {"suite", suite},   {"quad_tol", quad_tol}};
    j["s"] = s ? json(*s) : json(nullptr);
    j["paths"] = paths ? json(*paths) : json(nullptr);
    j["dt"] = dt ? json(*dt) : json(nullptr);
    j["eps"] = eps ? json(*eps) : json(nullptr);
    return j;
}

RunConfig parse_args(const std::vector<std::string>& argv, std::ostream& help) {
    RunConfig cfg;
    if (const char* env = std::getenv("ISBM_THREADS")) {
        try {
            cfg.threads = static_cast<unsigned>(std::stoul(env));
        } catch (const std::logic_error&) {
            throw UsageError(std::string("ISBM_THREADS: not a number \"") + env + "\"");
        }
    }
    double s_value = 0.0;
    std::size_t paths_value = 0;
    double dt_value = 0.0, eps_value = 0.0;

    CLI::App app{"Inhomogeneous skew Brownian motion toolkit", "isbm"};
    app.set_config("--config", "", "TOML/INI file with option defaults");
    app.require_subcommand(1, 1);
    app.fallthrough();
    app.add_option("--alpha", cfg.alpha, "alpha step function t0:a0,t1:a1,...");
    app.add_option("--alpha-file", cfg.alpha_file, "alpha CSV with header t,alpha");
    app.add_option("--alpha-seq", cfg.alpha_seq, "alpha sequence CSV with header n,t,alpha");
    auto* s_opt = app.add_option("--s", s_value, "start time");
    app.add_option("--t", cfg.t, "end time");
    app.add_option("--x", cfg.x, "start point");
    app.add_option("--y-grid", cfg.y_grid, "density grid min:max:step");
    auto* paths_opt = app.add_option("--paths", paths_value, "number of Monte Carlo paths");
    auto* dt_opt = app.add_option("--dt", dt_value, "time step");
    auto* eps_opt = app.add_option("--eps", eps_value, "local time level width");
    app.add_option("--horizon", cfg.horizon, "time horizon");
    app.add_option("--seed", cfg.seed, "master seed");
    app.add_option("--threads", cfg.threads, "worker threads (default $ISBM_THREADS or 1)");
    app.add_option("--out", cfg.out, "data output path (default stdout)");
    app.add_option("--report", cfg.report, "JSON report path");
    app.add_option("--suite", cfg.suite, "verification suites, comma separated, or all");
    app.add_option("--quad-tol", cfg.quad_tol, "relative quadrature tolerance");
    app.add_subcommand("simulate", "write sample paths of X as CSV");
    app.add_subcommand("density", "tabulate the transition density p(s, t; x, y)");
    app.add_subcommand("verify", "run verification suites and report PASS/FAIL");
    app.add_subcommand("stability", "distances between X under alpha_n and under alpha");

    std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        help << app.help();
        return RunConfig{};
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }
    cfg.subcommand = app.get_subcommands().front()->get_name();
    if (*s_opt) cfg.s = s_value;
    if (*paths_opt) cfg.paths = paths_value;
    if (*dt_opt) cfg.dt = dt_value;
    if (*eps_opt) cfg.eps = eps_value;

    if (!cfg.alpha.empty() && !cfg.alpha_file.empty()) throw UsageError("--alpha and --alpha-file are exclusive");
    if (!(cfg.horizon > 0.0)) throw UsageError("--horizon: must be positive");
    if (cfg.dt && !(*cfg.dt > 0.0)) throw UsageError("--dt: must be positive");
    if (cfg.eps && !(*cfg.eps > 0.0)) throw UsageError("--eps: must be positive");
    if (!(cfg.quad_tol > 0.0)) throw UsageError("--quad-tol: must be positive");
    if (!cfg.alpha.empty()) {
        try {
            parse_alpha_inline(cfg.alpha, std::max(cfg.horizon, cfg.t));
        } catch (const InvalidArgument& e) {
            throw UsageError(std::string("--alpha: ") + e.what());
        }
    }
    if (cfg.subcommand == "density") parse_y_grid(cfg.y_grid);
    if (cfg.subcommand == "verify") split_suites(cfg.suite);
    return cfg;
}

std::vector<std::string> suite_names() {
    return {"kernel", "reflection", "marginal", "moments", "martingale", "localtime", "identities", "stability",
            "uniqueness"};
}

std::vector<ExperimentReport> run_suite(const std::string& name, const RunConfig& cfg) {
    std::vector<ExperimentReport> out;
    const QuadratureSettings quad{cfg.quad_tol, 64};
    if (name == "kernel") {
        out.push_back(kernel_reduction_check(quad));
        out.push_back(kernel_normalization_check(cfg.seed, quad));
        out.push_back(chapman_kolmogorov_check(cfg.seed, quad));
    } else if (name == "reflection") {
        for (const auto& a : default_or(cfg, {"0:0.5", "0:0.7", "0:0.2,0.25:0.8,0.5:0.4,0.75:1"})) {
            out.push_back(reflection_law_test(a, cfg.t, budget(cfg, 50000, 1e-4, 0.03)));
        }
    } else if (name == "marginal") {
        for (const auto& a : default_or(cfg, {"0:0.7", "0:0.9,0.5:0.1"})) {
            out.push_back(marginal_vs_kernel_test(a, cfg.t, budget(cfg, 50000, 1e-4, 0.03)));
        }
    } else if (name == "moments") {
        const double t = 0.5 * cfg.horizon;
        const std::vector<double> eps{1e-3, 1e-2, 1e-1};
        for (const auto& a : default_or(cfg, {"0:0.5", "0:0.9,0.5:0.1"})) {
            std::optional<double> ref;
            if (a.pieces() == 1 && a.values()[0] == 0.5) ref = 3.0;
            out.push_back(moment_scaling_test(a, t, eps, budget(cfg, 50000, 1e-4, 0.03), ref));
        }
    } else if (name == "martingale") {
        for (const auto& a : default_or(cfg, {"0:0.9,0.5:0.1"})) {
            out.push_back(martingale_identity_test(a, cfg.s.value_or(0.5 * cfg.t), cfg.t,
                                                   budget(cfg, 20000, 1e-5, 0.03)));
        }
    } else if (name == "localtime") {
        out.push_back(local_time_calibration_test(cfg.t, budget(cfg, 2000, 1e-5, 0.02)));
    } else if (name == "identities") {
        for (const auto& a : default_or(cfg, {"0:0.9,0.5:0.1"})) {
            out.push_back(pathwise_identity_test(a, budget(cfg, 200, 1e-5, 0.03), cfg.t));
        }
    } else if (name == "stability") {
        out.push_back(default_stability(cfg));
    } else if (name == "uniqueness") {
        for (const auto& a : default_or(cfg, {"0:0.5", "0:1"})) {
            out.push_back(uniqueness_probe(a, budget(cfg, 16, 1e-4, 0.03), cfg.t));
        }
    } else {
        throw UsageError("--suite: unknown suite \"" + name + "\"");
    }
    return out;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.subcommand == "simulate") return cmd_simulate(cfg, out);
        if (cfg.subcommand == "density") return cmd_density(cfg, out);
        if (cfg.subcommand == "verify") return cmd_verify(cfg, out);
        if (cfg.subcommand == "stability") return cmd_stability(cfg, out);
        throw UsageError("unknown subcommand \"" + cfg.subcommand + "\"");
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const InvalidArgument& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int main(int argc, char** argv) {
    std::ostringstream help;
    RunConfig cfg;
    try {
        cfg = parse_args(std::vector<std::string>(argv, argv + argc), help);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\nrun with --help for usage\n";
        return 2;
    }
    if (cfg.subcommand.empty()) {
        std::cout << help.str();
        return 0;
    }
    return run(cfg, std::cout, std::cerr);
}

}  // namespace isbm::cli
