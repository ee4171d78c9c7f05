#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "isbm/error.hpp"
#include "isbm/verify.hpp"

namespace isbm::cli {

/// Malformed command line; maps to exit code 2.
class UsageError : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    std::string subcommand;
    std::string alpha;       ///< inline `t:a,...`
    std::string alpha_file;  ///< CSV `t,alpha`
    std::string alpha_seq;   ///< CSV `n,t,alpha`
    std::optional<double> s;  ///< density: 0, martingale suite: t/2
    double t = 1.0;
    double x = 0.0;
    std::string y_grid = "-3:3:0.01";
    std::optional<std::size_t> paths;
    std::optional<double> dt;
    std::optional<double> eps;
    double horizon = 1.0;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string out;
    std::string report;
    std::string suite = "all";
    double quad_tol = 1e-8;

    /// Everything except the thread count and output paths.
    nlohmann::json to_json() const;
};

/// argv[0] is the program name. Throws UsageError; `--help` output goes to `help`
/// and yields a config with an empty subcommand.
RunConfig parse_args(const std::vector<std::string>& argv, std::ostream& help);

/// Names accepted by `verify --suite` (comma separated, or `all`).
std::vector<std::string> suite_names();

/// Reports produced by one named suite under `cfg`. Flags left unset fall back to
/// the suite's own budget.
std::vector<ExperimentReport> run_suite(const std::string& name, const RunConfig& cfg);

/// 0 on success, 1 on verification failure or I/O error, 2 on usage error.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// parse_args + run with exit-code mapping.
int main(int argc, char** argv);

}  // namespace isbm::cli
