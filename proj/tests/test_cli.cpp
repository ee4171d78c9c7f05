#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "isbm/cli.hpp"

using namespace isbm::cli;
namespace fs = std::filesystem;

namespace {

RunConfig parse(std::vector<std::string> args) {
    args.insert(args.begin(), "isbm");
    std::ostringstream help;
    return parse_args(args, help);
}

std::string usage_error(std::vector<std::string> args) {
    try {
        parse(std::move(args));
    } catch (const UsageError& e) {
        return e.what();
    }
    return {};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("isbm_cli_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run_args(std::vector<std::string> args, std::string* out_text = nullptr) {
    std::ostringstream out, err;
    const RunConfig cfg = parse(std::move(args));
    const int code = run(cfg, out, err);
    if (out_text) *out_text = out.str();
    return code;
}

}  // namespace

TEST_CASE("argument parsing") {
    const RunConfig d = parse({"density", "--alpha", "0:0.5", "--s", "0", "--t", "1", "--x", "0", "--y-grid", "-3:3:0.01"});
    CHECK(d.subcommand == "density");
    CHECK(d.alpha == "0:0.5");
    CHECK(d.y_grid == "-3:3:0.01");
    CHECK(d.s.value() == 0.0);
    CHECK_FALSE(d.paths.has_value());

    CHECK(usage_error({"density", "--alpha", "0:1.5"}).find("\"0:1.5\"") != std::string::npos);
    CHECK(usage_error({"density", "--alpha", "0.2:0.5"}).find("\"0.2:0.5\"") != std::string::npos);
    CHECK(usage_error({"density", "--y-grid", "1:0:0.1"}).find("1:0:0.1") != std::string::npos);
    CHECK(usage_error({"verify", "--suite", "nosuch"}).find("nosuch") != std::string::npos);
    CHECK(usage_error({"verify", "--paths", "many"}).find("many") != std::string::npos);
    CHECK_FALSE(usage_error({"explode"}).empty());
    CHECK_FALSE(usage_error({}).empty());
    CHECK(parse({"--help"}).subcommand.empty());
}

TEST_CASE("config file values are overridden by flags") {
    TempDir tmp;
    const fs::path ini = tmp.path / "run.ini";
    std::ofstream(ini) << "paths=5\nseed=42\n";
    const RunConfig c = parse({"simulate", "--config", ini.string(), "--paths", "7"});
    CHECK(c.paths.value() == 7);
    CHECK(c.seed == 42);
}

TEST_CASE("simulate output is deterministic across thread counts") {
    TempDir tmp;
    const auto a = tmp.path / "a.csv", b = tmp.path / "b.csv", ra = tmp.path / "a.json", rb = tmp.path / "b.json";
    const std::vector<std::string> base{"simulate", "--alpha", "0:0.9,0.5:0.1", "--paths", "10", "--dt", "1e-3", "--seed", "1"};
    auto with = [&](std::vector<std::string> extra) {
        auto v = base;
        v.insert(v.end(), extra.begin(), extra.end());
        return v;
    };
    CHECK(run_args(with({"--out", a.string(), "--report", ra.string(), "--threads", "1"})) == 0);
    CHECK(run_args(with({"--out", b.string(), "--report", rb.string(), "--threads", "4"})) == 0);
    const std::string csv = slurp(a);
    CHECK(csv == slurp(b));
    CHECK(slurp(ra) == slurp(rb));
    CHECK(csv.rfind("path,t,value\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 10 * 1001);
    const auto report = nlohmann::json::parse(slurp(ra));
    CHECK(report.at("config").at("seed").get<int>() == 1);
    CHECK_FALSE(report.at("config").contains("threads"));
}

TEST_CASE("density writes y,p rows") {
    std::string out;
    CHECK(run_args({"density", "--alpha", "0:0.5", "--t", "1", "--y-grid", "-1:1:0.5"}, &out) == 0);
    CHECK(out.rfind("y,p\n", 0) == 0);
    CHECK(std::count(out.begin(), out.end(), '\n') == 6);
    CHECK(out.find("0,0.398942280") != std::string::npos);
}

TEST_CASE("verify and stability exit codes") {
    std::string out;
    CHECK(run_args({"verify", "--suite", "uniqueness", "--paths", "2", "--dt", "1e-3"}, &out) == 0);
    CHECK(out.find("uniqueness: PASS") != std::string::npos);
    CHECK(run_args({"stability", "--paths", "100", "--dt", "1e-3"}, &out) == 0);
    CHECK(out.rfind("index,pieces,D,se", 0) == 0);
    TempDir tmp;
    const auto seq = tmp.path / "diverging.csv";
    std::ofstream(seq) << "n,t,alpha\n1,0,0.5\n2,0,0.9\n";
    CHECK(run_args({"stability", "--alpha-seq", seq.string(), "--alpha", "0:0.5", "--paths", "100", "--dt", "1e-3"}) == 1);
}

TEST_CASE("io and usage failures") {
    CHECK(run_args({"simulate", "--dt", "1e-2", "--out", "/nonexistent-dir/x.csv"}) == 1);
    CHECK(run_args({"simulate", "--alpha-file", "/nonexistent-dir/alpha.csv"}) == 1);
    CHECK(run_args({"stability", "--alpha", "0:0.5"}) == 2);
    CHECK(run_args({"density", "--s", "1", "--t", "1"}) == 2);
    TempDir tmp;
    const auto bad = tmp.path / "alpha.csv";
    std::ofstream(bad) << "t,alpha\n0,7\n";
    CHECK(run_args({"simulate", "--alpha-file", bad.string(), "--dt", "1e-2"}) == 2);
}

TEST_CASE("stability from a sequence file") {
    TempDir tmp;
    const auto seq = tmp.path / "seq.csv";
    std::ofstream(seq) << "n,t,alpha\n1,0,1\n2,0,0.75\n4,0,0.55\n";
    std::string out;
    CHECK(run_args({"stability", "--alpha-seq", seq.string(), "--alpha", "0:0.5", "--seed", "3", "--paths", "200",
                    "--dt", "1e-3"},
                   &out) == 0);
    CHECK(std::count(out.begin(), out.end(), '\n') == 4);
}
