#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "volpath/cli.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = volpath::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string write_config(const std::string& name, const json& j) {
    const fs::path dir = fs::temp_directory_path() / "volpath_cli_test";
    fs::create_directories(dir);
    const fs::path p = dir / name;
    std::ofstream(p) << j.dump();
    return p.string();
}

json base_config() {
    return json::parse(R"({
      "kernel": {"family": "exponential", "c": 1.0, "beta": 1.0},
      "model": {"family": "one-factor-bergomi", "zeta": [[0, 0.04]], "nu": 1.0},
      "payoff": {"family": "vix-future", "maturity": 0.25, "delta_window": 0.0833333333333333},
      "grid": {"steps_per_year": 200},
      "mc": {"M": 4000, "seed": 7}
    })");
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char ch : s) n += ch == '\n';
    return n;
}

}  // namespace

TEST(Cli, ZeroKernelPriceIsDeterministic) {
    json c = base_config();
    c["kernel"]["c"] = 0.0;
    const auto r = run({"price", "--config", write_config("zero.json", c)});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_NEAR(j["mean"].get<double>(), 0.2, 1e-12);
    EXPECT_EQ(j["std_error"].get<double>(), 0.0);
    EXPECT_EQ(j["M"].get<std::size_t>(), 4000u);
    EXPECT_TRUE(j.contains("runtime_ms"));
}

TEST(Cli, WorkerCountDoesNotChangeOutput) {
    const std::string cfg = write_config("workers.json", base_config());
    const auto a = run({"price", "--config", cfg, "--workers", "1", "--no-timing"});
    const auto b = run({"price", "--config", cfg, "--workers", "3", "--no-timing"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_FALSE(json::parse(a.out).contains("runtime_ms"));
    const auto c = run({"price", "--config", cfg, "--seed", "8", "--no-timing"});
    EXPECT_NE(a.out, c.out);
}

TEST(Cli, ConfigErrorsExitTwo) {
    json c = base_config();
    c["payoff"]["maturity"] = -1.0;
    const auto r = run({"price", "--config", write_config("bad.json", c)});
    EXPECT_EQ(r.code, 2);
    const json e = json::parse(r.err);
    EXPECT_EQ(e["error"], "config");
    EXPECT_TRUE(e.contains("message"));

    c = base_config();
    c["mystery"] = 1;
    EXPECT_EQ(run({"price", "--config", write_config("unknown.json", c)}).code, 2);
    EXPECT_EQ(run({"price", "--config", "/nonexistent/volpath.json"}).code, 2);
    EXPECT_EQ(run({"verify", "nonsense", "--config", write_config("ok.json", base_config())}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
}

TEST(Cli, SurfaceHasOneRowPerQuote) {
    json c = base_config();
    c["payoff"] = {{"family", "vix-call"}, {"maturity", 0.25}, {"strike", 0.2}};
    c["surface"] = {{"strikes", {0.16, 0.18, 0.2, 0.22, 0.24}}, {"maturities", {0.1, 0.2, 0.3}}};
    c["mc"]["M"] = 2000;
    const auto r = run({"surface", "--config", write_config("surface.json", c)});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "strike,maturity,price,std_error,iv");
    EXPECT_EQ(count_lines(r.out), 16u);

    const auto iv = run({"impliedvol", "--config", write_config("surface.json", c)});
    ASSERT_EQ(iv.code, 0) << iv.err;
    EXPECT_EQ(iv.out.substr(0, iv.out.find('\n')), "strike,maturity,future,price,iv,sigma_hat");
    EXPECT_EQ(count_lines(iv.out), 16u);
}

TEST(Cli, TimeInvarianceOnDyadicGrid) {
    json c = base_config();
    c["payoff"] = {{"family", "vix-future"}, {"maturity", 0.5}, {"delta_window", 42.0 / 512}};
    c["grid"]["steps_per_year"] = 512;
    c["t"] = 0.125;
    c["mc"]["M"] = 1000;
    const auto r = run({"verify", "time-invariance", "--config", write_config("ti.json", c)});
    ASSERT_EQ(r.code, 0) << r.err << r.out;
    const json j = json::parse(r.out);
    EXPECT_EQ(j["check"], "time-invariance");
    EXPECT_TRUE(j["pass"].get<bool>());
    EXPECT_TRUE(j.contains("fixtures"));
    EXPECT_TRUE(j.contains("numbers"));
}

TEST(Cli, GreeksReportsPriceAndDerivatives) {
    json c = base_config();
    c["direction"] = {{"kind", "truncated"}, {"delta", 0.05}};
    c["mc"]["M"] = 2000;
    const auto r = run({"greeks", "--config", write_config("greeks.json", c)});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_TRUE(j.contains("price"));
    EXPECT_TRUE(j.contains("first"));
    EXPECT_TRUE(j.contains("second"));
    EXPECT_GT(j["price"]["mean"].get<double>(), 0.0);
}

TEST(Cli, IngestCurve) {
    const fs::path dir = fs::temp_directory_path() / "volpath_cli_test";
    fs::create_directories(dir);
    const fs::path csv = dir / "xi.csv";
    std::ofstream(csv) << "tenor,xi\n0,0.04\n0.5,0.05\n1,0.06\n";
    const auto r = run({"ingest-curve", "--csv", csv.string(), "--nu", "1.0", "--H", "0.1", "--steps", "10"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "time,theta");
    std::getline(in, line);
    const double theta0 = std::stod(line.substr(line.find(',') + 1));
    EXPECT_NEAR(theta0, std::log(0.04), 1e-12);
    EXPECT_EQ(count_lines(r.out), 12u);

    std::ofstream(dir / "bad.csv") << "tenor,xi\n0,-0.04\n1,0.05\n";
    const auto bad = run({"ingest-curve", "--csv", (dir / "bad.csv").string()});
    EXPECT_NE(bad.code, 0);
    EXPECT_FALSE(bad.err.empty());
}

TEST(Cli, BinaryExitCodes) {
    json c = base_config();
    c["kernel"]["c"] = 0.0;
    const std::string ok = write_config("bin_ok.json", c);
    c["mc"]["M"] = 1;
    const std::string bad = write_config("bin_bad.json", c);
    auto status = [](const std::string& cmd) {
        const int s = std::system(cmd.c_str());
        return WEXITSTATUS(s);
    };
    const std::string bin = VOLPATH_CLI_PATH;
    EXPECT_EQ(status(bin + " price --config " + ok + " > /dev/null"), 0);
    EXPECT_EQ(status(bin + " price --config " + bad + " > /dev/null 2>&1"), 2);
    EXPECT_EQ(status(bin + " --help > /dev/null"), 0);
}
