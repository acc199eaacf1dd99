#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "cli.hpp"
#include "ekramers/json.hpp"

using ekramers::Json;

namespace {

struct CliRun {
    int code = 0;
    std::string out;
    std::string err;
    Json json() const { return Json::parse(out); }
};

CliRun run(std::vector<std::string> args) {
    args.insert(args.begin(), "ekramers-cli");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    CliRun r;
    r.code = ekramers::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("ekramers_test_" + std::to_string(::getpid()) + "_" + name);
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
    std::ifstream is(p);
    std::vector<std::string> lines;
    for (std::string line; std::getline(is, line);) lines.push_back(line);
    return lines;
}

}  // namespace

TEST(Cli, RateOnQuarticWell) {
    const CliRun r = run({"rate", "--model", "dw1d", "--epsilon", "0.1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const Json j = r.json();
    EXPECT_NEAR(j["result"]["mean_time"].get<double>(), 4.442882938158366 * std::exp(2.5), 1e-6);
    EXPECT_NEAR(j["result"]["delta_v"].get<double>(), 0.25, 1e-14);
    EXPECT_EQ(j["config"]["command"], "rate");
    EXPECT_EQ(j["config"]["model"], "dw1d");
    EXPECT_EQ(j["config"]["epsilon"].get<double>(), 0.1);
}

TEST(Cli, RateFieldsAreConsistent) {
    const Json j = run({"rate", "--model", "dw2d-shear(kappa=0.5)", "--epsilon", "0.1"}).json()["result"];
    const double pre = j["prefactor"], lam = j["lambda_plus"], ratio = j["hessian_ratio"], fc = j["f_correction"];
    EXPECT_NEAR(pre, 2.0 * M_PI / lam * ratio * fc, 1e-12 * pre);
    EXPECT_NEAR(j["mean_time"].get<double>(), pre * std::exp(j["delta_v"].get<double>() / 0.1), 1e-9);
    EXPECT_DOUBLE_EQ(j["rate"].get<double>(), 1.0 / j["mean_time"].get<double>());
}

TEST(Cli, UnknownModelIsAUsageError) {
    const CliRun r = run({"rate", "--model", "nosuch", "--epsilon", "0.1"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("NotFound"), std::string::npos);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
}

TEST(Cli, ParseErrorsAreUsageErrors) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"rate", "--model", "dw1d", "--epsilon", "-1"}).code, 1);
    EXPECT_EQ(run({"rate", "--model", "dw1d", "--bogus", "3"}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
}

TEST(Cli, NonSmoothIsExitTwo) {
    const CliRun r = run({"rate", "--model", "dw2d-shear(kappa=0.5)", "--epsilon", "0.1", "--tol", "1e-3"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("NonSmoothQuasipotential"), std::string::npos);
}

TEST(Cli, ValidateShearExitsZero) {
    const CliRun r = run({"validate", "--model", "dw2d-shear(kappa=0.5)"});
    EXPECT_EQ(r.code, 0);
    const Json j = r.json()["result"];
    EXPECT_EQ(j["model"], "dw2d-shear(kappa=0.5)");
    EXPECT_GT(j["checks"].size(), 15u);
    for (const auto& c : j["checks"]) {
        if (c["name"] == "model.orthogonality") {
            EXPECT_TRUE(c["passed"].get<bool>());
        }
        if (c["name"] == "landscape.hj_residual") {
            EXPECT_TRUE(c["passed"].get<bool>());
        }
    }
}

TEST(Cli, ModelsListAndShow) {
    const CliRun list = run({"models"});
    ASSERT_EQ(list.code, 0);
    bool saw_shear = false;
    const Json models = list.json();
    for (const auto& m : models["result"]) saw_shear |= m["name"] == "dw2d-shear";
    EXPECT_TRUE(saw_shear);
    const Json show = run({"models", "show", "--model", "dw2d-rot(c=2)"}).json()["result"];
    EXPECT_EQ(show["parameters"]["c"].get<double>(), 2.0);
    EXPECT_EQ(show["dim"], 2);
}

TEST(Cli, OutputRoundTripsByteForByte) {
    for (const std::vector<std::string>& args :
         {std::vector<std::string>{"rate", "--model", "dw2d-shear(kappa=0.5)", "--epsilon", "0.1"},
          std::vector<std::string>{"instanton", "--model", "dw2d-rot(c=1)"},
          std::vector<std::string>{"landscape", "eval", "--model", "dw2d", "--epsilon", "0.1", "--point", "[-0.5,0.25]"},
          std::vector<std::string>{"models", "show", "--model", "saddle2d"}}) {
        const CliRun r = run(args);
        ASSERT_EQ(r.code, 0) << r.err;
        EXPECT_EQ(ekramers::to_canonical_json(Json::parse(r.out)) + "\n", r.out) << args[0];
    }
}

TEST(Cli, ConfigEchoReproducesTheRun) {
    const CliRun first = run({"mc-exit", "--model", "dw1d", "--epsilon", "0.3", "--n", "40", "--seed", "5"});
    ASSERT_EQ(first.code, 0) << first.err;
    const Json cfg = first.json()["config"];
    std::vector<std::string> args = {cfg["command"].get<std::string>()};
    for (const auto& [k, v] : cfg.items()) {
        if (k == "command") continue;
        args.push_back("--" + k);
        args.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    }
    EXPECT_EQ(run(args).out, first.out);
}

TEST(Cli, WorkerCountDoesNotChangeTheOutputExceptItsEcho) {
    const CliRun a = run({"mc-exit", "--model", "dw1d", "--epsilon", "0.3", "--n", "60", "--seed", "9", "--workers", "1"});
    const CliRun b = run({"mc-exit", "--model", "dw1d", "--epsilon", "0.3", "--n", "60", "--seed", "9", "--workers", "3"});
    ASSERT_EQ(a.code, 0);
    ASSERT_EQ(b.code, 0);
    EXPECT_EQ(a.json()["result"].dump(), b.json()["result"].dump());
}

TEST(Cli, McExitReportsPrediction) {
    const Json j = run({"mc-exit", "--model", "dw1d", "--epsilon", "0.3", "--n", "30"}).json()["result"];
    EXPECT_NEAR(j["predicted_mean_time"].get<double>(), 4.442882938158366 * std::exp(0.25 / 0.3), 1e-6);
    EXPECT_EQ(j["n"].get<int>() + j["censored"].get<int>(), 30);
}

TEST(Cli, DumpTimesWritesEveryPassage) {
    const auto path = temp_file("times.csv");
    const CliRun r = run({"mc-exit", "--model", "dw1d", "--epsilon", "0.3", "--n", "25", "--dump-times", path.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto lines = read_lines(path);
    EXPECT_EQ(static_cast<int>(lines.size()), r.json()["result"]["n"].get<int>());
    for (const auto& l : lines) EXPECT_GT(std::stod(l), 0.0);
    std::filesystem::remove(path);
}

TEST(Cli, EmitInstantonWritesCsv) {
    const auto path = temp_file("inst.csv");
    const CliRun r = run({"rate", "--model", "dw2d-rot(c=1)", "--epsilon", "0.1", "--emit-instanton", path.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto lines = read_lines(path);
    ASSERT_GT(lines.size(), 10u);
    EXPECT_EQ(lines.front(), "t,x1,x2");
    EXPECT_EQ(lines[1], "0,-1,0");
    EXPECT_EQ(r.json()["config"]["emit-instanton"], path.string());
    std::filesystem::remove(path);
}

TEST(Cli, McCommittor) {
    const CliRun r = run({"mc-committor", "--model", "dw2d", "--epsilon", "0.01", "--n", "400", "--zeta", "-0.05", "--zcap",
                       "0.4"});
    ASSERT_EQ(r.code, 0) << r.err;
    const Json j = r.json()["result"];
    EXPECT_NEAR(j["zeta"].get<double>(), -0.05, 1e-15);
    EXPECT_NEAR(j["analytic"].get<double>(), 0.30853753872598688, 1e-12);
    EXPECT_LE(j["ci_low"].get<double>(), j["fraction"].get<double>());
}

TEST(Cli, LandscapePoint) {
    const Json j =
        run({"landscape", "eval", "--model", "dw2d", "--epsilon", "0.1", "--point", "[-1,0]"}).json()["result"];
    EXPECT_TRUE(j["reachable"].get<bool>());
    EXPECT_NEAR(j["ensemble_density"].get<double>(), 2.2507907903927652, 1e-12);
    const Json far =
        run({"landscape", "eval", "--model", "dw2d", "--epsilon", "0.1", "--point", "[0.5,0]"}).json()["result"];
    EXPECT_FALSE(far["reachable"].get<bool>());
    EXPECT_TRUE(far["C_st"].is_null());
}

TEST(Cli, LandscapePointValidation) {
    EXPECT_EQ(run({"landscape", "eval", "--model", "dw2d", "--point", "[1]"}).code, 1);
    EXPECT_EQ(run({"landscape", "eval", "--model", "dw2d", "--point", "nope"}).code, 1);
    EXPECT_EQ(run({"landscape", "eval", "--model", "dw2d"}).code, 1);
}

TEST(Cli, LandscapeGridCsv) {
    const CliRun r = run({"landscape", "eval", "--model", "dw2d-shear(kappa=0.5)", "--epsilon", "0.1", "--grid",
                       "x1:-1.5:0.5:5,x2:-0.5:0.5:3"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream is(r.out);
    std::vector<std::string> lines;
    for (std::string l; std::getline(is, l);) lines.push_back(l);
    ASSERT_EQ(lines.size(), 2u + 15u);
    EXPECT_EQ(lines[0].rfind("# config {", 0), 0u);
    EXPECT_EQ(lines[1], "x1,x2,V,F,Cst");
    for (std::size_t k = 2; k < lines.size(); ++k) {
        const std::string& row = lines[k];
        EXPECT_EQ(std::count(row.begin(), row.end(), ','), 4);
        const double x1 = std::stod(row.substr(0, row.find(',')));
        const bool nan = row.ends_with(",nan");
        // The x1 = 0.5 column lies in the other basin; x1 = 0 straddles the separatrix.
        if (x1 > 0.25) {
            EXPECT_TRUE(nan) << row;
        }
        if (x1 < -0.25) {
            EXPECT_FALSE(nan) << row;
        }
        if (row.starts_with("0,0,")) {
            EXPECT_TRUE(nan) << row;
        }
    }
}

TEST(Cli, BadGridSpec) {
    EXPECT_EQ(run({"landscape", "eval", "--model", "dw2d", "--grid", "x1:0:1"}).code, 1);
    EXPECT_EQ(run({"landscape", "eval", "--model", "dw2d", "--grid", "x1:0:1:3"}).code, 1);
}

TEST(Cli, InstantonSubcommand) {
    const CliRun r = run({"instanton", "--model", "dw2d-shear(kappa=0.5)"});
    ASSERT_EQ(r.code, 0) << r.err;
    const Json j = r.json()["result"];
    EXPECT_NEAR(j["action"].get<double>(), 0.25, 1e-3);
    EXPECT_NEAR(j["f_integral"].get<double>(), 0.2565100, 1e-6);
    EXPECT_NEAR(j["action_minimized"].get<double>(), 0.25, 5e-3);
    EXPECT_FALSE(j["disagreement"].get<bool>());
}

TEST(CliBinary, SubprocessExitCodes) {
    auto status = [](const std::string& args) {
        const std::string cmd = std::string(EKRAMERS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
        const int s = std::system(cmd.c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    EXPECT_EQ(status("rate --model dw1d --epsilon 0.1"), 0);
    EXPECT_EQ(status("rate --model nosuch --epsilon 0.1"), 1);
    EXPECT_EQ(status("rate --model 'dw2d-shear(kappa=0.5)' --epsilon 0.1 --tol 1e-3"), 2);
    EXPECT_EQ(status("validate --model 'dw2d-shear(kappa=0.5)'"), 0);
}

TEST(CliBinary, SubprocessMatchesInProcess) {
    const std::string cmd = std::string(EKRAMERS_CLI_PATH) + " rate --model dw1d --epsilon 0.1";
    std::FILE* pipe = ::popen(cmd.c_str(), "r");
    ASSERT_NE(pipe, nullptr);
    std::string out;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe)) out += buf.data();
    ::pclose(pipe);
    EXPECT_EQ(out, run({"rate", "--model", "dw1d", "--epsilon", "0.1"}).out);
}
