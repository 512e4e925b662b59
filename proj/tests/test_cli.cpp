#include "cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "rgf-bench");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = rgf::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "rgf_cli_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(Cli, LinearRunWritesCsvAndSummary) {
    const auto csv = scratch("linear.csv");
    const auto summary = scratch("linear.json");
    const Result r = run({"linear", "--filters", "gf-thin,gf-fat,rgf", "--steps", "10", "--seeds", "3", "--samples", "200",
                          "--out", csv.string(), "--summary", summary.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto stdout_json = nlohmann::json::parse(r.out);
    EXPECT_EQ(stdout_json["config"]["steps"], 10);
    EXPECT_FALSE(stdout_json.contains("runs"));
    const auto file_json = nlohmann::json::parse(slurp(summary));
    EXPECT_EQ(file_json["runs"].size(), 3u);
    EXPECT_EQ(file_json["summary"], stdout_json["summary"]);
    EXPECT_NE(slurp(csv).find("seed,t,x_true_0"), std::string::npos);
}

TEST(Cli, UnknownFlagExitsTwoWithUsage) {
    const Result r = run({"sweep", "--omega", "0.001,0.1,0.5", "--gamma", "1,10,100", "--pairs", "matched,under,over",
                          "--bogus"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
}

TEST(Cli, ConfigurationErrorsExitTwo) {
    EXPECT_EQ(run({"linear", "--omega", "1.5", "--seeds", "1"}).code, 2);
    EXPECT_EQ(run({"linear", "--filters", "gf-thin,ekf", "--seeds", "1"}).code, 2);
    EXPECT_EQ(run({"sweep", "--omega", "0.1,0.2", "--gamma", "1"}).code, 2);
    EXPECT_EQ(run({"linear", "--backend", "particle"}).code, 2);
    EXPECT_EQ(run({}).code, 2);
}

TEST(Cli, BadRadarConfigExitsTwo) {
    const auto cfg = scratch("bad_radar.json");
    std::ofstream(cfg) << R"({"alpha": 0.2, "unknown_key": 1})";
    EXPECT_EQ(run({"radar", "--config", cfg.string(), "--seeds", "1"}).code, 2);
}

TEST(Cli, RadarConfigRunReportsThreeFilters) {
    const auto cfg = scratch("short_radar.json");
    std::ofstream(cfg) << R"({"duration_s": 4.0})";
    const Result r = run({"radar", "--config", cfg.string(), "--seeds", "2", "--samples", "200"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    for (const char* f : {"gf-thin", "gf-fat", "rgf"}) {
        EXPECT_TRUE(j["summary"][f].contains("median_mean_position_error")) << f;
    }
    EXPECT_EQ(j["config"]["radar"]["steps"], 80);
}

TEST(Cli, SweepPairsAreZipped) {
    const Result r = run({"sweep", "--omega", "0.1,0.5", "--gamma", "10,100", "--pairs", "matched,over", "--seeds", "2",
                          "--steps", "5", "--samples", "200"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["config"]["sweep"][1]["gamma"], 100.0);
    EXPECT_EQ(j["reference"], "rgf-matched");
    EXPECT_TRUE(j["summary"].contains("rgf-over"));
}

TEST(Cli, RepeatedInvocationIsByteIdentical) {
    const auto a = scratch("repeat_a.csv");
    const auto b = scratch("repeat_b.csv");
    ASSERT_EQ(run({"linear", "--seeds", "3", "--steps", "8", "--samples", "100", "--out", a.string()}).code, 0);
    ASSERT_EQ(run({"linear", "--seeds", "3", "--steps", "8", "--samples", "100", "--threads", "2", "--out", b.string()}).code, 0);
    EXPECT_EQ(slurp(a), slurp(b));
}

TEST(Cli, SelftestPassesAndNamesItsChecks) {
    const Result r = run({"selftest"});
    EXPECT_EQ(r.code, 0) << r.out;
    for (const char* name : {"feature-normalization", "kf-equivalence", "redescending-mean", "omega-zero-reduction"}) {
        EXPECT_NE(r.out.find(name), std::string::npos) << name;
    }
    EXPECT_NE(r.out.find("tolerance"), std::string::npos);
}

TEST(Cli, SelftestFailsWithABrokenJitterPolicy) {
    std::ostringstream out;
    rgf::SelftestOptions broken;
    broken.jitter = rgf::JitterPolicy{{}};
    EXPECT_EQ(rgf::run_selftest(out, broken), 1);
    EXPECT_NE(out.str().find("[FAIL] omega-zero-reduction"), std::string::npos);
}
