#include "cli.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace hardysim;
using hardysim::io::Json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

bool has(const std::string& text, const std::string& needle) {
    return text.find(needle) != std::string::npos;
}

}  // namespace

TEST(Cli, ContextsTable) {
    const auto r = call({"contexts"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(has(r.out, "context (Wbar,W)"));
    EXPECT_TRUE(has(r.out, "okbar,ok      0.0833333333333333 (1/12)"));
    EXPECT_TRUE(has(r.out, "failbar,fail  0.75 (3/4)"));
}

TEST(Cli, ContextsJsonIsExactDecimals) {
    const auto r = call({"contexts", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = Json::parse(r.out);
    const auto& p = j["contexts"]["(Wbar,W)"]["probabilities"];
    EXPECT_EQ(std::stod(p["okbar,ok"].get<std::string>()), hardy::context_table(hardy::kWbarW)[0]);
    double total = 0;
    for (const auto& [k, v] : p.items()) total += std::stod(v.get<std::string>());
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(call({"contexts", "--bogus"}).code, 2);
    EXPECT_EQ(call({"bohm", "--foliation", "G"}).code, 2);
    EXPECT_EQ(call({"bohm", "--coupling", "random"}).code, 2);
    EXPECT_EQ(call({"chsh", "--quad", "0,1,x,2"}).code, 2);
    EXPECT_EQ(call({"chsh", "--quad", "0,1,2"}).code, 2);
    EXPECT_EQ(call({"bohm", "--samples", "10"}).code, 2);    // seed missing
    EXPECT_EQ(call({"bohm", "--seed", "1"}).code, 2);        // samples missing
    EXPECT_EQ(call({"contexts", "--samples", "10", "--seed", "1"}).code, 2);
    EXPECT_EQ(call({"memory", "--keep", "W"}).code, 2);
    EXPECT_EQ(call({}).code, 2);
    EXPECT_EQ(call({"frobnicate"}).code, 2);
}

TEST(Cli, BohmOrigins) {
    const auto f = call({"bohm", "--foliation", "F"});
    ASSERT_EQ(f.code, 0) << f.err;
    EXPECT_TRUE(has(f.out, "origin of (okbar,ok) under F: {(h,down):1}"));
    const auto fp = call({"bohm", "--foliation", "Fprime"});
    ASSERT_EQ(fp.code, 0);
    EXPECT_TRUE(has(fp.out, "origin of (okbar,ok) under Fprime: {(t,up):1}"));
    const auto both = call({"bohm"});
    EXPECT_TRUE(has(both.out, "origins differ; marginals identical"));
    const auto ind = call({"bohm", "--coupling", "independent"});
    ASSERT_EQ(ind.code, 0);
    EXPECT_TRUE(has(ind.out, "marginals identical"));
}

TEST(Cli, BohmSamplingAndJson) {
    const auto r = call({"bohm", "--foliation", "F", "--seed", "7", "--samples", "1000", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = Json::parse(r.out);
    ASSERT_EQ(j["sets"].size(), 1u);
    EXPECT_EQ(j["sets"][0]["samples"]["n"].get<std::size_t>(), 1000u);
    std::size_t total = 0;
    for (const auto& [k, v] : j["sets"][0]["samples"]["counts"].items()) total += v.get<std::size_t>();
    EXPECT_EQ(total, 1000u);
    // deterministic given the seed
    EXPECT_EQ(call({"bohm", "--foliation", "F", "--seed", "7", "--samples", "1000", "--format", "json"}).out,
              r.out);
}

TEST(Cli, Agents) {
    const auto r = call({"agents"});
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(has(r.out, "Fbar_n02  Counterfactual "));
    EXPECT_TRUE(has(r.out, "contradiction at"));
    const auto forbid = call({"agents", "--forbid-counterfactual"});
    ASSERT_EQ(forbid.code, 0);
    EXPECT_TRUE(has(forbid.out, "no contradiction"));

    const auto j = Json::parse(call({"agents", "--format", "json"}).out);
    EXPECT_EQ(std::stod(j["contradiction"]["composed"].get<std::string>()), 0.0);
    EXPECT_NEAR(std::stod(j["contradiction"]["actual"].get<std::string>()), 1.0 / 12, 1e-15);
}

TEST(Cli, Memory) {
    const auto r = call({"memory"});
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(has(r.out, "0.75 (3/4)"));
    EXPECT_TRUE(has(r.out, "0.25 (1/4)"));
    EXPECT_TRUE(has(r.out, "(5/12)"));
    const auto j = Json::parse(call({"memory", "--keep", "F", "--format", "json"}).out);
    ASSERT_EQ(j["runs"].size(), 2u);
    const auto& kept = j["runs"][1]["tables"]["(Wbar,W)"]["probabilities"];
    EXPECT_NEAR(std::stod(kept["failbar,fail"].get<std::string>()), 5.0 / 12, 1e-12);
}

TEST(Cli, Chsh) {
    const auto r = call({"chsh"});
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(has(r.out, "S quantum 2.82842712"));
    const auto j = Json::parse(call({"chsh", "--format", "json", "--quad", "0,1.5707963267948966,0.7853981633974483,-0.7853981633974483"}).out);
    EXPECT_NEAR(j["S_quantum"].get<double>(), bell::kTsirelson, 1e-9);
    const auto scan = Json::parse(call({"chsh", "--scan", "--resolution", "6", "--format", "json"}).out);
    EXPECT_LE(scan["S_lhv_max"].get<double>(), 2.0 + 1e-9);
    const auto evk = Json::parse(call({"chsh", "--erased-vs-kept", "--resolution", "6", "--format", "json"}).out);
    EXPECT_NEAR(evk["erased_vs_kept"]["S_erased"].get<double>(), bell::kTsirelson, 1e-9);
    EXPECT_LE(evk["erased_vs_kept"]["S_kept_max"].get<double>(), 2.0 + 1e-9);
}

TEST(Cli, ConfigFile) {
    const std::string path = ::testing::TempDir() + "hardysim_cfg.json";
    {
        std::ofstream f(path);
        f << R"({"scenario": "bohm", "foliation": "Fprime", "format": "table"})";
    }
    const auto r = call({"--config", path});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(has(r.out, "under Fprime: {(t,up):1}"));
    EXPECT_EQ(call({"--config", path, "contexts"}).code, 2);  // scenario mismatch
    {
        std::ofstream f(path);
        f << R"({"scenario": "nonsense"})";
    }
    EXPECT_EQ(call({"--config", path}).code, 2);
    std::remove(path.c_str());
}

TEST(Cli, ConfigValidation) {
    cli::ScenarioConfig c;
    c.scenario = "bohm";
    EXPECT_NO_THROW(cli::validate(c));
    c.seed = 1;
    EXPECT_THROW(cli::validate(c), cli::UsageError);
    c.samples = 5;
    EXPECT_NO_THROW(cli::validate(c));
    c.scenario = "unknown";
    EXPECT_THROW(cli::validate(c), cli::UsageError);
    EXPECT_THROW(cli::parse_quad("1,2,3,nan"), cli::UsageError);
    const auto q = cli::parse_quad("0,1,2,3");
    EXPECT_EQ(q.b_prime, 3.0);
}
