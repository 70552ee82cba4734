#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "dot_parser.hpp"
#include "fixtures.hpp"
#include "ergoloop/cli.hpp"
#include "ergoloop/io.hpp"

using namespace ergoloop;
using namespace ergoloop::testing;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / ("ergoloop_cli_" + std::string(info->name()) + "_" +
                                            std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
    }
    void TearDown() override { fs::remove_all(dir_); }

    int run(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr)
    {
        std::vector<const char*> argv{"ergoloop"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream o, e;
        const int code = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
        if (out) *out = o.str();
        if (err) *err = e.str();
        return code;
    }

    std::string config(const char* name) const { return (config_dir() / name).string(); }
    fs::path out(const std::string& sub) const { return dir_ / sub; }

    static std::string slurp(const fs::path& p)
    {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    static std::size_t file_count(const fs::path& p)
    {
        if (!fs::exists(p)) return 0;
        return static_cast<std::size_t>(std::distance(fs::directory_iterator(p), fs::directory_iterator()));
    }

    fs::path dir_;
};

} // namespace

TEST_F(Cli, CertifyExitCodes)
{
    EXPECT_EQ(run({"certify", "--config", config("linear_ifs.yaml"), "--out", out("a").string()}), kExitOk);
    EXPECT_TRUE(fs::exists(out("a") / "contraction.json"));
    EXPECT_TRUE(fs::exists(out("a") / "manifest.json"));
    EXPECT_EQ(run({"certify", "--config", config("expanding.yaml"), "--out", out("b").string()}),
              kExitNonContractive);
}

TEST_F(Cli, InvalidTrialsLeavesNothingBehind)
{
    std::string err;
    EXPECT_EQ(run({"certify", "--config", config("linear_ifs.yaml"), "--trials", "1", "--out", out("c").string()},
                  nullptr, &err),
              kExitError);
    EXPECT_NE(err.find("InvalidArgument"), std::string::npos) << err;
    EXPECT_EQ(file_count(out("c")), 0u);
}

TEST_F(Cli, ErrorsMapToExitOne)
{
    EXPECT_EQ(run({"simulate", "--config", config("missing.yaml")}), kExitError);
    EXPECT_EQ(run({"bogus"}), kExitError);
    EXPECT_EQ(run({}), kExitError);
}

TEST_F(Cli, SimulateZeroIterations)
{
    ASSERT_EQ(run({"simulate", "--config", config("deterministic.yaml"), "--iterations", "0", "--out",
                   out("s").string()}),
              kExitOk);
    // The checkpoint P has not emitted yet at k = 0.
    EXPECT_EQ(slurp(out("s") / "trajectory.csv"), "k,y0\n0,0\n");
}

TEST_F(Cli, SimulateTrajectory)
{
    ASSERT_EQ(run({"simulate", "--config", config("deterministic.yaml"), "--iterations", "3", "--out",
                   out("s").string()}),
              kExitOk);
    // Z starts at 1 and P emits 0.9 Z: 0.9, 0.81, 0.729 in passes 0, 1, 2.
    std::ostringstream expected;
    expected << "k,y0\n0,0\n1," << format_double(0.9) << "\n2," << format_double(0.9 * 0.9) << "\n3,"
             << format_double(0.9 * 0.9 * 0.9) << "\n";
    EXPECT_EQ(slurp(out("s") / "trajectory.csv"), expected.str());
}

TEST_F(Cli, ArtifactsAreByteStable)
{
    for (const char* verb : {"simulate", "certify", "kde", "fairness"}) {
        const std::vector<std::string> common = {verb, "--config", config("worked_pi.yaml"), "--trials", "20"};
        auto args1 = common, args2 = common;
        args1.insert(args1.end(), {"--out", out(std::string(verb) + "1").string()});
        args2.insert(args2.end(), {"--out", out(std::string(verb) + "2").string()});
        std::string o1, o2;
        const int c1 = run(args1, &o1);
        const int c2 = run(args2, &o2);
        EXPECT_EQ(c1, c2) << verb;
        EXPECT_EQ(o1, o2) << verb;
        for (const auto& f : fs::directory_iterator(out(std::string(verb) + "1"))) {
            const fs::path twin = out(std::string(verb) + "2") / f.path().filename();
            ASSERT_TRUE(fs::exists(twin)) << twin;
            if (f.path().filename() == "manifest.json") continue;
            EXPECT_EQ(slurp(f.path()), slurp(twin)) << f.path();
        }
    }
}

TEST_F(Cli, ManifestRecordsRun)
{
    ASSERT_EQ(run({"simulate", "--config", config("linear_ifs.yaml"), "--seed", "9", "--out", out("m").string()}),
              kExitOk);
    const auto j = nlohmann::json::parse(slurp(out("m") / "manifest.json"));
    EXPECT_EQ(j.at("command"), "simulate");
    EXPECT_EQ(j.at("seed"), 9);
    EXPECT_EQ(j.at("config_sha256").get<std::string>().size(), 64u);
    EXPECT_EQ(j.at("started"), "2023-11-14T22:13:20Z");
    EXPECT_EQ(j.at("overrides"), nlohmann::json::array({"seed=9"}));
}

TEST_F(Cli, KdeIntegratesToOne)
{
    ASSERT_EQ(run({"kde", "--config", config("linear_ifs.yaml"), "--trials", "400", "--iterations", "30", "--out",
                   out("k").string()}),
              kExitOk);
    const auto j = nlohmann::json::parse(slurp(out("k") / "kde.json"));
    ASSERT_EQ(j.size(), 1u);
    EXPECT_EQ(j[0].at("burn_in"), 30);
    EXPECT_NEAR(j[0].at("integral").get<double>(), 1.0, 1e-3);
}

TEST_F(Cli, FairnessReportSections)
{
    ASSERT_EQ(run({"fairness", "--config", config("worked_pi.yaml"), "--trials", "20", "--out", out("f").string()}),
              kExitOk);
    const auto j = nlohmann::json::parse(slurp(out("f") / "fairness.json"));
    EXPECT_TRUE(j.at("equal_treatment").is_object());
    EXPECT_TRUE(j.at("equal_impact").is_object());
    EXPECT_TRUE(j.at("robustness").is_object());
    EXPECT_TRUE(fs::exists(out("f") / "treatment_agents.csv"));

    ASSERT_EQ(run({"fairness", "--config", config("linear_ifs.yaml"), "--trials", "20", "--out", out("g").string()}),
              kExitOk);
    const auto single = nlohmann::json::parse(slurp(out("g") / "fairness.json"));
    EXPECT_TRUE(single.at("equal_treatment").is_object());
    EXPECT_TRUE(single.at("equal_impact").is_null());
    EXPECT_TRUE(single.at("robustness").is_null());
}

TEST_F(Cli, ExportDot)
{
    std::string text;
    ASSERT_EQ(run({"export-dot", "--config", config("worked_relu.yaml")}, &text), kExitOk);
    const ParsedDot dot = parse_dot(text);
    EXPECT_EQ(dot.nodes.size(), 8u);
    std::set<std::pair<std::string, std::string>> expected;
    for (const auto& e : worked_edges()) expected.insert(e);
    EXPECT_EQ(dot.edges, expected);

    ASSERT_EQ(run({"export-dot", "--config", config("worked_relu.yaml"), "--out", out("d").string()}), kExitOk);
    EXPECT_EQ(slurp(out("d") / "graph.dot"), text);
}

TEST_F(Cli, BinaryRuns)
{
    const std::string cmd = std::string("\"") + ERGOLOOP_CLI_PATH + "\" export-dot --config \"" +
                            config("linear_ifs.yaml") + "\" > \"" + (dir_ / "g.dot").string() + "\"";
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    EXPECT_EQ(slurp(dir_ / "g.dot").rfind("digraph G {\n", 0), 0u);
    const std::string bad = std::string("\"") + ERGOLOOP_CLI_PATH + "\" certify --config \"" +
                            config("expanding.yaml") + "\" --out \"" + (dir_ / "x").string() + "\" > /dev/null";
    const int status = std::system(bad.c_str());
    ASSERT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), kExitNonContractive);
}
