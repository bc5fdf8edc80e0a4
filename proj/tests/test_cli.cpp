#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <regex>

#include <gtest/gtest.h>

#include "pinstream/io.hpp"
#include "pinstream/sim.hpp"
#include "support.hpp"

using namespace pinstream;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
};

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() /
               ("pinstream_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }

    void TearDown() override { fs::remove_all(dir_); }

    CliRun run(const std::string& args) const
    {
        const fs::path log = dir_ / "stdout.txt";
        const std::string cmd = "env -u PINSTREAM_CONFIG " + std::string(PINSTREAM_CLI) + " " + args + " > " +
                                log.string() + " 2>&1";
        const int status = std::system(cmd.c_str());
        CliRun r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = io::read_file(log);
        return r;
    }

    std::string write_throw(const std::string& name, const ThrowScript& s) const
    {
        const SynthesizedThrow th = synthesize(s);
        const fs::path w = dir_ / (name + ".wrist.jsonl"), l = dir_ / (name + ".leg.jsonl");
        io::write_file(w, io::to_jsonl(th.wrist, 50.0));
        io::write_file(l, io::to_jsonl(th.leg, 50.0));
        return w.string() + " " + l.string();
    }

    std::string path(const std::string& p) const { return (dir_ / p).string(); }

    fs::path dir_;
};

std::string manifest_hash(const std::string& out)
{
    std::smatch m;
    return std::regex_search(out, m, std::regex("manifest fnv1a ([0-9a-f]{16})")) ? m[1].str() : "";
}

} // namespace

TEST_F(Cli, SimulateWritesCorpusAndIsReproducible)
{
    const CliRun a = run("simulate --athletes 3 --throws 10 --seed 4 --out " + path("a"));
    ASSERT_EQ(a.code, 0) << a.out;
    const auto m = io::parse_manifest(io::read_file(path("a/manifest.csv")), "manifest");
    EXPECT_EQ(m.size(), 30u);
    for (const auto& e : m) {
        EXPECT_TRUE(fs::exists(path("a/" + e.wrist_file)));
        EXPECT_TRUE(fs::exists(path("a/" + e.leg_file)));
        EXPECT_TRUE(fs::exists(path("a/" + e.truth_file)));
    }
    EXPECT_TRUE(fs::exists(path("a/templates.json")));

    const CliRun b = run("simulate --athletes 3 --throws 10 --seed 4 --out " + path("b"));
    ASSERT_EQ(b.code, 0);
    EXPECT_FALSE(manifest_hash(a.out).empty());
    EXPECT_EQ(manifest_hash(a.out), manifest_hash(b.out));
    EXPECT_EQ(io::read_file(path("a/streams/A02_T003.leg.jsonl")), io::read_file(path("b/streams/A02_T003.leg.jsonl")));

    const CliRun c = run("simulate --athletes 3 --throws 10 --seed 5 --out " + path("c"));
    EXPECT_NE(manifest_hash(a.out), manifest_hash(c.out));
}

TEST_F(Cli, ExtractExcludesTwoStrideThrows)
{
    ASSERT_EQ(run("simulate --athletes 3 --throws 4 --two-stride 5 --out " + path("c")).code, 0);
    const CliRun r = run("extract " + path("c") + " --out " + path("f.csv"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("excluded 5"), std::string::npos) << r.out;
    EXPECT_EQ(io::parse_features(io::read_file(path("f.csv")), "f").size(), 12u);
}

TEST_F(Cli, SelfTemplateScoresHundredWithoutFlags)
{
    const std::string coach = write_throw("coach", nominal_script());
    ASSERT_EQ(run("template " + coach + " --out " + path("t.json")).code, 0);
    const CliRun r = run("analyze --templates " + path("t.json") + " " + coach + " --out " + path("rep"));
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = nlohmann::json::parse(io::read_file(path("rep/report.json")));
    const auto& t = j.at("throws").at(0);
    for (int k = 0; k < 3; ++k)
        EXPECT_EQ(t.at("quality").at("qd").at(k), 100.0);
    for (const char* e : {"e1", "e2", "e3", "e4"})
        EXPECT_FALSE(t.at("errors").at(e).at("flag").get<bool>()) << e;
    EXPECT_TRUE(fs::exists(path("rep/coach.plot.csv")));
}

TEST_F(Cli, LateLastContactIsFlagged)
{
    const std::string coach = write_throw("coach", nominal_script());
    ThrowScript s = nominal_script();
    s.noise_seed = 3;
    inject_error(s, 2, 1);
    const std::string user = write_throw("user", s);
    ASSERT_EQ(run("template " + coach + " --out " + path("t.json")).code, 0);
    const CliRun r = run("analyze --templates " + path("t.json") + " " + user + " --out " + path("rep"));
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = nlohmann::json::parse(io::read_file(path("rep/report.json")));
    const auto& e = j.at("throws").at(0).at("errors");
    EXPECT_TRUE(e.at("e3").at("flag").get<bool>());
    EXPECT_FALSE(e.at("e1").at("flag").get<bool>());
    EXPECT_FALSE(e.at("e2").at("flag").get<bool>());
}

TEST_F(Cli, ExitCodes)
{
    EXPECT_EQ(run("analyze --templates " + path("missing.json") + " a b").code, 1);
    io::write_file(path("bad.json"), R"({"thresholds": {"eps9": 1}})");
    const CliRun bad_cfg = run("simulate --config " + path("bad.json") + " --out " + path("x"));
    EXPECT_EQ(bad_cfg.code, 1);
    EXPECT_NE(bad_cfg.out.find("thresholds.eps9"), std::string::npos);
    EXPECT_EQ(run("nonsense").code, 1);

    const std::string coach = write_throw("coach", nominal_script());
    ASSERT_EQ(run("template " + coach + " --out " + path("t.json")).code, 0);
    ThrowScript two = nominal_script();
    two.leg_strides = 2;
    const CliRun r = run("analyze --templates " + path("t.json") + " " + write_throw("two", two));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("StyleMismatch"), std::string::npos) << r.out;
}

TEST_F(Cli, ConfigFromEnvironment)
{
    io::write_file(path("cfg.json"), R"({"sim": {"athletes": 3, "throws_each": 2}})");
    const std::string cmd = "PINSTREAM_CONFIG=" + path("cfg.json") + " " + std::string(PINSTREAM_CLI) +
                            " simulate --out " + path("c") + " > /dev/null 2>&1";
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    EXPECT_EQ(io::parse_manifest(io::read_file(path("c/manifest.csv")), "m").size(), 6u);
}

TEST_F(Cli, TrainEvaluateAndReport)
{
    ASSERT_EQ(run("simulate --athletes 3 --throws 12 --seed 2 --out " + path("c")).code, 0);
    ASSERT_EQ(run("extract " + path("c") + " --out " + path("f.csv")).code, 0);
    io::write_file(path("cfg.json"), R"({"svm": {"C_grid": [1, 10], "gamma_grid": [0.01, 0.1], "folds": 3}})");
    const CliRun t = run("train " + path("f.csv") + " --config " + path("cfg.json") + " --out " + path("m"));
    ASSERT_EQ(t.code, 0) << t.out;
    for (const char* f : {"model.json", "cv_table.csv", "metrics.json", "train.csv", "test.csv"})
        EXPECT_TRUE(fs::exists(path(std::string("m/") + f))) << f;
    const CliRun e = run("evaluate " + path("m/model.json") + " " + path("m/test.csv") + " --out " + path("e.json"));
    ASSERT_EQ(e.code, 0) << e.out;
    const auto a = nlohmann::json::parse(io::read_file(path("m/metrics.json")));
    const auto b = nlohmann::json::parse(io::read_file(path("e.json")));
    EXPECT_EQ(a.at("confusion"), b.at("confusion"));
    const CliRun rep = run("report " + path("e.json"));
    EXPECT_EQ(rep.code, 0);
    EXPECT_NE(rep.out.find("macro"), std::string::npos) << rep.out;
}
