#include <gtest/gtest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <string>

#include "fixtures.hpp"

using namespace panda::testing;
using nlohmann::json;

namespace {

const std::string kCli = PANDA_CLI_PATH;
const std::string kToy = PANDA_TOY_DIR;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::string& args, const TempDir& tmp) {
    const auto out = tmp / "stdout.txt";
    const auto err = tmp / "stderr.txt";
    const std::string cmd = kCli + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(out), read_file(err)};
}

std::string toy_input() {
    return "--input-json " + kToy + "/panoptic.json --images-dir " + kToy + "/images --labels-dir " + kToy + "/labels";
}

}  // namespace

TEST(Cli, AugmentWritesLayoutAndSummary) {
    TempDir tmp;
    const auto r = run("augment " + toy_input() + " --output-dir " + (tmp / "out").string() + " --seed 3 --workers 2", tmp);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto summary = json::parse(r.out);
    EXPECT_EQ(summary["schema"], "panda.augment_summary/1");
    EXPECT_GE(summary["synthetic"].get<int>(), 10);
    EXPECT_TRUE(std::filesystem::exists(tmp / "out" / "panoptic.json"));
    EXPECT_TRUE(std::filesystem::is_directory(tmp / "out" / "images"));
    EXPECT_TRUE(std::filesystem::is_directory(tmp / "out" / "labels"));
}

TEST(Cli, AugmentFlagsAreHonoured) {
    TempDir tmp;
    const auto r = run("augment " + toy_input() + " --output-dir " + (tmp / "out").string() +
                           " --copies 2 --no-dropout --no-resize --shift-mode random --merge-originals --summary " +
                           (tmp / "s.json").string(),
                       tmp);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto summary = json::parse(read_file(tmp / "s.json"));
    EXPECT_EQ(summary["dropped"], 0);
    EXPECT_EQ(summary["synthetic"].get<int>(), 2 * summary["originals"].get<int>());
    EXPECT_EQ(summary["written"].get<int>(), 3 * summary["originals"].get<int>());
}

TEST(Cli, ValidationErrorExitsOne) {
    TempDir tmp;
    const auto r = run("augment " + toy_input() + " --output-dir " + (tmp / "out").string() + " --drop-low 0.6", tmp);
    EXPECT_EQ(r.code, 1);
    const auto err = json::parse(r.err);
    EXPECT_EQ(err["error"]["kind"], "InvalidConfig");
    EXPECT_EQ(err["error"]["exit_code"], 1);

    // Output directory equal to an input directory.
    EXPECT_EQ(run("augment " + toy_input() + " --output-dir " + kToy, tmp).code, 1);
    // Unknown flag.
    EXPECT_EQ(run("augment --bogus", tmp).code, 1);
}

TEST(Cli, IoErrorExitsTwo) {
    TempDir tmp;
    const auto r = run("augment --input-json " + (tmp / "missing.json").string() + " --images-dir x --labels-dir y --output-dir " +
                           (tmp / "out").string(),
                       tmp);
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(json::parse(r.err)["error"]["kind"], "MissingFile");
}

TEST(Cli, Stats) {
    TempDir tmp;
    const auto r = run("stats --input-json " + kToy + "/panoptic.json --labels-dir " + kToy + "/labels --csv " +
                           (tmp / "s.csv").string() + " --json " + (tmp / "s.json").string(),
                       tmp);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(read_file(tmp / "s.json"));
    EXPECT_EQ(j["schema"], "panda.class_stats/1");
    double total = 0;
    for (const auto& c : j["classes"]) total += c["mean_nonvoid_share"].get<double>();
    EXPECT_NEAR(total, 1.0, 1e-9);
    EXPECT_EQ(read_file(tmp / "s.csv").rfind("category_id,", 0), 0u);
}

TEST(Cli, EvaluateSelf) {
    TempDir tmp;
    const std::string gt = "--gt " + kToy + "/panoptic.json --gt-labels " + kToy + "/labels";
    const std::string pred = " --pred " + kToy + "/panoptic.json --pred-labels " + kToy + "/labels";
    const auto r = run("evaluate " + gt + pred + " --out " + (tmp / "pq.json").string(), tmp);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(read_file(tmp / "pq.json"));
    EXPECT_EQ(j["PQ"], 1.0);
    EXPECT_EQ(j["SQ"], 1.0);
    EXPECT_EQ(j["RQ"], 1.0);
}

TEST(Cli, EfficiencyFromCoefficients) {
    TempDir tmp;
    const auto r = run("efficiency --coef 6.3255:8.5413 --invert 59.9 --de 58.8 59.9", tmp);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["schema"], "panda.efficiency/1");
    EXPECT_NEAR(j["effective_n"][0]["N"].get<double>(), 3358.7, 3358.7 * 0.005);
    EXPECT_NEAR(j["data_efficiency"]["DE_percent"].get<double>(), 19.0, 0.15);
}

TEST(Cli, EfficiencyFromPoints) {
    TempDir tmp;
    const auto r = run("efficiency --points 10:7.605170 100:12.210340 1000:16.815511 --invert 12.210340", tmp);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_NEAR(j["fit"]["slope"].get<double>(), 2.0, 1e-5);
    EXPECT_NEAR(j["fit"]["intercept"].get<double>(), 3.0, 1e-5);
    EXPECT_NEAR(j["effective_n"][0]["N"].get<double>(), 100.0, 1e-3);
}

TEST(Cli, EfficiencyRejectsOtherRatios) {
    TempDir tmp;
    const auto r = run("efficiency --coef 6.3255:8.5413 --de 58.8 59.9 --synthetic-ratio 2", tmp);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(json::parse(r.err)["error"]["message"].get<std::string>().find("1:1"), std::string::npos);
    EXPECT_EQ(run("efficiency --points 10:1", tmp).code, 1);
    EXPECT_EQ(run("efficiency --points 10:1 10:2", tmp).code, 1);
}
