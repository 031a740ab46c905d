#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "spamsim/cli.hpp"
#include "spamsim/io.hpp"

using namespace spamsim;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spamsim_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"run"}).code, kExitUsage);  // --out required
  const auto dir = temp_dir("usage");
  EXPECT_EQ(cli({"run", "--shots", "0", "--seed", "1", "--out", dir.string()}).code, kExitUsage);
  EXPECT_EQ(cli({"run", "--shots", "10", "--encoding", "X", "--seed", "1", "--out", dir.string()}).code, kExitUsage);
  EXPECT_EQ(cli({"run", "--config", "/nonexistent.json", "--out", dir.string()}).code, kExitUsage);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST(Cli, ConfigSchemaViolationExits2) {
  const auto dir = temp_dir("schema");
  write_text_file(dir / "bad.json", R"({"experiment": {"shots": "many"}})");
  EXPECT_EQ(cli({"run", "--config", (dir / "bad.json").string(), "--out", (dir / "o").string()}).code, kExitUsage);
}

TEST(Cli, UnwritableOutputExits3) {
  const auto dir = temp_dir("io");
  write_text_file(dir / "file", "x");
  EXPECT_EQ(cli({"run", "--shots", "10", "--seed", "1", "--out", (dir / "file" / "sub").string()}).code, kExitIo);
}

TEST(Cli, RunIsByteReproducible) {
  const auto dir = temp_dir("repro");
  const auto a = cli({"run", "--shots", "3000", "--seed", "77", "--encoding", "O", "--out", (dir / "a").string()});
  const auto b = cli({"run", "--shots", "3000", "--seed", "77", "--encoding", "O", "--threads", "4", "--records",
                      "--out", (dir / "b").string()});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  ASSERT_EQ(b.code, kExitOk) << b.err;
  EXPECT_EQ(read_text_file(dir / "a" / "summary.json"), read_text_file(dir / "b" / "summary.json"));
  EXPECT_EQ(read_text_file(dir / "a" / "histogram_R3.csv"), read_text_file(dir / "b" / "histogram_R3.csv"));
  EXPECT_TRUE(fs::exists(dir / "b" / "records.csv"));
  EXPECT_FALSE(fs::exists(dir / "a" / "records.csv"));
  const auto manifest = Json::parse(read_text_file(dir / "a" / "manifest.json"));
  EXPECT_EQ(manifest["seed"].get<std::uint64_t>(), 77U);
  EXPECT_EQ(manifest["command"], "run");
}

TEST(Cli, ManifestReproducesRun) {
  const auto dir = temp_dir("manifest");
  ASSERT_EQ(cli({"run", "--shots", "2000", "--seed", "5", "--out", (dir / "a").string()}).code, kExitOk);
  const auto manifest = Json::parse(read_text_file(dir / "a" / "manifest.json"));
  write_text_file(dir / "resolved.json", manifest["resolved_config"].dump());
  ASSERT_EQ(cli({"run", "--config", (dir / "resolved.json").string(), "--out", (dir / "b").string()}).code, kExitOk);
  EXPECT_EQ(read_text_file(dir / "a" / "summary.json"), read_text_file(dir / "b" / "summary.json"));
}

TEST(Cli, SeedFallsBackToEnvironment) {
  const auto dir = temp_dir("env");
  ::setenv("SPAMSIM_SEED", "1234", 1);
  const auto r = cli({"run", "--shots", "100", "--out", dir.string()});
  ::unsetenv("SPAMSIM_SEED");
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_EQ(Json::parse(read_text_file(dir / "manifest.json"))["seed"].get<std::uint64_t>(), 1234U);
  ::setenv("SPAMSIM_SEED", "abc", 1);
  EXPECT_EQ(cli({"run", "--shots", "100", "--out", dir.string()}).code, kExitUsage);
  ::unsetenv("SPAMSIM_SEED");
}

TEST(Cli, CalibrateThreshold) {
  const auto dir = temp_dir("cal");
  ASSERT_EQ(cli({"simulate-histograms", "--samples", "2000", "--seed", "3", "--out", dir.string()}).code, kExitOk);
  const auto r = cli({"calibrate-threshold", "--bright", (dir / "bright.csv").string(), "--dark",
                      (dir / "dark.csv").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_GT(j["threshold"].get<int>(), 100);
  EXPECT_LT(j["threshold"].get<int>(), 200);
  EXPECT_EQ(cli({"calibrate-threshold", "--bright", (dir / "dark.csv").string(), "--dark",
                 (dir / "dark.csv").string()}).code,
            kExitInseparable);
  EXPECT_EQ(cli({"calibrate-threshold", "--bright", (dir / "missing.csv").string(), "--dark",
                 (dir / "dark.csv").string()}).code,
            kExitIo);
}

TEST(Cli, PredictRejectionTable) {
  const auto dir = temp_dir("pred");
  const auto r = cli({"predict-rejection", "--reference-model", "--out", (dir / "p.json").string()});
  ASSERT_EQ(r.code, kExitOk);
  const auto j = Json::parse(read_text_file(dir / "p.json"));
  ASSERT_EQ(j["rows"].size(), 6U);
  EXPECT_DOUBLE_EQ(j["rows"][2]["first_order"].get<double>(), 0.0356);
  EXPECT_TRUE(fs::exists(dir / "p.json.manifest.json"));
}

TEST(Cli, BiasScanAndLifetime) {
  const auto dir = temp_dir("bias");
  ASSERT_EQ(cli({"bias-scan", "--curve", "M0", "--t-grid", "0.8,1.0", "--shots", "2000", "--seed", "1", "--out",
                 (dir / "b.csv").string()}).code,
            kExitOk);
  const auto csv = read_text_file(dir / "b.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_EQ(cli({"bias-scan", "--curve", "Z9", "--out", (dir / "x.csv").string()}).code, kExitUsage);
  EXPECT_EQ(cli({"bias-scan", "--t-grid", "a,b", "--out", (dir / "x.csv").string()}).code, kExitUsage);

  ASSERT_EQ(cli({"simulate-lifetime", "--count", "5000", "--seed", "2", "--out", (dir / "l.csv").string()}).code,
            kExitOk);
  const auto fit = cli({"lifetime-fit", "--samples", (dir / "l.csv").string()});
  ASSERT_EQ(fit.code, kExitOk) << fit.err;
  const auto j = Json::parse(fit.out);
  EXPECT_GT(j["tau"].get<double>(), 15.0);
  EXPECT_LT(j["tau"].get<double>(), 45.0);
  write_text_file(dir / "one.csv", "delay,decayed\n5,1\n5,0\n");
  EXPECT_EQ(cli({"lifetime-fit", "--samples", (dir / "one.csv").string()}).code, kExitUsage);
}
