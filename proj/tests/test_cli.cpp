#include <gtest/gtest.h>

#include <sodium.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.h"
#include "mocap/io.h"

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun runCli(std::vector<std::string> args) {
  args.insert(args.begin(), "mocap");
  std::vector<const char*> argv;
  for (const std::string& a : args) {
    argv.push_back(a.c_str());
  }
  std::ostringstream out, err;
  CliRun r;
  r.code = mocap::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string readFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string digest(const std::string& bytes) {
  unsigned char h[16];
  crypto_generichash(h, sizeof h, reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), nullptr, 0);
  char hex[2 * sizeof h + 1];
  sodium_bin2hex(hex, sizeof hex, h, sizeof h);
  return hex;
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ASSERT_GE(sodium_init(), 0);
    dir_ = fs::temp_directory_path() / "mocap_test_cli";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    const CliRun r = runCli({"synth", "--scenario", "walk", "--frames", "8", "--markers", "16", "--seed", "3",
                          "--yaw-deg", "90", "--out-dir", dir_.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    nlohmann::json cfg = {{"stage2", {{"optim", {{"max_iters", 60}}}}},
                          {"stage4", {{"optim", {{"max_iters", 60}}}}},
                          {"localization", {{"optim", {{"max_iters", 30}}}}}};
    std::ofstream(dir_ / "config.json") << cfg.dump();
  }

  static std::string path(const std::string& name) {
    return (dir_ / name).string();
  }

  static CliRun solve(const std::string& outName, std::vector<std::string> extra = {}) {
    std::vector<std::string> args{"solve", "--markers", path("markers.json"), "--prior", path("prior.json"),
                                  "--config", path("config.json"), "--out", path(outName)};
    args.insert(args.end(), extra.begin(), extra.end());
    return runCli(args);
  }

  static fs::path dir_;
};

fs::path CliTest::dir_;

} // namespace

TEST_F(CliTest, HelpExitsZero) {
  for (const char* sub : {"solve", "segment", "localize", "synth", "eval"}) {
    const CliRun r = runCli({sub, "--help"});
    EXPECT_EQ(r.code, 0) << sub;
    EXPECT_NE(r.out.find("--"), std::string::npos) << sub;
  }
  EXPECT_EQ(runCli({"--help"}).code, 0);
}

TEST_F(CliTest, UsageErrorsExitOne) {
  CliRun r = runCli({"solve", "--bogus"});
  EXPECT_EQ(r.code, mocap::cli::kUsage);
  EXPECT_NE(r.err.find("--markers"), std::string::npos) << r.err;
  EXPECT_EQ(runCli({"segment"}).code, mocap::cli::kUsage);
  EXPECT_EQ(runCli({"synth", "--out-dir", path("x"), "--scenario", "dance"}).code, mocap::cli::kUsage);
  EXPECT_EQ(runCli({"synth", "--out-dir", path("x"), "--prior-gap", "5"}).code, mocap::cli::kUsage);
  EXPECT_EQ(runCli({}).code, mocap::cli::kUsage);
}

TEST_F(CliTest, RuntimeFailuresExitTwo) {
  std::ofstream(path("bad.json")) << "{\"format_version\": \"1.0\", \"frames\": 3}";
  const CliRun r = runCli({"segment", "--markers", path("bad.json"), "--out", path("seg_bad.json")});
  EXPECT_EQ(r.code, mocap::cli::kFailure);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
  const CliRun mismatch = runCli({"eval", "--pred", path("truth.json"), "--ref", path("truth.json"), "--markers",
                               path("bad.json")});
  EXPECT_EQ(mismatch.code, mocap::cli::kFailure);
}

TEST_F(CliTest, SynthOutputsAreGolden) {
  EXPECT_EQ(digest(readFile(path("markers.json"))), "0a020272c52166762e44a61cb23cd621");
  EXPECT_EQ(digest(readFile(path("truth.json"))), "628cf5d213ce4785239cd41f188f0c9c");
  EXPECT_EQ(digest(readFile(path("prior.json"))), "d2fd7654db0fedd1935f8ba6ebae1519");
}

TEST_F(CliTest, SegmentIsGolden) {
  const CliRun r = runCli({"segment", "--markers", path("markers.json"), "--out", path("clusters.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = mocap::readJsonFile(path("clusters.json"));
  EXPECT_EQ(j["format"], "clusters");
  EXPECT_EQ(j["labels"].size(), 16u);
  EXPECT_EQ(digest(readFile(path("clusters.json"))), "94981f42db2f94d71f29e5e297eef931");
}

TEST_F(CliTest, LocalizeIsGolden) {
  const CliRun r = runCli({"localize", "--markers", path("markers.json"), "--prior", path("prior.json"), "--config",
                        path("config.json"), "--out", path("localization.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(r.out.empty());
  EXPECT_EQ(digest(readFile(path("localization.json"))), "d9efb8fe115696afa1f35e18d9e33c28");
}

TEST_F(CliTest, SolveIsGoldenAndRepeatable) {
  const CliRun a = solve("result_a.json", {"--table", path("table.txt")});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("stage4"), std::string::npos);
  const CliRun b = solve("result_b.json", {"--parallel"});
  ASSERT_EQ(b.code, 0) << b.err;
  const std::string bytes = readFile(path("result_a.json"));
  EXPECT_EQ(readFile(path("result_b.json")), bytes);
  const auto j = mocap::readJsonFile(path("result_a.json"));
  EXPECT_EQ(j["format"], "solve-result");
  EXPECT_EQ(j["correspondence"].size(), 16u);
  EXPECT_EQ(digest(bytes), "8d7878e21c238e87fb597896ca2f120c");

  const CliRun e = runCli({"eval", "--pred", path("result_a.json"), "--ref", path("truth.json"), "--markers",
                        path("markers.json"), "--json", path("metrics.json")});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("units: mm (MPJVE mm/s)"), std::string::npos);
  EXPECT_EQ(digest(readFile(path("metrics.json"))), "57b1f61c9e9268643f1aa9edf0b16826");
}

TEST_F(CliTest, EvalOfIdenticalInputsIsZero) {
  const CliRun r = runCli({"eval", "--pred", path("truth.json"), "--ref", path("truth.json"), "--json",
                        path("zero.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = mocap::readJsonFile(path("zero.json"));
  EXPECT_EQ(j["mpjpe_mm"].get<double>(), 0.0);
  EXPECT_EQ(j["v2v_mm"].get<double>(), 0.0);
  EXPECT_EQ(j["mpjve_mm_s"].get<double>(), 0.0);
  EXPECT_NE(r.out.find("prediction"), std::string::npos);
}

TEST_F(CliTest, SynthWritesModelOnRequest) {
  const CliRun r = runCli({"synth", "--frames", "3", "--markers", "5", "--out-dir", path("with_model"), "--write-model",
                        "--prior-gap", "1:1", "--dropout", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "with_model" / "model.json"));
  const auto prior = mocap::readJsonFile(path("with_model/prior.json"));
  EXPECT_EQ(prior["frames"][1]["present"], false);
}
