#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "opsplit/cli.hpp"
#include "opsplit/io.hpp"

namespace opsplit::cli {
namespace {

const std::filesystem::path kData = OPSPLIT_TEST_DATA_DIR;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "opsplit");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  std::filesystem::path dir_ = std::filesystem::temp_directory_path() / "opsplit_cli_test";
  void SetUp() override { std::filesystem::create_directories(dir_); }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
};

TEST_F(CliTest, ProjectionOracleReportsOneHundredCertificates) {
  const CliRun r = run_cli({"verify", "--suite", "projection-oracle", "--seed", "0", "--samples", "2000"});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j.at("certificates").size(), 100u);
  for (const auto& c : j.at("certificates")) EXPECT_TRUE(c.at("pass").get<bool>());
  EXPECT_EQ(j.at("seed"), 0);
  EXPECT_TRUE(j.contains("config_hash"));
  EXPECT_TRUE(j.at("timestamp").is_null());
}

TEST_F(CliTest, BlockEquivalenceWithinTolerance) {
  const CliRun r = run_cli({"verify", "--suite", "block-equivalence", "--trials", "200", "--out", path("r.json")});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  const json j = read_json_file(path("r.json"));
  EXPECT_EQ(j.at("cases").size(), 200u);
  for (const auto& c : j.at("cases")) {
    EXPECT_LE(c.at("max_abs_error").get<double>(), 1e-12);
    EXPECT_EQ(c.at("pass").get<bool>(), c.at("max_abs_error").get<double>() <= c.at("tolerance").get<double>());
  }
}

TEST_F(CliTest, UsageErrors) {
  const CliRun unknown = run_cli({"verify", "--suite", "nope"});
  EXPECT_EQ(unknown.code, kUsageError);
  EXPECT_NE(unknown.err.find("unknown suite"), std::string::npos);
  EXPECT_EQ(run_cli({}).code, kUsageError);
  EXPECT_EQ(run_cli({"frobnicate"}).code, kUsageError);
  EXPECT_EQ(run_cli({"step", "--model", path("missing.json"), "--input", path("missing.json")}).code, kUsageError);
  EXPECT_EQ(run_cli({"train", "--data", path("d.json")}).code, kUsageError);
  EXPECT_EQ(run_cli({"--help"}).code, kSuccess);
}

TEST_F(CliTest, StepReproducesGoldenFixture) {
  const std::string model = (kData / "golden_model.json").string();
  const std::string input = (kData / "golden_input.json").string();
  const CliRun r = run_cli({"step", "--model", model, "--input", input});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  EXPECT_EQ(r.out, slurp(kData / "golden_output.json"));
}

TEST_F(CliTest, StepTraceHasOneEntryPerSubstep) {
  const std::string model = (kData / "golden_model.json").string();
  const std::string input = (kData / "golden_input.json").string();
  const CliRun r = run_cli({"step", "--model", model, "--input", input, "--trace"});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  const json j = json::parse(r.out);
  // Two vanilla blocks with J = 2: M = 6 substeps each, plus the input.
  EXPECT_EQ(j.at("trace").size(), 2u * 6 + 1);
  EXPECT_EQ(j.at("trace")[0].at("label"), "input");
  EXPECT_EQ(j.at("trace").back().at("tensor"), j.at("output"));
  EXPECT_EQ(j.at("output"), read_json_file(kData / "golden_output.json"));
}

TEST_F(CliTest, StepRejectsShapeMismatch) {
  ASSERT_EQ(run_cli({"init", "--nx", "3", "--out", path("m.json")}).code, kSuccess);
  const CliRun r = run_cli({"step", "--model", path("m.json"), "--input", (kData / "golden_input.json").string()});
  EXPECT_EQ(r.code, kUsageError);
  EXPECT_NE(r.err.find("expects 3x4"), std::string::npos) << r.err;
}

TEST_F(CliTest, StepIngestsPgmPatchesForVitModels) {
  ASSERT_EQ(run_cli({"init", "--nx", "5", "--vit-patch-dim", "4", "--vit-classes", "3", "--out", path("m.json")}).code,
            kSuccess);
  {
    std::ofstream f(path("img.pgm"), std::ios::binary);
    f << "P5\n4 4\n255\n";
    for (int i = 0; i < 16; ++i) f.put(static_cast<char>(i * 16));
  }
  const CliRun r = run_cli({"step", "--model", path("m.json"), "--image", path("img.pgm"), "--patch", "2"});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  EXPECT_EQ(json::parse(r.out).at("shape"), json::array({3}));
  EXPECT_EQ(run_cli({"step", "--model", path("m.json"), "--image", path("img.pgm"), "--patch", "4"}).code, kUsageError);
  EXPECT_EQ(run_cli({"step", "--model", (kData / "golden_model.json").string(), "--image", path("img.pgm"), "--patch", "2"}).code,
            kUsageError);
}

TEST_F(CliTest, ZeroModelOutputSatisfiesTheFinalNorm) {
  ASSERT_EQ(run_cli({"init", "--out", path("m.json"), "--input-out", path("u.json")}).code, kSuccess);
  json m = read_json_file(path("m.json"));
  for (auto& b : m["blocks"]) {
    for (const char* w : {"w_q", "w_k", "w_v"}) {
      for (auto& x : b["attn"][w]["data"]) x = 0.0;
    }
    for (auto& layer : b["ffn"]) {
      for (auto& x : layer["w"]["data"]) x = 0.0;
      for (auto& x : layer["b"]["data"]) x = 0.0;
    }
    b["norm2"] = {{"sigma1", 0.5}, {"sigma2", 2.0}, {"epsilon", 1e-12}};
  }
  write_json_file(path("m.json"), m);
  const CliRun r = run_cli({"step", "--model", path("m.json"), "--input", path("u.json")});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  const Matrix out = tensor_from_json(json::parse(r.out), "out");
  for (std::size_t k = 0; k < out.rows(); ++k) {
    const RowStats st = row_stats(out.row(k));
    EXPECT_NEAR(st.mean, 0.5, 1e-12);
    EXPECT_NEAR(st.variance, 4.0, 1e-10);
  }
}

TEST_F(CliTest, ConvergeReportsFirstOrder) {
  const CliRun r = run_cli({"converge"});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  const json j = json::parse(r.out);
  ASSERT_EQ(j.at("studies").size(), 4u);
  for (const auto& s : j.at("studies")) {
    if (s.at("problem") == "noncommuting-2x2") {
      EXPECT_NEAR(s.at("fitted_order").get<double>(), 1.0, 0.2);
      EXPECT_TRUE(s.at("rows")[0].at("observed_order").is_null());
      for (std::size_t i = 1; i < s.at("rows").size(); ++i)
        EXPECT_NEAR(s.at("rows")[i].at("observed_order").get<double>(), 1.0, 0.2);
    } else {
      EXPECT_LE(s.at("max_error").get<double>(), 1e-12);
    }
  }
}

TEST_F(CliTest, TrainHalvesTheToyLossAndWritesTheModel) {
  const CliRun r = run_cli({"train", "--seed", "0", "--out", path("curve.json")});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  const json j = read_json_file(path("curve.json"));
  EXPECT_EQ(j.at("loss_curve").size(), 201u);
  EXPECT_LE(j.at("final_loss").get<double>(), 0.5 * j.at("initial_loss").get<double>());
  EXPECT_NO_THROW(network_from_json(read_json_file(path("curve.model.json"))));
}

TEST_F(CliTest, TrainWithZeroLearningRateIsFlat) {
  const CliRun r = run_cli({"train", "--lr", "0", "--steps", "4"});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  const auto curve = json::parse(r.out).at("loss_curve").get<std::vector<double>>();
  for (double l : curve) EXPECT_EQ(l, curve.front());
}

TEST_F(CliTest, TrainOnFilesAndVitMode) {
  ASSERT_EQ(run_cli({"train", "--mode", "vit", "--steps", "10"}).code, kSuccess);
  ASSERT_EQ(run_cli({"init", "--nx", "2", "--J", "1", "--out", path("m.json"), "--input-out", path("u.json")}).code,
            kSuccess);
  const json u = read_json_file(path("u.json"));
  write_json_file(path("d.json"), json{{"loss", "mse"}, {"pairs", {{{"input", u}, {"target", u}}}}});
  const CliRun r = run_cli({"train", "--model", path("m.json"), "--data", path("d.json"), "--steps", "5", "--train-norms"});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  EXPECT_EQ(json::parse(r.out).at("loss_curve").size(), 6u);
}

TEST_F(CliTest, DivergenceExitsWithFailure) {
  // Normalized outputs cannot reach targets this far away: the loss starts above the guard.
  ASSERT_EQ(run_cli({"init", "--nx", "2", "--J", "1", "--out", path("m.json"), "--input-out", path("u.json")}).code,
            kSuccess);
  const json far = tensor_to_json(Matrix::filled(2, 4, 1e4));
  write_json_file(path("d.json"), json{{"pairs", {{{"input", read_json_file(path("u.json"))}, {"target", far}}}}});
  const CliRun r = run_cli({"train", "--model", path("m.json"), "--data", path("d.json"), "--steps", "3"});
  EXPECT_EQ(r.code, kVerificationFailed);
  EXPECT_NE(r.err.find("divergence"), std::string::npos) << r.err;
}

TEST_F(CliTest, RerunsAreBitIdentical) {
  const std::vector<std::vector<std::string>> commands = {
      {"verify", "--seed", "3", "--trials", "5", "--samples", "200"},
      {"converge"},
      {"train", "--seed", "7", "--steps", "10"},
      {"init", "--seed", "9", "--mode", "cvt", "--patch-grid", "2", "2"},
  };
  for (const auto& c : commands) {
    const CliRun a = run_cli(c);
    const CliRun b = run_cli(c);
    EXPECT_EQ(a.code, b.code) << c[0];
    EXPECT_EQ(a.out, b.out) << c[0];
    EXPECT_FALSE(a.out.empty()) << c[0];
  }
}

}  // namespace
}  // namespace opsplit::cli
