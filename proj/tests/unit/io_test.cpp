#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "opsplit/io.hpp"
#include "opsplit/random.hpp"
#include "opsplit/training.hpp"

namespace opsplit {
namespace {

TEST(TensorJson, RoundTripAndLayout) {
  const Matrix m = Matrix::from_rows({{1, 2, 3}, {4, 5, 6.5}});
  const json j = tensor_to_json(m);
  EXPECT_EQ(j.at("shape"), json::array({2, 3}));
  EXPECT_EQ(j.at("data").at(5), 6.5);
  EXPECT_EQ(tensor_from_json(j, "t"), m);
  EXPECT_EQ(vector_from_json(vector_to_json(std::vector<double>{1, -2}), "v"), (std::vector<double>{1, -2}));
}

TEST(TensorJson, RankOneOnlyWhenAllowed) {
  const json v = vector_to_json(std::vector<double>{1, 2});
  EXPECT_THROW(tensor_from_json(v, "t"), FormatError);
  EXPECT_EQ(tensor_from_json(v, "t", true), Matrix::from_rows({{1, 2}}));
}

TEST(TensorJson, PreciseErrors) {
  try {
    tensor_from_json(json{{"shape", {2, 2}}, {"data", {1, 2, 3}}}, "input");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("input"), std::string::npos);
  }
  EXPECT_THROW(tensor_from_json(json{{"data", {1}}}, "t"), FormatError);
  EXPECT_THROW(tensor_from_json(json{{"shape", {1, 1}}, {"data", {"x"}}}, "t"), FormatError);
  EXPECT_THROW(tensor_from_json(json{{"shape", {0, 1}}, {"data", json::array()}}, "t"), FormatError);
}

TEST(NetworkJson, RoundTripsEveryMode) {
  Rng rng(1);
  for (Mode mode : {Mode::vanilla, Mode::multihead, Mode::cvt}) {
    ModelShape shape;
    shape.mode = mode;
    shape.blocks = 2;
    shape.options.skip = SkipMode::add;
    shape.options.scale = ScoreScale::tokens;
    Network net{random_model(shape, rng), std::nullopt};
    net.model.blocks[1].norm2 = {0.5, 2.0, 1e-10};
    if (mode == Mode::vanilla) net.vit = random_vit(3, 4, 2, rng);
    const json j = network_to_json(net);
    EXPECT_EQ(j.at("J"), 2);
    const Network back = network_from_json(j);
    EXPECT_EQ(network_to_json(back), j);
    EXPECT_EQ(flatten(back, {true}).values, flatten(net, {true}).values);
  }
}

TEST(NetworkJson, RejectsInconsistentModels) {
  Rng rng(2);
  const Network net{random_model({}, rng), std::nullopt};
  json j = network_to_json(net);
  j["J"] = 3;
  EXPECT_THROW(network_from_json(j), FormatError);
  j = network_to_json(net);
  j["n_y"] = 5;
  EXPECT_THROW(network_from_json(j), FormatError);
  j = network_to_json(net);
  j["mode"] = "recurrent";
  EXPECT_THROW(network_from_json(j), FormatError);
  j = network_to_json(net);
  j["blocks"][0].erase("attn");
  EXPECT_THROW(network_from_json(j), FormatError);
  EXPECT_THROW(network_from_json(json::array()), FormatError);
}

TEST(DatasetJson, RoundTripWithVectorTargets) {
  const json j = {{"loss", "cross_entropy"},
                  {"pairs", {{{"input", tensor_to_json(Matrix::from_rows({{1, 2}}))},
                              {"target", vector_to_json(std::vector<double>{0, 1})}}}}};
  const Dataset d = dataset_from_json(j);
  EXPECT_EQ(d.loss, LossKind::cross_entropy);
  EXPECT_EQ(d.pairs[0].target, Matrix::from_rows({{0, 1}}));
  EXPECT_EQ(dataset_from_json(dataset_to_json(d)).pairs[0].input, d.pairs[0].input);
  EXPECT_THROW(dataset_from_json(json{{"pairs", {{{"input", tensor_to_json(Matrix(1, 1))}}}}}), FormatError);
}

TEST(Files, WriteReadAndFailures) {
  const auto path = std::filesystem::temp_directory_path() / "opsplit_io_test.json";
  write_json_file(path, json{{"a", 1}});
  std::ifstream in(path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(text, "{\n  \"a\": 1\n}\n");
  EXPECT_EQ(read_json_file(path), (json{{"a", 1}}));
  std::ofstream(path) << "{not json";
  EXPECT_THROW(read_json_file(path), FormatError);
  std::filesystem::remove(path);
  EXPECT_THROW(read_json_file(path), FormatError);
}

TEST(TraceJson, LabelsAndTensors) {
  SplitTrace t{{{"input", Matrix(1, 1)}, {"norm2", Matrix::filled(1, 1, 2.0)}}};
  const json j = trace_to_json(t);
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[1].at("label"), "norm2");
  EXPECT_EQ(j[1].at("tensor").at("data")[0], 2.0);
}

}  // namespace
}  // namespace opsplit
