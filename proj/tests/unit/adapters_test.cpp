#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "opsplit/conv_embed.hpp"
#include "opsplit/random.hpp"
#include "opsplit/splitting.hpp"
#include "opsplit/vit.hpp"

namespace opsplit {
namespace {

TEST(VitPre, IdentityEmbeddingStacksClassToken) {
  const VitParams p{Matrix::identity(3), {7, 8, 9}, Matrix::identity(3)};
  EXPECT_EQ(vit_pre(Matrix::from_rows({{1, 2, 3}}), p), Matrix::from_rows({{7, 8, 9}, {1, 2, 3}}));
  EXPECT_EQ(vit_pre(Matrix(2, 3), p), Matrix::from_rows({{7, 8, 9}, {0, 0, 0}, {0, 0, 0}}));
}

TEST(VitPre, HandProduct) {
  const VitParams p{Matrix::from_rows({{1, 0}, {0, 2}}), {5, 5}, Matrix(2, 1)};
  EXPECT_EQ(vit_pre(Matrix::from_rows({{1, 2}}), p), Matrix::from_rows({{5, 5}, {1, 4}}));
  EXPECT_THROW(vit_pre(Matrix(1, 3), p), DimensionError);
}

TEST(VitPost, SelectsAndProjectsTheFirstRow) {
  const Matrix u = Matrix::from_rows({{1, 2}, {30, 40}});
  EXPECT_EQ(vit_post(u, {Matrix(1, 2), {0, 0}, Matrix::identity(2)}), (std::vector<double>{1, 2}));
  EXPECT_EQ(vit_post(u, {Matrix(1, 2), {0, 0}, Matrix::from_rows({{1}, {1}})}), (std::vector<double>{3}));
  EXPECT_EQ(vit_post(Matrix::from_rows({{0, 0}, {1, 1}}), {Matrix(1, 2), {0, 0}, Matrix::identity(2)}),
            (std::vector<double>{0, 0}));
  EXPECT_EQ(vit_post(u, {Matrix(1, 2), {0, 0}, Matrix(2, 1)}), (std::vector<double>{0}));
}

TEST(VitForward, ZeroBlockWithIdentityHeadReturnsNormalizedClassRow) {
  Rng rng(1);
  ModelShape shape;
  shape.n_x = 3;
  shape.n_y = 4;
  ModelParams m = random_model(shape, rng);
  auto& b = m.blocks[0];
  b.attn = SingleHeadWeights{Matrix(4, 4), Matrix(4, 4), Matrix(4, 4)};
  for (auto& layer : b.ffn) {
    layer.w = Matrix(4, 4);
    layer.b.assign(3, 0.0);
  }
  const VitParams vit{random_matrix(5, 4, rng), random_vector(4, rng), Matrix::identity(4)};
  const Matrix patches = random_matrix(2, 5, rng);
  const Matrix state = propagate(vit_pre(patches, vit), m);
  const auto out = vit_forward(patches, vit, m);
  ASSERT_EQ(out.size(), 4u);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(out[j], state(0, j));
}

TEST(VitForward, ManualCompositionIsBitwiseEqual) {
  Rng rng(2);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  for (int trial = 0; trial < 20; ++trial) {
    ModelShape shape;
    shape.n_x = 1 + dim(rng);
    shape.n_y = dim(rng);
    shape.blocks = 1 + trial % 2;
    const ModelParams m = random_model(shape, rng);
    const VitParams vit = random_vit(dim(rng), shape.n_y, dim(rng), rng);
    const Matrix patches = random_matrix(shape.n_x - 1, vit.patch_dim(), rng);
    Matrix u = vit_pre(patches, vit);
    for (const auto& block : m.blocks) u = block_step(u, block, m.mode, m.options).output;
    EXPECT_EQ(vit_forward(patches, vit, m), vit_post(u, vit));
  }
}

TEST(ConvTokenEmbed, ZeroDeltaAndAveragingKernels) {
  Rng rng(3);
  const Matrix u0 = random_matrix(2, 9, rng);
  ConvTokenEmbedParams p{{3, 3}, Matrix(3, 3), {0, 0}};
  EXPECT_EQ(conv_token_embed_substep(u0, p), u0);
  p.kernel(1, 1) = 1.0;
  EXPECT_EQ(conv_token_embed_substep(u0, p), 2.0 * u0);

  const double c = 0.7;
  p.kernel = Matrix::filled(3, 3, 1.0 / 9.0);
  const Matrix out = conv_token_embed_substep(Matrix::filled(1, 9, c), {p.grid, p.kernel, {0}});
  EXPECT_NEAR(out(0, 4), 2 * c, 1e-15);      // interior
  EXPECT_NEAR(out(0, 0), c + 4 * c / 9, 1e-15);  // corner
  EXPECT_NEAR(out(0, 1), c + 6 * c / 9, 1e-15);  // edge
}

TEST(ConvTokenEmbed, BiasPerTokenAndValidation) {
  const ConvTokenEmbedParams p{{1, 2}, Matrix(1, 1), {1, -2}};
  EXPECT_EQ(conv_token_embed_substep(Matrix(2, 2), p), Matrix::from_rows({{1, 1}, {-2, -2}}));
  EXPECT_THROW(conv_token_embed_substep(Matrix(3, 2), p), DimensionError);
  EXPECT_THROW(conv_token_embed_substep(Matrix(2, 3), p), DimensionError);
  EXPECT_THROW((ConvTokenEmbedParams{{1, 2}, Matrix(2, 2), {0, 0}}.validate(2, 2)), ConfigError);
}

class PgmTest : public ::testing::Test {
 protected:
  std::filesystem::path dir_ = std::filesystem::temp_directory_path() / "opsplit_pgm_test";
  void SetUp() override { std::filesystem::create_directories(dir_); }
  void TearDown() override { std::filesystem::remove_all(dir_); }
};

TEST_F(PgmTest, ReadsBinaryAndAsciiAndCutsPatches) {
  const auto bin = dir_ / "a.pgm";
  {
    std::ofstream f(bin, std::ios::binary);
    f << "P5\n# comment\n4 2\n255\n";
    const unsigned char px[] = {0, 51, 102, 153, 204, 255, 0, 255};
    f.write(reinterpret_cast<const char*>(px), sizeof px);
  }
  const GrayImage img = read_pgm(bin);
  EXPECT_EQ(img.width, 4u);
  EXPECT_EQ(img.height, 2u);
  EXPECT_DOUBLE_EQ(img.pixels[1], 0.2);
  EXPECT_DOUBLE_EQ(img.pixels[5], 1.0);

  const Matrix patches = extract_patches(img, 2);
  EXPECT_EQ(patches.rows(), 2u);
  EXPECT_EQ(patches.cols(), 4u);
  EXPECT_DOUBLE_EQ(patches(0, 2), 0.8);  // first patch, second row, first column
  EXPECT_DOUBLE_EQ(patches(1, 0), 0.4);

  const auto ascii = dir_ / "b.pgm";
  std::ofstream(ascii) << "P2\n2 1\n10\n0 10\n";
  EXPECT_EQ(read_pgm(ascii).pixels, (std::vector<double>{0.0, 1.0}));

  std::ofstream(dir_ / "c.pgm") << "P6\n1 1\n255\n";
  EXPECT_THROW(read_pgm(dir_ / "c.pgm"), std::runtime_error);
  EXPECT_THROW(read_pgm(dir_ / "missing.pgm"), std::runtime_error);
  EXPECT_THROW(extract_patches(img, 3), DimensionError);
}

}  // namespace
}  // namespace opsplit
