#include <cmath>

#include <gtest/gtest.h>

#include "opsplit/random.hpp"
#include "opsplit/reference.hpp"
#include "opsplit/splitting.hpp"
#include "support/oracles.hpp"

namespace opsplit {
namespace {

BlockParams zero_block(std::size_t n_x, std::size_t n_y, std::size_t depth) {
  BlockParams p{SingleHeadWeights{Matrix(n_y, n_y), Matrix(n_y, n_y), Matrix(n_y, n_y)}, {}, {}, {}, {}};
  for (std::size_t j = 0; j < depth; ++j) p.ffn.push_back({Matrix(n_y, n_y), std::vector<double>(n_x, 0.0)});
  return p;
}

void expect_trace_replays(const Matrix& u0, const BlockParams& p, Mode mode, const StepOptions& opts) {
  const BlockResult r = block_step(u0, p, mode, opts);
  const auto replay = oracle::replay_block(u0, p, mode, opts);
  ASSERT_EQ(r.trace.states.size(), replay.size());
  for (std::size_t i = 0; i < replay.size(); ++i) EXPECT_EQ(r.trace.states[i].state, replay[i]) << i;
  EXPECT_EQ(r.output, replay.back());
}

TEST(SubstepLabels, Schedules) {
  EXPECT_EQ(substep_labels(Mode::vanilla, 2, SkipMode::average),
            (std::vector<std::string>{"attention", "norm1", "ffn_1", "ffn_2", "skip_avg", "norm2"}));
  EXPECT_EQ(substep_labels(Mode::cvt, 1, SkipMode::add),
            (std::vector<std::string>{"conv_embed", "conv_norm", "attention", "norm1", "ffn_1", "skip_add", "norm2"}));
}

TEST(BlockStep, ZeroBlockReplaysThroughStandaloneCalls) {
  Rng rng(0);
  const Matrix u0 = random_matrix(3, 5, rng);
  const BlockParams p = zero_block(3, 5, 2);
  expect_trace_replays(u0, p, Mode::vanilla, {});
  // With zero weights attention is the identity and the block reduces to
  // norms, ReLUs and the average.
  const Matrix a = project_s1(u0, {});
  const Matrix f = project_s2(project_s2(a));
  EXPECT_EQ(block_step(u0, p, Mode::vanilla).output, project_s1(0.5 * (f + a), {}));
}

TEST(BlockStep, RandomBlocksReplayInEveryMode) {
  Rng rng(1);
  for (Mode mode : {Mode::vanilla, Mode::multihead, Mode::cvt}) {
    for (SkipMode skip : {SkipMode::average, SkipMode::add}) {
      ModelShape shape;
      shape.mode = mode;
      shape.options.skip = skip;
      const ModelParams m = random_model(shape, rng);
      expect_trace_replays(random_matrix(4, 4, rng), m.blocks[0], mode, m.options);
    }
  }
}

TEST(BlockStep, TraceLengthIsMPlusOne) {
  Rng rng(2);
  for (std::size_t depth : {1u, 2u, 3u}) {
    ModelShape shape;
    shape.depth = depth;
    const ModelParams m = random_model(shape, rng);
    EXPECT_EQ(block_step(random_matrix(4, 4, rng), m.blocks[0], m.mode).trace.states.size(), 4 + depth + 1);
    shape.mode = Mode::cvt;
    const ModelParams c = random_model(shape, rng);
    EXPECT_EQ(block_step(random_matrix(4, 4, rng), c.blocks[0], c.mode).trace.states.size(), 6 + depth + 1);
  }
}

TEST(BlockStep, MatchesReferenceEncoderBlock) {
  Rng rng(3);
  ModelShape shape;
  shape.n_x = 5;
  shape.n_y = 8;
  const ModelParams m = random_model(shape, rng);
  const Matrix u0 = random_matrix(5, 8, rng);
  const Matrix ref = reference::std_encoder_block(u0, reference::map_to_standard(m.blocks[0]), SkipMode::average, 8);
  EXPECT_LE(max_abs_diff(block_step(u0, m.blocks[0], m.mode).output, ref), 1e-12);
}

TEST(BlockStep, OutputRowsSatisfyTheFinalNorm) {
  Rng rng(4);
  BlockParams p = zero_block(3, 4, 2);
  p.norm2 = {0.25, 1.5, 1e-12};
  const Matrix out = block_step(random_matrix(3, 4, rng), p, Mode::vanilla).output;
  for (std::size_t r = 0; r < 3; ++r) {
    const RowStats st = row_stats(out.row(r));
    EXPECT_NEAR(st.mean, 0.25, 1e-12);
    EXPECT_NEAR(st.variance, 2.25, 1e-10);
  }
}

TEST(BlockStep, SkipModesDifferBeforeTheFinalNorm) {
  Rng rng(7);
  ModelParams m = random_model({}, rng);
  const Matrix u = random_matrix(4, 4, rng);
  const auto avg = block_step(u, m.blocks[0], m.mode, {ScoreScale::embedding, SkipMode::average}).trace.states;
  const auto add = block_step(u, m.blocks[0], m.mode, {ScoreScale::embedding, SkipMode::add}).trace.states;
  const std::size_t skip = avg.size() - 2;
  EXPECT_EQ(avg[skip].label, "skip_avg");
  EXPECT_EQ(add[skip].label, "skip_add");
  EXPECT_GT(max_abs_diff(avg[skip].state, add[skip].state), 1e-6);
  ASSERT_EQ(add[2].label, "norm1");
  EXPECT_EQ(add[skip].state, add[skip - 1].state + add[2].state);
}

TEST(BlockStep, RejectsModeMismatch) {
  const BlockParams p = zero_block(2, 4, 1);
  EXPECT_THROW(block_step(Matrix(2, 4), p, Mode::cvt), ConfigError);
  EXPECT_THROW(block_step(Matrix(2, 3), p, Mode::vanilla), DimensionError);
}

TEST(Propagate, ComposesBlockSteps) {
  Rng rng(5);
  ModelShape shape;
  shape.blocks = 1;
  ModelParams m = random_model(shape, rng);
  const Matrix f = random_matrix(4, 4, rng);
  EXPECT_EQ(propagate(f, m), block_step(f, m.blocks[0], m.mode).output);

  m.blocks.push_back(m.blocks[0]);
  const Matrix once = block_step(f, m.blocks[0], m.mode).output;
  EXPECT_EQ(propagate(f, m), block_step(once, m.blocks[0], m.mode).output);

  const BlockResult traced = propagate_traced(f, m);
  EXPECT_EQ(traced.output, propagate(f, m));
  EXPECT_EQ(traced.trace.states.size(), 2 * m.substeps() + 1);
  EXPECT_EQ(traced.trace.states.front().label, "input");
}

TEST(Propagate, SixBlocksMatchChainedReference) {
  Rng rng(6);
  ModelShape shape;
  shape.blocks = 6;
  shape.n_x = 5;
  shape.n_y = 6;
  const ModelParams m = random_model(shape, rng);
  const Matrix f = random_matrix(5, 6, rng);
  EXPECT_LE(max_abs_diff(propagate(f, m), reference::std_encoder_stack(f, m)), 1e-10);
}

}  // namespace
}  // namespace opsplit
