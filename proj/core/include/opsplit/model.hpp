#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "opsplit/attention.hpp"
#include "opsplit/conv_embed.hpp"
#include "opsplit/feedforward.hpp"
#include "opsplit/grid.hpp"
#include "opsplit/projection.hpp"

namespace opsplit {

enum class Mode { vanilla, multihead, cvt };

/// How the FFN output is recombined with the post-attention normalized state.
/// `average` is the relaxation (u_a + u_b) / 2; `add` is the plain residual sum.
enum class SkipMode { average, add };

std::string to_string(Mode m);
std::string to_string(SkipMode m);
std::string to_string(ScoreScale s);
Mode parse_mode(const std::string& s);
SkipMode parse_skip_mode(const std::string& s);
ScoreScale parse_score_scale(const std::string& s);

using AttentionWeights = std::variant<SingleHeadWeights, MultiHeadWeights, ConvHeadWeights>;

/// Control variables of one time step.
struct BlockParams {
  AttentionWeights attn;
  NormTarget norm1;
  NormTarget norm2;
  std::vector<FfnLayerParams> ffn;
  /// Present only in CvT mode.
  std::optional<ConvTokenEmbedParams> conv_embed;

  std::size_t depth() const noexcept { return ffn.size(); }
  void validate(Mode mode, std::size_t n_x, std::size_t n_y) const;
};

/// Flags shared by every block of a model.
struct StepOptions {
  ScoreScale scale = ScoreScale::embedding;
  SkipMode skip = SkipMode::average;
};

/// The full control trajectory: one BlockParams per time step.
struct ModelParams {
  Mode mode = Mode::vanilla;
  std::size_t n_x = 0;
  std::size_t n_y = 0;
  StepOptions options;
  std::vector<BlockParams> blocks;

  /// FFN depth J (uniform across blocks once validated).
  std::size_t depth() const;
  /// Substeps per block: 4 + J, or 6 + J in CvT mode.
  std::size_t substeps() const;
  void validate() const;
};

/// Pre/post-processing around the propagator for patch classification.
struct VitParams {
  Kernel embed;                     // D x n_y
  std::vector<double> class_token;  // length n_y
  Kernel head;                      // n_y x d

  std::size_t patch_dim() const noexcept { return embed.rows(); }
  std::size_t output_dim() const noexcept { return head.cols(); }
  void validate(std::size_t n_y) const;
};

/// A model plus optional ViT adapters; this is what model files hold.
struct Network {
  ModelParams model;
  std::optional<VitParams> vit;

  void validate() const;
};

}  // namespace opsplit
