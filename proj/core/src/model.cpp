#include "opsplit/model.hpp"

namespace opsplit {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::vanilla:
      return "vanilla";
    case Mode::multihead:
      return "multihead";
    case Mode::cvt:
      return "cvt";
  }
  return "vanilla";
}

std::string to_string(SkipMode m) { return m == SkipMode::add ? "add" : "average"; }

std::string to_string(ScoreScale s) {
  switch (s) {
    case ScoreScale::embedding:
      return "embedding";
    case ScoreScale::unscaled:
      return "unscaled";
    case ScoreScale::tokens:
      return "tokens";
  }
  return "embedding";
}

Mode parse_mode(const std::string& s) {
  if (s == "vanilla") return Mode::vanilla;
  if (s == "multihead") return Mode::multihead;
  if (s == "cvt") return Mode::cvt;
  throw ConfigError("unknown mode '" + s + "' (expected vanilla, multihead or cvt)");
}

SkipMode parse_skip_mode(const std::string& s) {
  if (s == "average") return SkipMode::average;
  if (s == "add") return SkipMode::add;
  throw ConfigError("unknown skip mode '" + s + "' (expected average or add)");
}

ScoreScale parse_score_scale(const std::string& s) {
  if (s == "embedding") return ScoreScale::embedding;
  if (s == "unscaled") return ScoreScale::unscaled;
  if (s == "tokens") return ScoreScale::tokens;
  throw ConfigError("unknown score scale '" + s + "' (expected embedding, unscaled or tokens)");
}

void BlockParams::validate(Mode mode, std::size_t n_x, std::size_t n_y) const {
  switch (mode) {
    case Mode::vanilla: {
      const auto* w = std::get_if<SingleHeadWeights>(&attn);
      if (w == nullptr) throw ConfigError("vanilla block needs single-head attention weights");
      if (w->dim() != n_y) throw DimensionError("attention weights do not match n_y");
      break;
    }
    case Mode::multihead: {
      const auto* w = std::get_if<MultiHeadWeights>(&attn);
      if (w == nullptr) throw ConfigError("multihead block needs a list of heads");
      if (w->dim() != n_y) throw DimensionError("attention heads do not match n_y");
      break;
    }
    case Mode::cvt: {
      const auto* w = std::get_if<ConvHeadWeights>(&attn);
      if (w == nullptr) throw ConfigError("cvt block needs convolutional attention kernels");
      w->validate(n_y);
      if (!conv_embed) throw ConfigError("cvt block needs a convolutional token embedding");
      conv_embed->validate(n_x, n_y);
      break;
    }
  }
  if (mode != Mode::cvt && conv_embed) {
    throw ConfigError("convolutional token embedding is only valid in cvt mode");
  }
  norm1.validate();
  norm2.validate();
  if (ffn.empty()) throw ConfigError("block needs at least one feedforward layer");
  for (const auto& layer : ffn) layer.validate(n_x, n_y);
}

std::size_t ModelParams::depth() const {
  if (blocks.empty()) throw ConfigError("model has no blocks");
  return blocks.front().depth();
}

std::size_t ModelParams::substeps() const {
  return (mode == Mode::cvt ? 6 : 4) + depth();
}

void ModelParams::validate() const {
  if (n_x == 0 || n_y == 0) throw DimensionError("model dimensions must be positive");
  if (blocks.empty()) throw ConfigError("model needs at least one block");
  const std::size_t j = blocks.front().depth();
  for (const auto& b : blocks) {
    b.validate(mode, n_x, n_y);
    if (b.depth() != j) throw ConfigError("all blocks must share the same feedforward depth");
  }
}

void VitParams::validate(std::size_t n_y) const {
  if (embed.cols() != n_y) throw DimensionError("vit embedding must have n_y columns");
  if (class_token.size() != n_y) throw DimensionError("vit class token must have length n_y");
  if (head.rows() != n_y) throw DimensionError("vit head must have n_y rows");
}

void Network::validate() const {
  model.validate();
  if (vit) vit->validate(model.n_y);
}

}  // namespace opsplit
