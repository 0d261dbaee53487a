#include "opsplit/splitting.hpp"

#include <type_traits>

namespace opsplit {

std::vector<std::string> substep_labels(Mode mode, std::size_t depth, SkipMode skip) {
  std::vector<std::string> labels;
  if (mode == Mode::cvt) {
    labels.emplace_back("conv_embed");
    labels.emplace_back("conv_norm");
  }
  labels.emplace_back("attention");
  labels.emplace_back("norm1");
  for (std::size_t j = 1; j <= depth; ++j) labels.push_back("ffn_" + std::to_string(j));
  labels.emplace_back(skip == SkipMode::average ? "skip_avg" : "skip_add");
  labels.emplace_back("norm2");
  return labels;
}

GridFunction apply_attention(const GridFunction& u0, const BlockParams& p, const StepOptions& opts) {
  const std::size_t dim = scale_dim(opts.scale, u0.rows(), u0.cols());
  return std::visit(
      [&](const auto& w) -> GridFunction {
        using W = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<W, SingleHeadWeights>) {
          return attention_substep(u0, w, dim);
        } else if constexpr (std::is_same_v<W, MultiHeadWeights>) {
          return multihead_substep(u0, w, dim);
        } else {
          return conv_attention_substep(u0, w, dim);
        }
      },
      p.attn);
}

BlockResult block_step(const GridFunction& u0, const BlockParams& p, Mode mode,
                       const StepOptions& opts) {
  p.validate(mode, u0.rows(), u0.cols());

  BlockResult r{u0, {}};
  auto& states = r.trace.states;
  states.reserve(p.depth() + 7);
  states.push_back({"input", u0});
  auto record = [&states](std::string label, GridFunction u) -> const GridFunction& {
    states.push_back({std::move(label), std::move(u)});
    return states.back().state;
  };

  GridFunction cur = u0;
  if (mode == Mode::cvt) {
    cur = record("conv_embed", conv_token_embed_substep(cur, *p.conv_embed));
    cur = record("conv_norm", project_s1(cur, p.norm1));
  }
  cur = record("attention", apply_attention(cur, p, opts));
  const GridFunction normalized = record("norm1", project_s1(cur, p.norm1));
  cur = normalized;
  for (std::size_t j = 0; j < p.ffn.size(); ++j) {
    cur = record("ffn_" + std::to_string(j + 1), ffn_substep(cur, p.ffn[j]));
  }
  if (opts.skip == SkipMode::average) {
    cur = record("skip_avg", 0.5 * (cur + normalized));
  } else {
    cur = record("skip_add", cur + normalized);
  }
  r.output = record("norm2", project_s1(cur, p.norm2));
  return r;
}

GridFunction propagate(const GridFunction& f, const ModelParams& m) {
  return propagate_traced(f, m).output;
}

BlockResult propagate_traced(const GridFunction& f, const ModelParams& m) {
  m.validate();
  require_shape(f, m.n_x, m.n_y, "propagate input");
  BlockResult total{f, {}};
  total.trace.states.push_back({"input", f});
  GridFunction cur = f;
  for (const auto& block : m.blocks) {
    BlockResult step = block_step(cur, block, m.mode, m.options);
    for (std::size_t i = 1; i < step.trace.states.size(); ++i) {
      total.trace.states.push_back(std::move(step.trace.states[i]));
    }
    cur = std::move(step.output);
  }
  total.output = std::move(cur);
  return total;
}

}  // namespace opsplit
