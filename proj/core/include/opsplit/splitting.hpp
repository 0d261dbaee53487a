#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "opsplit/model.hpp"

namespace opsplit {

struct TraceEntry {
  std::string label;
  GridFunction state;
};

/// Every intermediate state u^{k/M} of one or more block steps, in order,
/// starting with the input.
struct SplitTrace {
  std::vector<TraceEntry> states;
};

/// Labels of the substeps of one block, in execution order (input excluded):
///   [conv_embed, conv_norm,] attention, norm1, ffn_1 .. ffn_J, skip_avg|skip_add, norm2
std::vector<std::string> substep_labels(Mode mode, std::size_t depth, SkipMode skip);

struct BlockResult {
  GridFunction output;
  SplitTrace trace;
};

/// One Lie step of the splitting scheme with unit time step: each substep
/// solves its sub-problem exactly, in the order given by substep_labels.
BlockResult block_step(const GridFunction& u0, const BlockParams& p, Mode mode,
                       const StepOptions& opts = {});

/// Runs the attention substep matching the weight variant held by `p`.
GridFunction apply_attention(const GridFunction& u0, const BlockParams& p, const StepOptions& opts);

/// Composition of all block steps; f must be n_x x n_y.
GridFunction propagate(const GridFunction& f, const ModelParams& m);

/// Same as propagate, also returning the concatenated trace (the input
/// appears once, then M labeled states per block).
BlockResult propagate_traced(const GridFunction& f, const ModelParams& m);

}  // namespace opsplit
