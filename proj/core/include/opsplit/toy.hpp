#pragma once

#include <cstddef>
#include <cstdint>

#include "opsplit/model.hpp"
#include "opsplit/training.hpp"

namespace opsplit {

/// Teacher-student regression: targets come from a frozen random teacher of
/// the same architecture, so a zero-loss student exists.
struct ToyTask {
  Network teacher;
  Network student;
  Dataset data;
};

struct ToyConfig {
  std::size_t n_x = 2;
  std::size_t n_y = 4;
  std::size_t depth = 1;
  std::size_t blocks = 1;
  std::size_t pairs = 8;
  /// ViT classification instead of state regression: n_x - 1 patches of
  /// length patch_dim, `classes` outputs, cross-entropy loss.
  bool vit = false;
  std::size_t patch_dim = 4;
  std::size_t classes = 2;
};

ToyTask make_toy_task(const ToyConfig& cfg, std::uint64_t seed);

}  // namespace opsplit
