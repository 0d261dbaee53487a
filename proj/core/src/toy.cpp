#include "opsplit/toy.hpp"

#include <algorithm>

#include "opsplit/random.hpp"

namespace opsplit {

namespace {

Network draw_network(const ToyConfig& cfg, Rng& rng) {
  ModelShape shape;
  shape.mode = Mode::vanilla;
  shape.n_x = cfg.n_x;
  shape.n_y = cfg.n_y;
  shape.depth = cfg.depth;
  shape.blocks = cfg.blocks;
  Network net{random_model(shape, rng), std::nullopt};
  if (cfg.vit) net.vit = random_vit(cfg.patch_dim, cfg.n_y, cfg.classes, rng);
  return net;
}

}  // namespace

ToyTask make_toy_task(const ToyConfig& cfg, std::uint64_t seed) {
  if (cfg.vit && cfg.n_x < 2) throw ConfigError("toy ViT task needs n_x >= 2 (class token + patches)");
  Rng rng(seed);
  ToyTask task;
  task.teacher = draw_network(cfg, rng);
  task.student = draw_network(cfg, rng);
  task.data.loss = cfg.vit ? LossKind::cross_entropy : LossKind::mse;

  for (std::size_t i = 0; i < cfg.pairs; ++i) {
    Matrix input = cfg.vit ? random_matrix(cfg.n_x - 1, cfg.patch_dim, rng)
                           : random_matrix(cfg.n_x, cfg.n_y, rng);
    Matrix out = network_output(task.teacher, input);
    if (cfg.vit) {
      // One-hot label of the teacher's top logit.
      const auto logits = out.row(0);
      const auto best = static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
      Matrix label(1, cfg.classes);
      label(0, best) = 1.0;
      out = std::move(label);
    }
    task.data.pairs.push_back({std::move(input), std::move(out)});
  }
  return task;
}

}  // namespace opsplit
