#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "opsplit/io.hpp"
#include "opsplit/model.hpp"

namespace opsplit {

enum class LossKind { mse, cross_entropy };

std::string to_string(LossKind k);
LossKind parse_loss_kind(const std::string& s);

struct Sample {
  /// n_x x n_y state, or (n_x - 1) x D patches when the network has ViT adapters.
  Matrix input;
  /// Same shape as the network output: n_x x n_y, or 1 x d.
  Matrix target;
};

struct Dataset {
  std::vector<Sample> pairs;
  LossKind loss = LossKind::mse;
};

/// {"loss": "mse", "pairs": [{"input": tensor, "target": tensor}, ...]}.
/// Rank-1 targets are read as 1 x d.
Dataset dataset_from_json(const json& j);
json dataset_to_json(const Dataset& d);

/// Network output for one input: the propagated state, or the 1 x d head
/// output when ViT adapters are present.
Matrix network_output(const Network& net, const Matrix& input);

/// Mean per-pair loss. mse averages squared errors over entries;
/// cross_entropy is softmax cross-entropy of the head output against a
/// target distribution (ViT networks only).
double loss(const Network& net, const Dataset& d);

struct FlattenOptions {
  /// Also expose sigma1/sigma2 of every norm target.
  bool include_norms = false;
};

struct ParamGroup {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// Every trainable scalar of a network as one vector, plus the names of the
/// contiguous groups it is made of.
struct FlatParams {
  std::vector<double> values;
  std::vector<ParamGroup> groups;

  /// Name of the parameter at flat index i, e.g. "blocks[0].ffn[1].w[5]".
  std::string describe(std::size_t i) const;
};

FlatParams flatten(const Network& net, FlattenOptions opts = {});

/// Writes `values` back into `net`; the length must match flatten(net, opts).
void unflatten(std::span<const double> values, Network& net, FlattenOptions opts = {});

/// Loss evaluated to a non-finite value while differentiating.
class NonFiniteLoss : public std::runtime_error {
 public:
  NonFiniteLoss(std::size_t index, const std::string& what)
      : std::runtime_error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Central differences (L(p + h e_i) - L(p - h e_i)) / 2h for every flat
/// coordinate. The returned groups mirror flatten(net, opts).
FlatParams fd_gradient(const Network& net, const Dataset& d, double h = 1e-5,
                       FlattenOptions opts = {});

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  std::size_t steps = 200;
  double lr = 0.1;
  double fd_step = 1e-5;
  FlattenOptions flatten;
  /// Desk-scale guard on the number of trainable scalars.
  std::size_t max_params = 2000;
  double divergence_threshold = 1e6;
};

struct TrainResult {
  Network network;
  /// Loss before the first step and after each step (steps + 1 entries).
  std::vector<double> loss_curve;
};

/// Plain gradient descent with a fixed learning rate on finite-difference
/// gradients.
TrainResult train(const Network& net, const Dataset& d, const TrainConfig& cfg);

}  // namespace opsplit
