#include "opsplit/training.hpp"

#include <cmath>
#include <functional>

#include "opsplit/splitting.hpp"
#include "opsplit/vit.hpp"

namespace opsplit {

std::string to_string(LossKind k) { return k == LossKind::mse ? "mse" : "cross_entropy"; }

LossKind parse_loss_kind(const std::string& s) {
  if (s == "mse") return LossKind::mse;
  if (s == "cross_entropy") return LossKind::cross_entropy;
  throw ConfigError("unknown loss '" + s + "' (expected mse or cross_entropy)");
}

Dataset dataset_from_json(const json& j) {
  if (!j.is_object() || !j.contains("pairs") || !j.at("pairs").is_array()) {
    throw FormatError("dataset: expected an object with a 'pairs' array");
  }
  Dataset d;
  if (j.contains("loss")) {
    try {
      d.loss = parse_loss_kind(j.at("loss").get<std::string>());
    } catch (const ConfigError& e) {
      throw FormatError(std::string("dataset: ") + e.what());
    }
  }
  const json& pairs = j.at("pairs");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::string w = "dataset.pairs[" + std::to_string(i) + "]";
    if (!pairs[i].contains("input") || !pairs[i].contains("target")) {
      throw FormatError(w + ": needs 'input' and 'target'");
    }
    d.pairs.push_back({tensor_from_json(pairs[i].at("input"), w + ".input"),
                       tensor_from_json(pairs[i].at("target"), w + ".target", true)});
  }
  return d;
}

json dataset_to_json(const Dataset& d) {
  json pairs = json::array();
  for (const auto& s : d.pairs) pairs.push_back({{"input", tensor_to_json(s.input)}, {"target", tensor_to_json(s.target)}});
  return {{"loss", to_string(d.loss)}, {"pairs", pairs}};
}

Matrix network_output(const Network& net, const Matrix& input) {
  if (net.vit) {
    const auto out = vit_forward(input, *net.vit, net.model);
    return Matrix(1, out.size(), out);
  }
  return propagate(input, net.model);
}

namespace {

double pair_loss(const Matrix& out, const Matrix& target, LossKind kind) {
  if (out.rows() != target.rows() || out.cols() != target.cols()) {
    throw DimensionError("loss: output is " + std::to_string(out.rows()) + "x" +
                         std::to_string(out.cols()) + " but target is " +
                         std::to_string(target.rows()) + "x" + std::to_string(target.cols()));
  }
  const auto o = out.values();
  const auto t = target.values();
  if (kind == LossKind::mse) {
    double s = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) s += (o[i] - t[i]) * (o[i] - t[i]);
    return s / static_cast<double>(o.size());
  }
  // Cross-entropy per row against a target distribution.
  double total = 0.0;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    const auto orow = out.row(r);
    const auto trow = target.row(r);
    double peak = orow[0];
    for (double v : orow) peak = std::max(peak, v);
    double z = 0.0;
    for (double v : orow) z += std::exp(v - peak);
    const double log_z = std::log(z) + peak;
    for (std::size_t c = 0; c < orow.size(); ++c) total -= trow[c] * (orow[c] - log_z);
  }
  return total / static_cast<double>(out.rows());
}

// Calls f(name, pointer, count) for every trainable group in a fixed order.
void visit_params(Network& net, FlattenOptions opts,
                  const std::function<void(const std::string&, double*, std::size_t)>& f) {
  auto mat = [&](const std::string& name, Matrix& m) { f(name, m.values().data(), m.size()); };
  auto vec = [&](const std::string& name, std::vector<double>& v) { f(name, v.data(), v.size()); };
  auto head = [&](const std::string& p, Kernel& q, Kernel& k, Kernel& v) {
    mat(p + ".w_q", q);
    mat(p + ".w_k", k);
    mat(p + ".w_v", v);
  };

  for (std::size_t n = 0; n < net.model.blocks.size(); ++n) {
    BlockParams& b = net.model.blocks[n];
    const std::string p = "blocks[" + std::to_string(n) + "]";
    if (b.conv_embed) {
      mat(p + ".conv_embed.kernel", b.conv_embed->kernel);
      vec(p + ".conv_embed.bias", b.conv_embed->bias);
    }
    if (auto* w = std::get_if<SingleHeadWeights>(&b.attn)) {
      head(p + ".attn", w->w_q, w->w_k, w->w_v);
    } else if (auto* mh = std::get_if<MultiHeadWeights>(&b.attn)) {
      for (std::size_t h = 0; h < mh->heads.size(); ++h) {
        auto& hw = mh->heads[h];
        head(p + ".attn.heads[" + std::to_string(h) + "]", hw.w_q, hw.w_k, hw.w_v);
      }
    } else {
      auto& cw = std::get<ConvHeadWeights>(b.attn);
      head(p + ".attn", cw.w_q, cw.w_k, cw.w_v);
    }
    if (opts.include_norms) {
      f(p + ".norm1.sigma1", &b.norm1.sigma1, 1);
      f(p + ".norm1.sigma2", &b.norm1.sigma2, 1);
    }
    for (std::size_t j = 0; j < b.ffn.size(); ++j) {
      const std::string lp = p + ".ffn[" + std::to_string(j) + "]";
      mat(lp + ".w", b.ffn[j].w);
      vec(lp + ".b", b.ffn[j].b);
    }
    if (opts.include_norms) {
      f(p + ".norm2.sigma1", &b.norm2.sigma1, 1);
      f(p + ".norm2.sigma2", &b.norm2.sigma2, 1);
    }
  }
  if (net.vit) {
    mat("vit.embed", net.vit->embed);
    vec("vit.class_token", net.vit->class_token);
    mat("vit.head", net.vit->head);
  }
}

std::vector<double*> param_pointers(Network& net, FlattenOptions opts) {
  std::vector<double*> ptrs;
  visit_params(net, opts, [&](const std::string&, double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) ptrs.push_back(p + i);
  });
  return ptrs;
}

}  // namespace

double loss(const Network& net, const Dataset& d) {
  if (d.pairs.empty()) throw ConfigError("loss: dataset is empty");
  if (d.loss == LossKind::cross_entropy && !net.vit) {
    throw ConfigError("loss: cross_entropy needs a network with ViT head outputs");
  }
  double total = 0.0;
  for (const auto& s : d.pairs) total += pair_loss(network_output(net, s.input), s.target, d.loss);
  return total / static_cast<double>(d.pairs.size());
}

std::string FlatParams::describe(std::size_t i) const {
  for (const auto& g : groups) {
    if (i >= g.offset && i < g.offset + g.size) return g.name + "[" + std::to_string(i - g.offset) + "]";
  }
  return "#" + std::to_string(i);
}

FlatParams flatten(const Network& net, FlattenOptions opts) {
  Network copy = net;
  FlatParams flat;
  visit_params(copy, opts, [&](const std::string& name, double* p, std::size_t n) {
    flat.groups.push_back({name, flat.values.size(), n});
    flat.values.insert(flat.values.end(), p, p + n);
  });
  return flat;
}

void unflatten(std::span<const double> values, Network& net, FlattenOptions opts) {
  const auto ptrs = param_pointers(net, opts);
  if (ptrs.size() != values.size()) {
    throw DimensionError("unflatten: expected " + std::to_string(ptrs.size()) + " values, got " +
                         std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < ptrs.size(); ++i) *ptrs[i] = values[i];
}

FlatParams fd_gradient(const Network& net, const Dataset& d, double h, FlattenOptions opts) {
  if (!(h > 0.0)) throw ConfigError("fd_gradient: step h must be positive");
  FlatParams grad = flatten(net, opts);
  Network work = net;
  const auto ptrs = param_pointers(work, opts);
  for (std::size_t i = 0; i < ptrs.size(); ++i) {
    const double saved = *ptrs[i];
    *ptrs[i] = saved + h;
    const double up = loss(work, d);
    *ptrs[i] = saved - h;
    const double down = loss(work, d);
    *ptrs[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NonFiniteLoss(i, "fd_gradient: non-finite loss when perturbing " + grad.describe(i));
    }
    grad.values[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

TrainResult train(const Network& net, const Dataset& d, const TrainConfig& cfg) {
  net.validate();
  TrainResult r{net, {}};
  const auto ptrs = param_pointers(r.network, cfg.flatten);
  if (ptrs.size() > cfg.max_params) {
    throw ConfigError("train: " + std::to_string(ptrs.size()) +
                      " trainable parameters exceed the cap of " + std::to_string(cfg.max_params));
  }
  auto check = [&](double l, std::size_t step) {
    if (!std::isfinite(l) || l > cfg.divergence_threshold) {
      throw TrainingDiverged("train: loss " + std::to_string(l) + " at step " + std::to_string(step) +
                             " exceeds the divergence threshold; lower the learning rate");
    }
    return l;
  };

  r.loss_curve.push_back(check(loss(r.network, d), 0));
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    const FlatParams g = fd_gradient(r.network, d, cfg.fd_step, cfg.flatten);
    for (std::size_t i = 0; i < ptrs.size(); ++i) *ptrs[i] -= cfg.lr * g.values[i];
    r.loss_curve.push_back(check(loss(r.network, d), step));
  }
  return r;
}

}  // namespace opsplit
