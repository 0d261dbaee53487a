#include "suites.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "opsplit/projection.hpp"
#include "opsplit/random.hpp"
#include "opsplit/reference.hpp"
#include "opsplit/schemes.hpp"
#include "opsplit/splitting.hpp"
#include "opsplit/vit.hpp"

namespace opsplit::cli {

namespace {

std::size_t uniform_size(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

NormTarget random_norm(Rng& rng) {
  return {std::normal_distribution<double>(0.0, 1.0)(rng), uniform_real(rng, 0.5, 2.0), 1e-12};
}

Matrix permute_rows(const Matrix& m, const std::vector<std::size_t>& perm) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const auto src = m.row(perm[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

std::string trial_id(const std::string& stem, std::size_t t) { return stem + "/" + std::to_string(t); }

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"block-equivalence", "projection-oracle",
                                                 "splitting-order", "properties"};
  return names;
}

VerifyReport run_block_equivalence(std::uint64_t seed, std::size_t trials) {
  VerifyReport r;
  r.suite = "block-equivalence";
  r.seed = seed;
  Rng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    ModelShape shape;
    shape.n_x = uniform_size(rng, 1, 8);
    shape.n_y = uniform_size(rng, 1, 16);
    shape.depth = 2;
    shape.options.skip = uniform_size(rng, 0, 1) == 0 ? SkipMode::average : SkipMode::add;
    shape.options.scale = uniform_size(rng, 0, 1) == 0 ? ScoreScale::embedding : ScoreScale::unscaled;
    ModelParams m = random_model(shape, rng);
    m.blocks[0].norm1 = random_norm(rng);
    m.blocks[0].norm2 = random_norm(rng);
    const Matrix u = random_matrix(shape.n_x, shape.n_y, rng);

    const Matrix split = block_step(u, m.blocks[0], m.mode, m.options).output;
    const Matrix ref = reference::std_encoder_block(
        u, reference::map_to_standard(m.blocks[0]), m.options.skip,
        scale_dim(m.options.scale, shape.n_x, shape.n_y));
    r.add(trial_id("block", t),
          "n_x=" + std::to_string(shape.n_x) + " n_y=" + std::to_string(shape.n_y) + " skip=" +
              to_string(m.options.skip) + " scale=" + to_string(m.options.scale),
          max_abs_diff(split, ref), 1e-12);
  }
  return r;
}

VerifyReport run_projection_oracle(std::uint64_t seed, std::size_t trials, std::size_t samples) {
  VerifyReport r;
  r.suite = "projection-oracle";
  r.seed = seed;
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  nlohmann::json certs = nlohmann::json::array();

  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = uniform_size(rng, 2, 16);
    const double spread = uniform_real(rng, 0.1, 5.0);
    const double offset = 3.0 * normal(rng);
    std::vector<double> v(n);
    for (double& x : v) x = offset + spread * normal(rng);
    const NormTarget target = random_norm(rng);

    const S1Certificate cert = oracle_s1(v, target, samples, seed * 1000003ULL + t);
    r.add(trial_id("s1-certificate", t), "closed form no farther than any sampled feasible point",
          std::max(0.0, cert.closed_form_distance - cert.best_sampled_distance), 1e-9);
    certs.push_back({{"input", cert.input},
                     {"sigma1", cert.sigma1},
                     {"sigma2", cert.sigma2},
                     {"closed_form_distance", cert.closed_form_distance},
                     {"best_sampled_distance", cert.best_sampled_distance},
                     {"samples", cert.samples},
                     {"seed", cert.seed},
                     {"pass", cert.pass}});

    const GridFunction p = project_s1(GridFunction(1, n, v), target);
    const RowStats st = row_stats(p.row(0));
    r.add(trial_id("s1-mean", t), "projected row mean equals sigma1", std::abs(st.mean - target.sigma1), 1e-12);
    r.add(trial_id("s1-variance", t), "projected row variance equals sigma2^2",
          std::abs(st.variance - target.sigma2 * target.sigma2), 1e-10);
  }

  // n_y = 2: the feasible set is exactly {sigma1 + sigma2 (1, -1), sigma1 + sigma2 (-1, 1)}.
  for (std::size_t t = 0; t < 20; ++t) {
    std::vector<double> v = {normal(rng), normal(rng)};
    if (v[0] == v[1]) v[1] += 1.0;
    const NormTarget target = random_norm(rng);
    const std::vector<double> a = {target.sigma1 + target.sigma2, target.sigma1 - target.sigma2};
    const std::vector<double> b = {target.sigma1 - target.sigma2, target.sigma1 + target.sigma2};
    const auto& nearest = row_distance(a, v) <= row_distance(b, v) ? a : b;
    const GridFunction p = project_s1(GridFunction(1, 2, v), target);
    r.add(trial_id("s1-enumeration", t), "n_y=2 closed form picks the nearer of the two feasible points",
          std::max(std::abs(p(0, 0) - nearest[0]), std::abs(p(0, 1) - nearest[1])), 1e-12);
  }

  // ReLU is the nearest nonnegative point.
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = uniform_size(rng, 1, 16);
    const Matrix v = random_matrix(1, n, rng, 2.0);
    const Matrix p = project_s2(v);
    const double d_relu = row_distance(p.row(0), v.row(0));
    double best = INFINITY;
    std::vector<double> c(n);
    for (std::size_t s = 0; s < 1000; ++s) {
      for (double& x : c) x = std::max(0.0, 2.0 * normal(rng));
      best = std::min(best, row_distance(c, v.row(0)));
    }
    r.add(trial_id("s2-relu", t), "ReLU no farther than 1000 random nonnegative candidates",
          std::max(0.0, d_relu - best), 0.0);
  }
  r.extra["certificates"] = certs;
  return r;
}

VerifyReport run_splitting_order() {
  VerifyReport r;
  r.suite = "splitting-order";
  const auto counts = default_step_counts();
  for (SplitScheme scheme : {SplitScheme::lie, SplitScheme::parallel}) {
    const OrderStudy study = measure_order(noncommuting_2x2_problem(), scheme, counts);
    for (std::size_t i = 1; i < study.rows.size(); ++i) {
      const auto& row = study.rows[i];
      r.add(to_string(scheme) + "/order/n=" + std::to_string(row.n_steps),
            "observed order between dt=" + std::to_string(study.rows[i - 1].dt) + " and " +
                std::to_string(row.dt) + " is 1 +- 0.2",
            std::abs(row.observed_order - 1.0), 0.2);
    }
    r.add(to_string(scheme) + "/order/fit", "least-squares order over all dt is 1 +- 0.2",
          std::abs(study.fitted_order - 1.0), 0.2);

    const OrderStudy exact = measure_order(commuting_scalar_problem(), scheme, counts);
    r.add(to_string(scheme) + "/commuting", "commuting scalar split is exact at every dt",
          exact.max_error, 1e-12);
  }
  return r;
}

VerifyReport run_properties(std::uint64_t seed, std::size_t trials) {
  VerifyReport r;
  r.suite = "properties";
  r.seed = seed;
  Rng rng(seed);

  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n_x = uniform_size(rng, 1, 8);
    const std::size_t n_y = uniform_size(rng, 1, 16);
    const double w = 1.0 / std::sqrt(static_cast<double>(n_y));
    const SingleHeadWeights head{random_matrix(n_y, n_y, rng, w), random_matrix(n_y, n_y, rng, w),
                                 random_matrix(n_y, n_y, rng, w)};
    const Matrix u = random_matrix(n_x, n_y, rng);
    const GridFunction out = attention_substep(u, head, n_y);
    r.add(trial_id("attention-identity", t), "attention substep minus input equals reference attention",
          max_abs_diff(out - u, reference::std_attention(u, head.w_q, head.w_k, head.w_v, n_y)), 1e-12);

    const Matrix s = scores(qkv(1000.0 * u, head).q, qkv(u, head).k, n_y);
    double row_err = 0.0;
    for (std::size_t k = 0; k < s.rows(); ++k) {
      double sum = 0.0;
      for (double x : s.row(k)) {
        sum += x;
        if (x < 0.0 || x > 1.0) row_err = INFINITY;
      }
      row_err = std::max(row_err, std::abs(sum - 1.0));
    }
    r.add(trial_id("score-rows", t), "score rows lie in [0,1] and sum to 1 at large magnitude", row_err, 1e-12);

    const MultiHeadWeights one{{head}};
    r.add(trial_id("multihead-single", t), "one head equals single-head attention bitwise",
          max_abs_diff(multihead_substep(u, one, n_y), out), 0.0);
    const MultiHeadWeights twin{{head, head}};
    r.add(trial_id("multihead-twin", t), "two identical heads give u0 + 2 x attention term",
          max_abs_diff(multihead_substep(u, twin, n_y), u + 2.0 * (out - u)), 1e-12);
  }

  // CvT substeps on a 2x3 patch grid.
  for (std::size_t t = 0; t < std::max<std::size_t>(1, trials / 5); ++t) {
    ModelShape shape;
    shape.mode = Mode::cvt;
    shape.n_x = uniform_size(rng, 1, 5);
    shape.grid = {2, 3};
    shape.n_y = 6;
    shape.depth = uniform_size(rng, 1, 3);
    ModelParams m = random_model(shape, rng);
    const Matrix u = random_matrix(shape.n_x, shape.n_y, rng);

    Kernel delta(3, 3);
    delta(1, 1) = 1.0;
    const ConvTokenEmbedParams doubling{shape.grid, delta, std::vector<double>(shape.n_x, 0.0)};
    r.add(trial_id("cvt-delta-embed", t), "delta-kernel token embedding doubles the state",
          max_abs_diff(conv_token_embed_substep(u, doubling), 2.0 * u), 0.0);

    const ConvHeadWeights conv_id{shape.grid, delta, delta, delta};
    const SingleHeadWeights dense_id{Matrix::identity(6), Matrix::identity(6), Matrix::identity(6)};
    r.add(trial_id("cvt-delta-attention", t), "delta-kernel conv attention equals identity-weight attention",
          max_abs_diff(conv_attention_substep(u, conv_id, 6), attention_substep(u, dense_id, 6)), 1e-12);

    const BlockResult br = block_step(u, m.blocks[0], m.mode, m.options);
    r.add_check(trial_id("cvt-trace", t), "CvT trace holds 6 + J substeps plus the input",
                br.trace.states.size() == 6 + shape.depth + 1);
  }

  // Permutation equivariance of the whole block with row-constant biases.
  for (std::size_t t = 0; t < trials / 2; ++t) {
    ModelShape shape;
    shape.n_x = uniform_size(rng, 2, 8);
    shape.n_y = uniform_size(rng, 2, 12);
    shape.uniform_bias = true;
    const ModelParams m = random_model(shape, rng);
    const Matrix u = random_matrix(shape.n_x, shape.n_y, rng);
    std::vector<std::size_t> perm(shape.n_x);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const Matrix lhs = block_step(permute_rows(u, perm), m.blocks[0], m.mode, m.options).output;
    const Matrix rhs = permute_rows(block_step(u, m.blocks[0], m.mode, m.options).output, perm);
    r.add(trial_id("permutation-equivariance", t), "block commutes with token permutations",
          max_abs_diff(lhs, rhs), 1e-12);
  }

  // ViT composition replayed through standalone calls.
  for (std::size_t t = 0; t < std::max<std::size_t>(1, trials / 5); ++t) {
    ModelShape shape;
    shape.n_x = uniform_size(rng, 2, 6);
    shape.n_y = uniform_size(rng, 2, 8);
    shape.blocks = uniform_size(rng, 1, 3);
    const ModelParams m = random_model(shape, rng);
    const std::size_t d_patch = uniform_size(rng, 1, 9);
    const std::size_t d_out = uniform_size(rng, 1, 4);
    const VitParams vit = random_vit(d_patch, shape.n_y, d_out, rng);
    const Matrix patches = random_matrix(shape.n_x - 1, d_patch, rng);

    GridFunction state = vit_pre(patches, vit);
    for (const auto& b : m.blocks) state = block_step(state, b, m.mode, m.options).output;
    const auto manual = vit_post(state, vit);
    const auto fused = vit_forward(patches, vit, m);
    double err = fused.size() == d_out ? 0.0 : INFINITY;
    for (std::size_t i = 0; i < std::min(manual.size(), fused.size()); ++i) {
      err = std::max(err, std::abs(manual[i] - fused[i]));
    }
    r.add(trial_id("vit-composition", t), "vit_forward equals G(propagate(F(R))) bitwise", err, 0.0);
  }

  // Projection invariants.
  for (std::size_t t = 0; t < trials / 2; ++t) {
    const std::size_t n_y = uniform_size(rng, 2, 16);
    const Matrix v = random_matrix(uniform_size(rng, 1, 6), n_y, rng, 3.0);
    const NormTarget target = random_norm(rng);
    const GridFunction once = project_s1(v, target);
    r.add(trial_id("s1-idempotent", t), "projecting twice equals projecting once",
          max_abs_diff(project_s1(once, target), once), 1e-12);
    const double a = uniform_real(rng, 0.1, 10.0);
    const double b = 5.0 * std::normal_distribution<double>(0.0, 1.0)(rng);
    Matrix affine = v;
    for (double& x : affine.values()) x = a * x + b;
    r.add(trial_id("s1-affine-invariance", t), "projection ignores positive affine input rescaling",
          max_abs_diff(project_s1(affine, target), once), 1e-12);
  }
  return r;
}

VerifyReport run_suite(const std::string& name, std::uint64_t seed, std::size_t trials,
                       std::size_t samples) {
  if (name == "block-equivalence") return run_block_equivalence(seed, trials == 0 ? 200 : trials);
  if (name == "projection-oracle") {
    return run_projection_oracle(seed, trials == 0 ? 100 : trials, samples == 0 ? 10000 : samples);
  }
  if (name == "splitting-order") return run_splitting_order();
  if (name == "properties") return run_properties(seed, trials == 0 ? 100 : trials);
  throw std::invalid_argument("unknown suite '" + name + "'");
}

}  // namespace opsplit::cli
