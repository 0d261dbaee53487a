#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "opsplit/io.hpp"
#include "opsplit/random.hpp"
#include "opsplit/schemes.hpp"
#include "opsplit/splitting.hpp"
#include "opsplit/toy.hpp"
#include "opsplit/training.hpp"
#include "opsplit/vit.hpp"
#include "suites.hpp"

namespace opsplit::cli {

namespace {

/// Raised for bad flag combinations and unreadable inputs; maps to exit 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::uint64_t seed = 0;
  std::string out;
  std::string model;
  std::string input;
  std::string mode;
  bool trace = false;
  std::string timestamp;
};

struct VerifyFlags {
  std::string suite = "all";
  std::size_t trials = 0;
  std::size_t samples = 0;
};

struct StepFlags {
  std::string image;
  std::size_t patch = 0;
};

struct TrainFlags {
  std::string data;
  std::string model_out;
  std::size_t steps = 200;
  double lr = 0.1;
  double h = 1e-5;
  bool train_norms = false;
};

struct InitFlags {
  std::size_t n_x = 4;
  std::size_t n_y = 4;
  std::size_t depth = 2;
  std::size_t blocks = 1;
  std::size_t heads = 2;
  std::vector<std::size_t> patch_grid;
  std::size_t kernel = 3;
  std::size_t vit_patch_dim = 0;
  std::size_t vit_classes = 2;
  std::string skip = "average";
  std::string scale = "embedding";
  std::string input_out;
};

// FNV-1a over the canonical dump of the effective configuration.
std::string config_hash(const json& config) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json stamp(json doc, const CommonFlags& common, const json& config) {
  doc["seed"] = common.seed;
  doc["config"] = config;
  doc["config_hash"] = config_hash(config);
  doc["timestamp"] = common.timestamp.empty() ? json(nullptr) : json(common.timestamp);
  return doc;
}

void emit(const json& doc, const CommonFlags& common, std::ostream& out) {
  if (common.out.empty()) {
    out << dump_json(doc);
  } else {
    write_json_file(common.out, doc);
  }
}

Network load_network(const CommonFlags& common) {
  if (common.model.empty()) throw UsageError("--model is required");
  return network_from_json(read_json_file(common.model));
}

int cmd_verify(const CommonFlags& common, const VerifyFlags& flags, std::ostream& out,
               std::ostream& err) {
  std::vector<std::string> suites;
  if (flags.suite == "all") {
    suites = suite_names();
  } else {
    const auto& known = suite_names();
    if (std::find(known.begin(), known.end(), flags.suite) == known.end()) {
      std::string names;
      for (const auto& n : known) names += " " + n;
      throw UsageError("unknown suite '" + flags.suite + "'; expected one of: all" + names);
    }
    suites.push_back(flags.suite);
  }

  const json config = {{"command", "verify"},
                       {"suite", flags.suite},
                       {"trials", flags.trials},
                       {"samples", flags.samples}};
  json reports = json::array();
  bool pass = true;
  for (const auto& name : suites) {
    const VerifyReport r = run_suite(name, common.seed, flags.trials, flags.samples);
    err << name << ": " << r.passed() << "/" << r.cases.size() << " cases pass\n";
    pass = pass && r.all_pass();
    reports.push_back(r.to_json());
  }
  json doc = suites.size() == 1 ? reports.front() : json{{"suites", reports}};
  doc["pass"] = pass;
  emit(stamp(std::move(doc), common, config), common, out);
  return pass ? kSuccess : kVerificationFailed;
}

int cmd_step(const CommonFlags& common, const StepFlags& flags, std::ostream& out) {
  const Network net = load_network(common);
  Matrix input;
  if (!flags.image.empty()) {
    if (!net.vit) throw UsageError("--image needs a model with ViT adapters");
    if (flags.patch == 0) throw UsageError("--image needs --patch <size>");
    input = extract_patches(read_pgm(flags.image), flags.patch);
  } else {
    if (common.input.empty()) throw UsageError("--input or --image is required");
    input = tensor_from_json(read_json_file(common.input), "input");
  }

  GridFunction state = input;
  if (net.vit) {
    if (input.rows() + 1 != net.model.n_x) {
      throw UsageError("input has " + std::to_string(input.rows()) + " patches but the model expects " +
                       std::to_string(net.model.n_x - 1));
    }
    try {
      state = vit_pre(input, *net.vit);
    } catch (const DimensionError& e) {
      throw UsageError(std::string("input does not fit the model: ") + e.what());
    }
  } else if (input.rows() != net.model.n_x || input.cols() != net.model.n_y) {
    throw UsageError("input is " + std::to_string(input.rows()) + "x" + std::to_string(input.cols()) +
                     " but the model expects " + std::to_string(net.model.n_x) + "x" +
                     std::to_string(net.model.n_y));
  }

  const BlockResult r = propagate_traced(state, net.model);
  json result = net.vit ? vector_to_json(vit_post(r.output, *net.vit)) : tensor_to_json(r.output);
  if (common.trace) {
    result = {{"output", result}, {"trace", trace_to_json(r.trace)}};
  }
  // Tensor outputs stay bare so they can be fed back as --input.
  if (common.trace) {
    const json config = {{"command", "step"}, {"model", network_to_json(net)}, {"trace", true}};
    result = stamp(std::move(result), common, config);
  }
  emit(result, common, out);
  return kSuccess;
}

json study_to_json(const OrderStudy& s) {
  json rows = json::array();
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const OrderRow& r = s.rows[i];
    // The coarsest row has no predecessor to measure an order against.
    const json order = i == 0 ? json(nullptr) : json(r.observed_order);
    rows.push_back({{"n_steps", r.n_steps}, {"dt", r.dt}, {"error", r.error}, {"observed_order", order}});
  }
  return {{"problem", s.problem}, {"scheme", to_string(s.scheme)}, {"rows", rows},
          {"fitted_order", s.fitted_order}, {"max_error", s.max_error}};
}

int cmd_converge(const CommonFlags& common, std::ostream& out) {
  const auto counts = default_step_counts();
  json studies = json::array();
  bool pass = true;
  for (SplitScheme scheme : {SplitScheme::lie, SplitScheme::parallel}) {
    const OrderStudy s = measure_order(noncommuting_2x2_problem(), scheme, counts);
    bool ok = std::abs(s.fitted_order - 1.0) <= 0.2;
    for (std::size_t i = 1; i < s.rows.size(); ++i) ok = ok && std::abs(s.rows[i].observed_order - 1.0) <= 0.2;
    json j = study_to_json(s);
    j["pass"] = ok;
    studies.push_back(j);
    pass = pass && ok;

    const OrderStudy c = measure_order(commuting_scalar_problem(), scheme, counts);
    json jc = study_to_json(c);
    jc["pass"] = c.max_error <= 1e-12;
    studies.push_back(jc);
    pass = pass && c.max_error <= 1e-12;
  }
  const json config = {{"command", "converge"}, {"step_counts", counts}, {"order_tolerance", 0.2},
                       {"exact_tolerance", 1e-12}};
  emit(stamp({{"studies", studies}, {"pass", pass}}, common, config), common, out);
  return pass ? kSuccess : kVerificationFailed;
}

int cmd_train(const CommonFlags& common, const TrainFlags& flags, std::ostream& out, std::ostream& err) {
  const bool vit_mode = common.mode == "vit";
  if (!common.mode.empty() && common.mode != "vit" && common.mode != "vanilla") {
    throw UsageError("train supports --mode vanilla or vit");
  }
  if (flags.data.empty() != common.model.empty()) {
    throw UsageError("pass both --model and --data, or neither to use the built-in toy task");
  }

  Network net;
  Dataset data;
  json source;
  if (flags.data.empty()) {
    ToyConfig toy;
    toy.vit = vit_mode;
    if (vit_mode) toy.n_x = 3;
    ToyTask task = make_toy_task(toy, common.seed);
    net = std::move(task.student);
    data = std::move(task.data);
    source = {{"toy", vit_mode ? "vit-classification" : "teacher-student"}};
  } else {
    net = load_network(common);
    data = dataset_from_json(read_json_file(flags.data));
    source = {{"model", network_to_json(net)}, {"data", dataset_to_json(data)}};
  }

  TrainConfig cfg;
  cfg.steps = flags.steps;
  cfg.lr = flags.lr;
  cfg.fd_step = flags.h;
  cfg.flatten.include_norms = flags.train_norms;
  const std::size_t n_params = flatten(net, cfg.flatten).values.size();
  if (n_params > cfg.max_params) {
    throw UsageError("model has " + std::to_string(n_params) + " trainable parameters; the cap is " +
                     std::to_string(cfg.max_params));
  }

  TrainResult r;
  try {
    r = train(net, data, cfg);
  } catch (const TrainingDiverged& e) {
    err << e.what() << "\n";
    return kVerificationFailed;
  }
  err << "loss " << r.loss_curve.front() << " -> " << r.loss_curve.back() << " in " << cfg.steps << " steps\n";

  // The trained model always lands next to the loss curve unless placed explicitly.
  std::string model_out = flags.model_out;
  if (model_out.empty() && !common.out.empty()) {
    model_out = std::filesystem::path(common.out).replace_extension(".model.json").string();
  }
  if (!model_out.empty()) write_json_file(model_out, network_to_json(r.network));
  const json config = {{"command", "train"}, {"mode", vit_mode ? "vit" : "vanilla"}, {"steps", cfg.steps},
                       {"lr", cfg.lr}, {"h", cfg.fd_step}, {"train_norms", flags.train_norms},
                       {"source", source}};
  const json doc = {{"loss", to_string(data.loss)},
                    {"parameters", n_params},
                    {"pairs", data.pairs.size()},
                    {"initial_loss", r.loss_curve.front()},
                    {"final_loss", r.loss_curve.back()},
                    {"loss_curve", r.loss_curve}};
  emit(stamp(doc, common, config), common, out);
  return kSuccess;
}

int cmd_init(const CommonFlags& common, const InitFlags& flags, std::ostream& out) {
  ModelShape shape;
  try {
    shape.mode = parse_mode(common.mode.empty() ? "vanilla" : common.mode);
    shape.options.skip = parse_skip_mode(flags.skip);
    shape.options.scale = parse_score_scale(flags.scale);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  shape.n_x = flags.n_x;
  shape.n_y = flags.n_y;
  shape.depth = flags.depth;
  shape.blocks = flags.blocks;
  shape.heads = flags.heads;
  shape.kernel = flags.kernel;
  if (shape.mode == Mode::cvt) {
    if (flags.patch_grid.size() != 2) throw UsageError("cvt mode needs --patch-grid <h> <w>");
    shape.grid = {flags.patch_grid[0], flags.patch_grid[1]};
  }

  Rng rng(common.seed);
  Network net;
  try {
    net.model = random_model(shape, rng);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (flags.vit_patch_dim > 0) net.vit = random_vit(flags.vit_patch_dim, shape.n_y, flags.vit_classes, rng);
  emit(network_to_json(net), common, out);

  if (!flags.input_out.empty()) {
    const Matrix input = net.vit ? random_matrix(shape.n_x - 1, flags.vit_patch_dim, rng)
                                 : random_matrix(shape.n_x, shape.n_y, rng);
    write_json_file(flags.input_out, tensor_to_json(input));
  }
  return kSuccess;
}

void add_common(CLI::App* app, CommonFlags& c) {
  app->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  app->add_option("--out", c.out, "Write JSON output to this path instead of stdout");
  app->add_option("--timestamp", c.timestamp, "Timestamp string recorded in the output (default null)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transformer blocks as operator-splitting steps: verification, stepping, "
               "splitting-order studies and toy training"};
  app.name(args.empty() ? "opsplit" : std::filesystem::path(args[0]).filename().string());
  app.require_subcommand(1);

  CommonFlags common;
  VerifyFlags vf;
  StepFlags sf;
  TrainFlags tf;
  InitFlags inf;
  const std::vector<std::string> modes = {"vanilla", "multihead", "cvt", "vit"};

  auto* verify = app.add_subcommand("verify", "Run verification suites; exit 0 iff every case passes");
  add_common(verify, common);
  verify->add_option("--suite", vf.suite, "all, block-equivalence, projection-oracle, splitting-order or properties")
      ->capture_default_str();
  verify->add_option("--trials", vf.trials, "Random draws per check (0 = suite default)");
  verify->add_option("--samples", vf.samples, "Feasible samples per projection certificate (0 = 10000)");

  auto* step = app.add_subcommand("step", "Propagate an input through a model file");
  add_common(step, common);
  step->add_option("--model", common.model, "Model JSON")->required();
  step->add_option("--input", common.input, "Input tensor JSON (patches for ViT models)");
  step->add_option("--image", sf.image, "8-bit grayscale PGM, cut into patches (ViT models)");
  step->add_option("--patch", sf.patch, "Patch edge length for --image");
  step->add_flag("--trace", common.trace, "Also emit every substep state");

  auto* converge = app.add_subcommand("converge", "Measure Lie and parallel splitting order");
  add_common(converge, common);

  auto* trainc = app.add_subcommand("train", "Gradient descent on finite-difference gradients");
  add_common(trainc, common);
  trainc->add_option("--model", common.model, "Initial model JSON (with --data)");
  trainc->add_option("--data", tf.data, "Dataset JSON (with --model)");
  trainc->add_option("--mode", common.mode, "Toy task kind when no data is given: vanilla or vit")
      ->check(CLI::IsMember(modes));
  trainc->add_option("--steps", tf.steps, "Gradient steps")->capture_default_str();
  trainc->add_option("--lr", tf.lr, "Learning rate")->capture_default_str();
  trainc->add_option("--fd-step", tf.h, "Finite-difference step")->capture_default_str();
  trainc->add_flag("--train-norms", tf.train_norms, "Also train sigma1/sigma2 of every norm target");
  trainc->add_option("--model-out", tf.model_out, "Write the trained model here (default: <out>.model.json)");

  auto* init = app.add_subcommand("init", "Write a randomly initialized model (and optional input)");
  add_common(init, common);
  init->add_option("--mode", common.mode, "vanilla, multihead or cvt")->check(CLI::IsMember({"vanilla", "multihead", "cvt"}));
  init->add_option("--nx", inf.n_x, "Tokens")->capture_default_str();
  init->add_option("--ny", inf.n_y, "Embedding width")->capture_default_str();
  init->add_option("--J", inf.depth, "Feedforward layers per block")->capture_default_str();
  init->add_option("--blocks", inf.blocks, "Number of blocks N_t")->capture_default_str();
  init->add_option("--heads", inf.heads, "Heads (multihead mode)")->capture_default_str();
  init->add_option("--patch-grid", inf.patch_grid, "Patch grid h w (cvt mode)")->expected(2);
  init->add_option("--kernel", inf.kernel, "Convolution kernel size (cvt mode)")->capture_default_str();
  init->add_option("--vit-patch-dim", inf.vit_patch_dim, "Add ViT adapters for patches of this length");
  init->add_option("--vit-classes", inf.vit_classes, "ViT head outputs")->capture_default_str();
  init->add_option("--skip-mode", inf.skip, "average or add")->capture_default_str();
  init->add_option("--scale", inf.scale, "embedding, unscaled or tokens")->capture_default_str();
  init->add_option("--input-out", inf.input_out, "Also write a random input tensor here");

  // CLI11 consumes the argument vector back to front, without the program name.
  std::vector<std::string> rest(args.rbegin(), args.rend());
  if (!rest.empty()) rest.pop_back();
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (verify->parsed()) return cmd_verify(common, vf, out, err);
    if (step->parsed()) return cmd_step(common, sf, out);
    if (converge->parsed()) return cmd_converge(common, out);
    if (trainc->parsed()) return cmd_train(common, tf, out, err);
    if (init->parsed()) return cmd_init(common, inf, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace opsplit::cli
