#include "opsplit/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace opsplit {

namespace {

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw FormatError(where + ": missing field '" + key + "'");
  }
  return j.at(key);
}

std::size_t size_field(const json& j, const char* key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw FormatError(where + ": field '" + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::string string_field(const json& j, const char* key, const std::string& where,
                         const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw FormatError(where + ": field '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

std::vector<double> numbers(const json& data, const std::string& where) {
  if (!data.is_array()) throw FormatError(where + ": 'data' must be an array");
  std::vector<double> out;
  out.reserve(data.size());
  for (const auto& v : data) {
    if (!v.is_number()) throw FormatError(where + ": 'data' must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<std::size_t> shape_of(const json& j, const std::string& where) {
  const json& s = field(j, "shape", where);
  if (!s.is_array()) throw FormatError(where + ": 'shape' must be an array");
  std::vector<std::size_t> out;
  for (const auto& v : s) {
    if (!v.is_number_integer() || v.get<long long>() <= 0) {
      throw FormatError(where + ": 'shape' entries must be positive integers");
    }
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

json norm_to_json(const NormTarget& t) {
  return {{"sigma1", t.sigma1}, {"sigma2", t.sigma2}, {"epsilon", t.epsilon}};
}

NormTarget norm_from_json(const json& j, const std::string& where) {
  NormTarget t;
  if (!j.is_object()) throw FormatError(where + ": expected an object");
  if (j.contains("sigma1")) t.sigma1 = j.at("sigma1").get<double>();
  if (j.contains("sigma2")) t.sigma2 = j.at("sigma2").get<double>();
  if (j.contains("epsilon")) t.epsilon = j.at("epsilon").get<double>();
  return t;
}

json head_to_json(const Kernel& q, const Kernel& k, const Kernel& v) {
  return {{"w_q", tensor_to_json(q)}, {"w_k", tensor_to_json(k)}, {"w_v", tensor_to_json(v)}};
}

SingleHeadWeights head_from_json(const json& j, const std::string& where) {
  return {tensor_from_json(field(j, "w_q", where), where + ".w_q"),
          tensor_from_json(field(j, "w_k", where), where + ".w_k"),
          tensor_from_json(field(j, "w_v", where), where + ".w_v")};
}

json attention_to_json(const AttentionWeights& attn) {
  if (const auto* w = std::get_if<SingleHeadWeights>(&attn)) return head_to_json(w->w_q, w->w_k, w->w_v);
  if (const auto* w = std::get_if<ConvHeadWeights>(&attn)) return head_to_json(w->w_q, w->w_k, w->w_v);
  const auto& mh = std::get<MultiHeadWeights>(attn);
  json heads = json::array();
  for (const auto& h : mh.heads) heads.push_back(head_to_json(h.w_q, h.w_k, h.w_v));
  return {{"heads", heads}};
}

}  // namespace

json tensor_to_json(const Matrix& m) {
  const auto v = m.values();
  return {{"shape", {m.rows(), m.cols()}}, {"data", std::vector<double>(v.begin(), v.end())}};
}

json vector_to_json(std::span<const double> v) {
  return {{"shape", {v.size()}}, {"data", std::vector<double>(v.begin(), v.end())}};
}

Matrix tensor_from_json(const json& j, const std::string& where, bool allow_vector) {
  const auto shape = shape_of(j, where);
  auto data = numbers(field(j, "data", where), where);
  std::size_t rows = 0, cols = 0;
  if (shape.size() == 2) {
    rows = shape[0];
    cols = shape[1];
  } else if (shape.size() == 1 && allow_vector) {
    rows = 1;
    cols = shape[0];
  } else {
    throw FormatError(where + ": expected a rank-2 tensor");
  }
  if (data.size() != rows * cols) {
    throw FormatError(where + ": shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                      " needs " + std::to_string(rows * cols) + " values, got " +
                      std::to_string(data.size()));
  }
  try {
    return Matrix(rows, cols, std::move(data));
  } catch (const std::invalid_argument& e) {
    throw FormatError(where + ": " + e.what());
  }
}

std::vector<double> vector_from_json(const json& j, const std::string& where) {
  const auto shape = shape_of(j, where);
  auto data = numbers(field(j, "data", where), where);
  if (shape.size() != 1) throw FormatError(where + ": expected a rank-1 tensor");
  if (data.size() != shape[0]) {
    throw FormatError(where + ": shape [" + std::to_string(shape[0]) + "] but " +
                      std::to_string(data.size()) + " values");
  }
  for (double v : data) {
    if (!std::isfinite(v)) throw FormatError(where + ": non-finite value");
  }
  return data;
}

json network_to_json(const Network& net) {
  const ModelParams& m = net.model;
  json j;
  j["mode"] = to_string(m.mode);
  j["n_x"] = m.n_x;
  j["n_y"] = m.n_y;
  j["J"] = m.blocks.empty() ? 0 : m.blocks.front().depth();
  j["scale"] = to_string(m.options.scale);
  j["skip_mode"] = to_string(m.options.skip);
  if (m.mode == Mode::cvt && !m.blocks.empty()) {
    const auto& g = std::get<ConvHeadWeights>(m.blocks.front().attn).grid;
    j["patch_grid"] = {g.height, g.width};
  }
  json blocks = json::array();
  for (const auto& b : m.blocks) {
    json jb;
    jb["attn"] = attention_to_json(b.attn);
    jb["norm1"] = norm_to_json(b.norm1);
    jb["norm2"] = norm_to_json(b.norm2);
    json ffn = json::array();
    for (const auto& layer : b.ffn) ffn.push_back({{"w", tensor_to_json(layer.w)}, {"b", vector_to_json(layer.b)}});
    jb["ffn"] = ffn;
    if (b.conv_embed) {
      jb["conv_embed"] = {{"kernel", tensor_to_json(b.conv_embed->kernel)},
                          {"bias", vector_to_json(b.conv_embed->bias)}};
    }
    blocks.push_back(jb);
  }
  j["blocks"] = blocks;
  if (net.vit) {
    j["vit"] = {{"embed", tensor_to_json(net.vit->embed)},
                {"class_token", vector_to_json(net.vit->class_token)},
                {"head", tensor_to_json(net.vit->head)}};
  }
  return j;
}

Network network_from_json(const json& j) {
  const std::string where = "model";
  if (!j.is_object()) throw FormatError("model: expected a JSON object");
  Network net;
  ModelParams& m = net.model;
  try {
    m.mode = parse_mode(string_field(j, "mode", where, "vanilla"));
    m.options.scale = parse_score_scale(string_field(j, "scale", where, "embedding"));
    m.options.skip = parse_skip_mode(string_field(j, "skip_mode", where, "average"));
  } catch (const ConfigError& e) {
    throw FormatError(std::string("model: ") + e.what());
  }
  m.n_x = size_field(j, "n_x", where);
  m.n_y = size_field(j, "n_y", where);

  PatchGrid grid;
  if (m.mode == Mode::cvt) {
    const json& g = field(j, "patch_grid", where);
    if (!g.is_array() || g.size() != 2) throw FormatError("model: 'patch_grid' must be [height, width]");
    grid = {g[0].get<std::size_t>(), g[1].get<std::size_t>()};
  }

  const json& blocks = field(j, "blocks", where);
  if (!blocks.is_array()) throw FormatError("model: 'blocks' must be an array");
  for (std::size_t n = 0; n < blocks.size(); ++n) {
    const json& jb = blocks[n];
    const std::string bw = "model.blocks[" + std::to_string(n) + "]";
    BlockParams b;
    const json& attn = field(jb, "attn", bw);
    switch (m.mode) {
      case Mode::vanilla:
        b.attn = head_from_json(attn, bw + ".attn");
        break;
      case Mode::multihead: {
        MultiHeadWeights mh;
        const json& heads = field(attn, "heads", bw + ".attn");
        if (!heads.is_array()) throw FormatError(bw + ".attn.heads must be an array");
        for (std::size_t h = 0; h < heads.size(); ++h) {
          mh.heads.push_back(head_from_json(heads[h], bw + ".attn.heads[" + std::to_string(h) + "]"));
        }
        b.attn = std::move(mh);
        break;
      }
      case Mode::cvt: {
        SingleHeadWeights k = head_from_json(attn, bw + ".attn");
        b.attn = ConvHeadWeights{grid, std::move(k.w_q), std::move(k.w_k), std::move(k.w_v)};
        const json& ce = field(jb, "conv_embed", bw);
        b.conv_embed = ConvTokenEmbedParams{grid, tensor_from_json(field(ce, "kernel", bw + ".conv_embed"), bw + ".conv_embed.kernel"),
                                            vector_from_json(field(ce, "bias", bw + ".conv_embed"), bw + ".conv_embed.bias")};
        break;
      }
    }
    if (jb.contains("norm1")) b.norm1 = norm_from_json(jb.at("norm1"), bw + ".norm1");
    if (jb.contains("norm2")) b.norm2 = norm_from_json(jb.at("norm2"), bw + ".norm2");
    const json& ffn = field(jb, "ffn", bw);
    if (!ffn.is_array()) throw FormatError(bw + ".ffn must be an array");
    for (std::size_t l = 0; l < ffn.size(); ++l) {
      const std::string lw = bw + ".ffn[" + std::to_string(l) + "]";
      b.ffn.push_back({tensor_from_json(field(ffn[l], "w", lw), lw + ".w"),
                       vector_from_json(field(ffn[l], "b", lw), lw + ".b")});
    }
    m.blocks.push_back(std::move(b));
  }

  if (j.contains("J") && !m.blocks.empty() && j.at("J").get<std::size_t>() != m.blocks.front().depth()) {
    throw FormatError("model: 'J' disagrees with the number of ffn layers");
  }

  if (j.contains("vit")) {
    const json& v = j.at("vit");
    net.vit = VitParams{tensor_from_json(field(v, "embed", "model.vit"), "model.vit.embed"),
                        vector_from_json(field(v, "class_token", "model.vit"), "model.vit.class_token"),
                        tensor_from_json(field(v, "head", "model.vit"), "model.vit.head")};
  }

  try {
    net.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("model: ") + e.what());
  }
  return net;
}

json trace_to_json(const SplitTrace& trace) {
  json out = json::array();
  for (const auto& e : trace.states) out.push_back({{"label", e.label}, {"tensor", tensor_to_json(e.state)}});
  return out;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": invalid JSON: " + e.what());
  }
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << dump_json(j);
  if (!out) throw FormatError("failed writing " + path.string());
}

}  // namespace opsplit
