#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "opsplit/grid.hpp"
#include "opsplit/model.hpp"
#include "opsplit/splitting.hpp"

namespace opsplit {

// Repo-wide JSON formats.
//
// Tensor:  {"shape": [rows, cols], "data": [row-major numbers]}
// Vector:  {"shape": [n], "data": [...]}
// Model:   {"mode", "n_x", "n_y", "J", "scale", "skip_mode", ["patch_grid"],
//           "blocks": [...], ["vit"]}

/// Malformed or inconsistent file content.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using json = nlohmann::json;

json tensor_to_json(const Matrix& m);
json vector_to_json(std::span<const double> v);

/// Accepts rank-2 tensors. A rank-1 tensor is read as a single row when
/// `allow_vector` is set. `where` prefixes error messages.
Matrix tensor_from_json(const json& j, const std::string& where, bool allow_vector = false);
std::vector<double> vector_from_json(const json& j, const std::string& where);

json network_to_json(const Network& net);
Network network_from_json(const json& j);

/// [{"label": ..., "tensor": {...}}, ...]
json trace_to_json(const SplitTrace& trace);

json read_json_file(const std::filesystem::path& path);
/// Writes `j` with two-space indentation and a trailing newline.
void write_json_file(const std::filesystem::path& path, const json& j);
std::string dump_json(const json& j);

}  // namespace opsplit
