#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace opsplit::cli {

struct ReportCase {
  std::string id;
  std::string description;
  double max_abs_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Machine-readable outcome of one verification suite.
struct VerifyReport {
  std::string suite;
  std::vector<ReportCase> cases;
  std::uint64_t seed = 0;
  /// Suite-specific extra records (e.g. projection certificates).
  nlohmann::json extra = nlohmann::json::object();

  /// Appends a numeric case; pass is max_abs_error <= tolerance.
  void add(std::string id, std::string description, double max_abs_error, double tolerance);
  /// Appends a boolean case (error 0 on success, 1 on failure, tolerance 0).
  void add_check(std::string id, std::string description, bool ok);

  std::size_t passed() const;
  bool all_pass() const { return passed() == cases.size(); }
  nlohmann::json to_json() const;
};

}  // namespace opsplit::cli
