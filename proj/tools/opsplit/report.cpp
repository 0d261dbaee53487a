#include "report.hpp"

#include <algorithm>
#include <cmath>

namespace opsplit::cli {

void VerifyReport::add(std::string id, std::string description, double max_abs_error,
                       double tolerance) {
  // NaN errors must fail, hence the negated comparison.
  const bool ok = !(max_abs_error > tolerance) && !std::isnan(max_abs_error);
  cases.push_back({std::move(id), std::move(description), max_abs_error, tolerance, ok});
}

void VerifyReport::add_check(std::string id, std::string description, bool ok) {
  cases.push_back({std::move(id), std::move(description), ok ? 0.0 : 1.0, 0.0, ok});
}

std::size_t VerifyReport::passed() const {
  return static_cast<std::size_t>(std::count_if(cases.begin(), cases.end(), [](const ReportCase& c) { return c.pass; }));
}

nlohmann::json VerifyReport::to_json() const {
  nlohmann::json jc = nlohmann::json::array();
  for (const auto& c : cases) {
    jc.push_back({{"id", c.id},
                  {"description", c.description},
                  {"max_abs_error", c.max_abs_error},
                  {"tolerance", c.tolerance},
                  {"pass", c.pass}});
  }
  nlohmann::json j = {{"suite", suite},
                      {"seed", seed},
                      {"summary", {{"total", cases.size()}, {"passed", passed()}, {"failed", cases.size() - passed()}}},
                      {"cases", jc}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

}  // namespace opsplit::cli
