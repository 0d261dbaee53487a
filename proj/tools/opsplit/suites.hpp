#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "report.hpp"

namespace opsplit::cli {

/// Names accepted by `verify --suite`.
const std::vector<std::string>& suite_names();

/// block_step against the loop-based reference encoder over random draws
/// (n_x <= 8, n_y <= 16, J = 2). Default 200 trials, tolerance 1e-12.
VerifyReport run_block_equivalence(std::uint64_t seed, std::size_t trials);

/// Closed-form normalization projection against random feasible samples,
/// exhaustive enumeration at n_y = 2, and ReLU against random nonnegative
/// candidates. Default 100 trials with 10^4 samples each.
VerifyReport run_projection_oracle(std::uint64_t seed, std::size_t trials, std::size_t samples);

/// Lie and parallel splitting order on the non-commuting 2x2 system and
/// exactness on the commuting scalar system.
VerifyReport run_splitting_order();

/// Structural identities: attention residual, multi-head degeneracy, CvT
/// substeps, permutation equivariance, ViT composition, projection
/// invariants.
VerifyReport run_properties(std::uint64_t seed, std::size_t trials);

/// Dispatches by name; `trials` of 0 selects each suite's default.
VerifyReport run_suite(const std::string& name, std::uint64_t seed, std::size_t trials,
                       std::size_t samples);

}  // namespace opsplit::cli
