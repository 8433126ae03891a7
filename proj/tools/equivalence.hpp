#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ebdg::cli {

struct EquivalenceCase {
  std::string name;
  int instances = 0;
  /// Largest |closed - kkt| / max(1, |kkt|, |u| + |u_D|) seen.
  double max_deviation = 0.0;
};

struct EquivalenceReport {
  std::vector<EquivalenceCase> cases;
  double max_deviation() const;
};

/// Randomized closed-form vs saddle-point comparisons for every
/// single-constraint kind (p <= 6) and every multi-constraint metric
/// (K <= B <= 9). Deterministic for a given seed.
EquivalenceReport verify_equivalence(std::uint64_t seed, int instances_per_kind = 100);

}  // namespace ebdg::cli
