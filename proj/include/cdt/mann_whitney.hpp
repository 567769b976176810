#pragma once

#include <vector>

namespace cdt {

struct MwuResult {
  double u = 0.0;
  double p_value = 1.0;
  // Exact enumeration for small combined samples, otherwise a tie-corrected
  // normal approximation with continuity correction.
  bool exact = false;
};

// Two-sided Mann-Whitney U test with midranks. U is min(U_x, U_y).
MwuResult mann_whitney_u(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cdt
