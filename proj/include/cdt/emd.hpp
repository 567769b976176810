#pragma once

#include <cstddef>
#include <vector>

namespace cdt {

struct EmdResult {
  double distance = 0.0;
  // True when the value came from the exact network-flow solver; false means
  // the entropic approximation ran and `tolerance` bounds its marginal error.
  bool exact = true;
  double tolerance = 0.0;
};

// Earth mover's distance between two uniform discrete distributions given the
// dense pairwise cost matrix (rows = first side, cols = second side). Costs
// must be non-negative. Sides of size up to 100x100 are solved exactly;
// larger products fall back to a regularized approximation.
EmdResult emd_uniform(const std::vector<std::vector<double>>& cost);

}  // namespace cdt
