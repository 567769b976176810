#include "cdt/mann_whitney.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

#include "cdt/error.hpp"

namespace cdt {

namespace {

// Midranks of the pooled sample, in the pooled order given.
std::vector<double> midranks(const std::vector<double>& pooled) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

double min_u_from_rank_sum(double rank_sum_x, std::size_t nx, std::size_t ny) {
  double ux = rank_sum_x - static_cast<double>(nx) * (static_cast<double>(nx) + 1.0) / 2.0;
  double uy = static_cast<double>(nx) * static_cast<double>(ny) - ux;
  return std::min(ux, uy);
}

double exact_p(const std::vector<double>& ranks, std::size_t nx, double u_obs) {
  const std::size_t n = ranks.size();
  std::uint64_t total = 0;
  std::uint64_t at_or_below = 0;
  const std::uint64_t limit = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < limit; ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != nx) continue;
    double rank_sum = 0.0;
    std::uint64_t bits = mask;
    while (bits) {
      rank_sum += ranks[static_cast<std::size_t>(std::countr_zero(bits))];
      bits &= bits - 1;
    }
    ++total;
    if (min_u_from_rank_sum(rank_sum, nx, n - nx) <= u_obs + 1e-9) ++at_or_below;
  }
  return static_cast<double>(at_or_below) / static_cast<double>(total);
}

double approx_p(const std::vector<double>& pooled, std::size_t nx, std::size_t ny, double u) {
  const double n = static_cast<double>(pooled.size());
  const double mean = static_cast<double>(nx) * static_cast<double>(ny) / 2.0;
  // Tie-corrected variance over the pooled value groups.
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  const double variance = (static_cast<double>(nx) * static_cast<double>(ny) / 12.0) *
                          ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (variance <= 0.0) return 1.0;
  if (u >= mean) return 1.0;
  const double z = (u - mean + 0.5) / std::sqrt(variance);
  const double p = std::erfc(-z / std::sqrt(2.0));
  return std::min(1.0, std::max(0.0, p));
}

}  // namespace

MwuResult mann_whitney_u(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.empty() || y.empty()) {
    fail(ErrorKind::invalid_argument, "rank test needs at least one value on each side");
  }
  std::vector<double> pooled = x;
  pooled.insert(pooled.end(), y.begin(), y.end());
  std::vector<double> ranks = midranks(pooled);
  double rank_sum_x = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) rank_sum_x += ranks[i];

  MwuResult r;
  r.u = min_u_from_rank_sum(rank_sum_x, x.size(), y.size());
  if (pooled.size() <= 20) {
    r.exact = true;
    r.p_value = exact_p(ranks, x.size(), r.u);
  } else {
    r.exact = false;
    r.p_value = approx_p(pooled, x.size(), y.size(), r.u);
  }
  return r;
}

}  // namespace cdt
