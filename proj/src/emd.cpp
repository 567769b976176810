#include "cdt/emd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "cdt/error.hpp"

namespace cdt {

namespace {

struct FlowEdge {
  int to;
  long long cap;
  double cost;
  std::size_t rev;
};

class FlowGraph {
 public:
  explicit FlowGraph(int n) : adj_(n) {}

  void add_edge(int from, int to, long long cap, double cost) {
    adj_[from].push_back({to, cap, cost, adj_[to].size()});
    adj_[to].push_back({from, 0, -cost, adj_[from].size() - 1});
  }

  // Successive shortest augmenting paths with Dijkstra over reduced costs.
  // Capacities are integral, so termination is exact; the only floating part
  // is the cost accumulation.
  double min_cost_flow(int source, int sink, long long target_flow) {
    const int n = static_cast<int>(adj_.size());
    std::vector<double> potential(n, 0.0);
    double total_cost = 0.0;
    long long flow = 0;
    while (flow < target_flow) {
      std::vector<double> dist(n, std::numeric_limits<double>::infinity());
      std::vector<int> prev_node(n, -1);
      std::vector<std::size_t> prev_edge(n, 0);
      using Item = std::pair<double, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
      dist[source] = 0.0;
      heap.push({0.0, source});
      while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (std::size_t i = 0; i < adj_[u].size(); ++i) {
          const FlowEdge& e = adj_[u][i];
          if (e.cap <= 0) continue;
          // Johnson potentials keep reduced costs non-negative; clamp the
          // rounding dust so Dijkstra's invariant holds.
          double rc = std::max(0.0, e.cost + potential[u] - potential[e.to]);
          if (dist[u] + rc < dist[e.to]) {
            dist[e.to] = dist[u] + rc;
            prev_node[e.to] = u;
            prev_edge[e.to] = i;
            heap.push({dist[e.to], e.to});
          }
        }
      }
      if (prev_node[sink] < 0 && sink != source) {
        fail(ErrorKind::internal, "transport network disconnected before demand was met");
      }
      for (int v = 0; v < n; ++v) {
        if (std::isfinite(dist[v])) potential[v] += dist[v];
      }
      long long push = target_flow - flow;
      for (int v = sink; v != source; v = prev_node[v]) {
        push = std::min(push, adj_[prev_node[v]][prev_edge[v]].cap);
      }
      for (int v = sink; v != source; v = prev_node[v]) {
        FlowEdge& e = adj_[prev_node[v]][prev_edge[v]];
        e.cap -= push;
        adj_[v][e.rev].cap += push;
        total_cost += static_cast<double>(push) * e.cost;
      }
      flow += push;
    }
    return total_cost;
  }

 private:
  std::vector<std::vector<FlowEdge>> adj_;
};

void validate_cost(const std::vector<std::vector<double>>& cost) {
  if (cost.empty() || cost.front().empty()) {
    fail(ErrorKind::invalid_argument, "transport cost matrix must be non-empty on both sides");
  }
  const std::size_t cols = cost.front().size();
  for (const auto& row : cost) {
    if (row.size() != cols) {
      fail(ErrorKind::invalid_argument, "transport cost matrix must be rectangular");
    }
    for (double c : row) {
      if (!std::isfinite(c) || c < 0.0) {
        fail(ErrorKind::invalid_argument, "transport costs must be finite and non-negative");
      }
    }
  }
}

EmdResult solve_exact(const std::vector<std::vector<double>>& cost) {
  const int ka = static_cast<int>(cost.size());
  const int kb = static_cast<int>(cost.front().size());
  // Uniform masses 1/ka and 1/kb become integral after scaling by ka*kb:
  // every row supplies kb units, every column demands ka units.
  const int source = 0;
  const int sink = ka + kb + 1;
  FlowGraph g(ka + kb + 2);
  for (int i = 0; i < ka; ++i) g.add_edge(source, 1 + i, kb, 0.0);
  for (int j = 0; j < kb; ++j) g.add_edge(1 + ka + j, sink, ka, 0.0);
  for (int i = 0; i < ka; ++i) {
    for (int j = 0; j < kb; ++j) {
      g.add_edge(1 + i, 1 + ka + j, kb, cost[i][j]);
    }
  }
  const long long units = static_cast<long long>(ka) * kb;
  double total = g.min_cost_flow(source, sink, units);
  EmdResult r;
  r.distance = total / static_cast<double>(units);
  r.exact = true;
  r.tolerance = 0.0;
  return r;
}

// Entropic approximation for large instances: log-domain Sinkhorn followed by
// rounding to a feasible plan, so the reported distance is attained by a real
// transport plan and the tolerance bounds its gap to the optimum.
EmdResult solve_entropic(const std::vector<std::vector<double>>& cost) {
  const std::size_t ka = cost.size();
  const std::size_t kb = cost.front().size();
  double max_cost = 0.0;
  for (const auto& row : cost) {
    for (double c : row) max_cost = std::max(max_cost, c);
  }
  if (max_cost == 0.0) return {0.0, true, 0.0};

  const double eps = max_cost * 1e-3;
  const double ra = 1.0 / static_cast<double>(ka);
  const double rb = 1.0 / static_cast<double>(kb);
  std::vector<double> f(ka, 0.0), gdual(kb, 0.0);

  auto logsumexp_row = [&](std::size_t i) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < kb; ++j) {
      m = std::max(m, (gdual[j] - cost[i][j]) / eps);
    }
    double s = 0.0;
    for (std::size_t j = 0; j < kb; ++j) {
      s += std::exp((gdual[j] - cost[i][j]) / eps - m);
    }
    return m + std::log(s);
  };
  auto logsumexp_col = [&](std::size_t j) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ka; ++i) {
      m = std::max(m, (f[i] - cost[i][j]) / eps);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < ka; ++i) {
      s += std::exp((f[i] - cost[i][j]) / eps - m);
    }
    return m + std::log(s);
  };

  const int max_iters = 2000;
  for (int it = 0; it < max_iters; ++it) {
    for (std::size_t i = 0; i < ka; ++i) f[i] = eps * (std::log(ra) - logsumexp_row(i));
    for (std::size_t j = 0; j < kb; ++j) gdual[j] = eps * (std::log(rb) - logsumexp_col(j));
    // Row update immediately after the column update leaves rows slightly off;
    // measure the violation on rows to decide convergence.
    double violation = 0.0;
    for (std::size_t i = 0; i < ka; ++i) {
      double row_mass = 0.0;
      for (std::size_t j = 0; j < kb; ++j) {
        row_mass += std::exp((f[i] + gdual[j] - cost[i][j]) / eps);
      }
      violation += std::fabs(row_mass - ra);
    }
    if (violation < 1e-9) break;
  }

  std::vector<std::vector<double>> plan(ka, std::vector<double>(kb));
  for (std::size_t i = 0; i < ka; ++i) {
    for (std::size_t j = 0; j < kb; ++j) {
      plan[i][j] = std::exp((f[i] + gdual[j] - cost[i][j]) / eps);
    }
  }
  // Round to exact marginals: shrink overfull rows and columns, then spread
  // the leftover mass as a rank-one correction.
  std::vector<double> row_sum(ka, 0.0), col_sum(kb, 0.0);
  for (std::size_t i = 0; i < ka; ++i) {
    for (std::size_t j = 0; j < kb; ++j) row_sum[i] += plan[i][j];
  }
  for (std::size_t i = 0; i < ka; ++i) {
    double scale = row_sum[i] > ra ? ra / row_sum[i] : 1.0;
    for (std::size_t j = 0; j < kb; ++j) plan[i][j] *= scale;
  }
  for (std::size_t j = 0; j < kb; ++j) {
    for (std::size_t i = 0; i < ka; ++i) col_sum[j] += plan[i][j];
  }
  for (std::size_t j = 0; j < kb; ++j) {
    double scale = col_sum[j] > rb ? rb / col_sum[j] : 1.0;
    for (std::size_t i = 0; i < ka; ++i) plan[i][j] *= scale;
  }
  std::vector<double> row_def(ka, 0.0), col_def(kb, 0.0);
  double deficit = 0.0;
  for (std::size_t i = 0; i < ka; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < kb; ++j) s += plan[i][j];
    row_def[i] = ra - s;
    deficit += row_def[i];
  }
  for (std::size_t j = 0; j < kb; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < ka; ++i) s += plan[i][j];
    col_def[j] = rb - s;
  }
  if (deficit > 0.0) {
    for (std::size_t i = 0; i < ka; ++i) {
      for (std::size_t j = 0; j < kb; ++j) {
        plan[i][j] += row_def[i] * col_def[j] / deficit;
      }
    }
  }

  double value = 0.0;
  for (std::size_t i = 0; i < ka; ++i) {
    for (std::size_t j = 0; j < kb; ++j) value += plan[i][j] * cost[i][j];
  }
  EmdResult r;
  r.distance = value;
  r.exact = false;
  // Feasible-plan value minus the entropic duality gap plus rounding spill.
  r.tolerance = 2.0 * eps * (std::log(static_cast<double>(ka)) +
                             std::log(static_cast<double>(kb)) + 2.0) +
                2.0 * deficit * max_cost;
  return r;
}

}  // namespace

EmdResult emd_uniform(const std::vector<std::vector<double>>& cost) {
  validate_cost(cost);
  const std::size_t product = cost.size() * cost.front().size();
  if (product <= 10000) return solve_exact(cost);
  return solve_entropic(cost);
}

}  // namespace cdt
