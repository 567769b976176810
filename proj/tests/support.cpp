#include "support.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cdt/serde.hpp"

namespace fs = std::filesystem;

namespace testsupport {

cdt::PlantedRule make_rule(const std::string& tag) {
  cdt::PlantedRule r;
  r.id = "rule-" + tag;
  r.context_marker = "omen-" + tag;
  r.decision_marker = "deed-" + tag;
  r.contra_marker = "balk-" + tag;
  r.statement = "When omen-" + tag + " conditions appear, the group initiates its deed-" + tag +
                " response.";
  r.gate = "Does the scene involve omen-" + tag + " signals?";
  r.action = "The group launches its deed-" + tag + " protocol in response.";
  return r;
}

cdt::PlantedWorld disjoint_world(std::size_t n_rules, std::uint64_t seed) {
  static const char* kTags[] = {"alfa",    "bravo", "charlie", "delta", "echo",
                                "foxtrot", "golf",  "hotel",   "india", "juliett"};
  if (n_rules > sizeof(kTags) / sizeof(kTags[0])) {
    throw std::invalid_argument("disjoint_world supports at most 10 rules");
  }
  cdt::PlantedWorld w;
  for (std::size_t i = 0; i < n_rules; ++i) w.rules.push_back(make_rule(kTags[i]));
  w.seed = seed;
  w.dim = 16;
  w.noise = 0.05;
  return w;
}

cdt::Observation planted_event(const cdt::PlantedRule& rule, const std::string& group,
                               const std::string& id, std::int64_t order_key,
                               const std::string& domain) {
  cdt::Observation o;
  o.id = id;
  o.group = group;
  o.domain = domain;
  o.source = cdt::Source::synthetic;
  o.order_key = order_key;
  std::ostringstream ctx;
  ctx << "Field report " << id << ": " << rule.context_marker
      << " signals persist near the waterfront while crews compare notes.";
  o.context = ctx.str();
  std::ostringstream dec;
  dec << rule.action << " Log entry " << id << ".";
  o.decision = dec.str();
  return o;
}

std::vector<cdt::Observation> planted_corpus(const cdt::PlantedWorld& world,
                                             const CorpusSpec& spec) {
  std::vector<cdt::Observation> out;
  for (std::size_t step = 0; step < spec.per_rule; ++step) {
    for (std::size_t ri = 0; ri < world.rules.size(); ++ri) {
      std::ostringstream id;
      id << spec.id_prefix << "-" << world.rules[ri].id << "-";
      id.fill('0');
      id.width(3);
      id << step;
      const std::int64_t key =
          spec.order_base + static_cast<std::int64_t>(step * world.rules.size() + ri);
      out.push_back(planted_event(world.rules[ri], spec.group, id.str(), key, spec.domain));
    }
  }
  return out;
}

std::string write_corpus_file(const std::string& path, const std::vector<cdt::Observation>& obs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path);
  for (const auto& o : obs) out << cdt::observation_to_json(o).dump() << "\n";
  return path;
}

std::string fresh_dir(const std::string& name) {
  fs::path dir = fs::current_path() / "scratch" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

double uniform(cdt::SplitMix64& g, double lo, double hi) {
  return lo + g.next_unit() * (hi - lo);
}

std::vector<double> random_vector(cdt::SplitMix64& g, std::size_t dim) {
  std::vector<double> v(dim);
  for (auto& x : v) x = uniform(g, -1.0, 1.0);
  return v;
}

double assignment_emd(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  if (n == 0) throw std::invalid_argument("assignment_emd needs a nonempty matrix");
  for (const auto& row : cost) {
    if (row.size() != n) throw std::invalid_argument("assignment_emd needs a square matrix");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += cost[i][perm[i]];
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(n);
}

std::optional<double> reference_bss(const std::vector<cdt::BssItem>& a,
                                    const std::vector<cdt::BssItem>& b,
                                    const cdt::BssOptions& opt) {
  struct Pair {
    double context;
    double action;
    std::string lo, hi;  // unordered id pair
    std::string first, second;
  };
  std::vector<Pair> pairs;
  for (const auto& ia : a) {
    for (const auto& ib : b) {
      if (opt.exclude_same_id && ia.id == ib.id) continue;
      double c = cdt::cosine(ia.context, ib.context);
      if (!(c > opt.tau)) continue;
      Pair p;
      p.context = c;
      p.action = cdt::cosine(ia.action, ib.action);
      p.lo = std::min(ia.id, ib.id);
      p.hi = std::max(ia.id, ib.id);
      p.first = ia.id;
      p.second = ib.id;
      pairs.push_back(std::move(p));
    }
  }
  if (pairs.empty()) return std::nullopt;
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    if (x.context != y.context) return x.context > y.context;
    if (x.lo != y.lo) return x.lo < y.lo;
    if (x.hi != y.hi) return x.hi < y.hi;
    if (x.first != y.first) return x.first < y.first;
    return x.second < y.second;
  });
  if (pairs.size() > opt.top_n) pairs.resize(opt.top_n);
  double sum = 0.0;
  for (const auto& p : pairs) sum += p.action;
  return sum / static_cast<double>(pairs.size());
}

namespace {

// count_less + (count_equal + 1)/2 midrank, computed per element.
std::vector<double> reference_midranks(const std::vector<double>& pooled) {
  std::vector<double> ranks(pooled.size());
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    std::size_t less = 0;
    std::size_t equal = 0;
    for (const double v : pooled) {
      if (v < pooled[i]) ++less;
      if (v == pooled[i]) ++equal;
    }
    ranks[i] = static_cast<double>(less) + (static_cast<double>(equal) + 1.0) / 2.0;
  }
  return ranks;
}

double min_u(double rank_sum_x, std::size_t nx, std::size_t ny) {
  double ux = rank_sum_x - static_cast<double>(nx) * (static_cast<double>(nx) + 1.0) / 2.0;
  return std::min(ux, static_cast<double>(nx * ny) - ux);
}

}  // namespace

double reference_mwu_p(const std::vector<double>& x, const std::vector<double>& y,
                       double* u_out) {
  std::vector<double> pooled = x;
  pooled.insert(pooled.end(), y.begin(), y.end());
  const std::size_t n = pooled.size();
  const std::size_t nx = x.size();
  std::vector<double> ranks = reference_midranks(pooled);

  double observed_sum = 0.0;
  for (std::size_t i = 0; i < nx; ++i) observed_sum += ranks[i];
  const double u_obs = min_u(observed_sum, nx, n - nx);
  if (u_out != nullptr) *u_out = u_obs;

  // prev_permutation over a descending 1..1 0..0 mask walks every
  // nx-element selection exactly once.
  std::vector<char> pick(n, 0);
  for (std::size_t i = 0; i < nx; ++i) pick[i] = 1;
  std::sort(pick.begin(), pick.end(), std::greater<char>());
  std::size_t total = 0;
  std::size_t at_or_below = 0;
  do {
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (pick[i]) rank_sum += ranks[i];
    }
    ++total;
    if (min_u(rank_sum, nx, n - nx) <= u_obs + 1e-9) ++at_or_below;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return static_cast<double>(at_or_below) / static_cast<double>(total);
}

}  // namespace testsupport
