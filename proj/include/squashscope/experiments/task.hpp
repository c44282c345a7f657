#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "../generators.hpp"
#include "../graph.hpp"
#include "../spectral.hpp"

namespace squashscope::experiments {

enum class MixingKind { tanh_sum, exp_sum };

inline std::string to_string(MixingKind k) { return k == MixingKind::tanh_sum ? "tanh_sum" : "exp_sum"; }

inline MixingKind parse_mixing_kind(const std::string& s) {
  if (s == "tanh_sum" || s == "tanh") return MixingKind::tanh_sum;
  if (s == "exp_sum" || s == "exp") return MixingKind::exp_sum;
  throw InvalidArgument("unknown mixing kind '" + s + "'");
}

inline double mixing_target(MixingKind k, double s) { return k == MixingKind::tanh_sum ? std::tanh(s) : std::exp(s); }

struct TaskSpec {
  MixingKind mixing_kind = MixingKind::tanh_sum;
  double lo = 0.0;
  double hi = 1.0;
  double alpha = 0.5;
  std::vector<Graph> graphs;
  std::uint64_t seed = 0;
  int instances_per_graph = 1;
  double test_fraction = 0.1;

  void validate() const {
    if (!(lo < hi)) throw InvalidArgument("task: input interval needs lo < hi");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("task: alpha must lie in [0, 1]");
    if (graphs.empty()) throw InvalidArgument("task: graph list is empty");
    if (instances_per_graph < 1) throw InvalidArgument("task: instances_per_graph must be >= 1");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidArgument("task: test_fraction must lie in (0, 1)");
  }
};

struct Instance {
  int graph_index = 0;
  NodePair pair;
  Matrix features;  // n x 1, zero except at pair.v and pair.u
  double target = 0.0;
};

struct Dataset {
  std::vector<Instance> train;
  std::vector<Instance> test;
};

/// All unordered pairs sorted by commute time (ties broken lexicographically);
/// returns the pair at rank floor(alpha * (P - 1)).
inline NodePair select_pair_at_quantile(const Graph& g, double alpha, const CommuteTable& table) {
  if (g.n() < 2) throw InvalidArgument("select_pair_at_quantile: graph needs at least two nodes");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("select_pair_at_quantile: alpha must lie in [0, 1]");
  struct Entry {
    double tau;
    int v, u;
  };
  std::vector<Entry> pairs;
  const double scale = 1e9 / std::max(1.0, table.tau.maxCoeff());
  for (int v = 0; v < g.n(); ++v)
    for (int u = v + 1; u < g.n(); ++u) pairs.push_back({std::round(table.tau(v, u) * scale), v, u});
  std::sort(pairs.begin(), pairs.end(), [](const Entry& a, const Entry& b) {
    if (a.tau != b.tau) return a.tau < b.tau;
    return std::pair(a.v, a.u) < std::pair(b.v, b.u);
  });
  const auto rank = static_cast<std::size_t>(std::floor(alpha * (pairs.size() - 1)));
  return {pairs[rank].v, pairs[rank].u};
}

inline NodePair select_pair_at_quantile(const Graph& g, double alpha) {
  if (g.n() < 2) throw InvalidArgument("select_pair_at_quantile: graph needs at least two nodes");
  require_connected(g, "select_pair_at_quantile");
  return select_pair_at_quantile(g, alpha, commute_time_spectral(g));
}

/// Features i.i.d. uniform on [lo, hi) at the selected pair, targets exact,
/// then a seeded shuffle and a train/test split.
inline Dataset build_dataset(const TaskSpec& spec, const std::vector<NodePair>& pairs) {
  spec.validate();
  if (pairs.size() != spec.graphs.size()) throw InvalidArgument("build_dataset: one pair per graph required");
  Rng rng(mix_seed(spec.seed, 0));
  std::vector<Instance> all;
  for (std::size_t gi = 0; gi < spec.graphs.size(); ++gi) {
    for (int r = 0; r < spec.instances_per_graph; ++r) {
      Instance inst;
      inst.graph_index = static_cast<int>(gi);
      inst.pair = pairs[gi];
      inst.features = Matrix::Zero(spec.graphs[gi].n(), 1);
      const double a = uniform_in(rng, spec.lo, spec.hi);
      const double b = uniform_in(rng, spec.lo, spec.hi);
      inst.features(inst.pair.v, 0) = a;
      inst.features(inst.pair.u, 0) = b;
      inst.target = mixing_target(spec.mixing_kind, a + b);
      all.push_back(std::move(inst));
    }
  }
  Rng shuffle(mix_seed(spec.seed, 1));
  for (std::size_t i = all.size(); i > 1; --i) std::swap(all[i - 1], all[uniform_below(shuffle, i)]);
  std::size_t n_test = std::max<std::size_t>(1, static_cast<std::size_t>(std::round(spec.test_fraction * all.size())));
  if (n_test >= all.size()) throw InvalidArgument("build_dataset: not enough instances for a train/test split");
  Dataset ds;
  ds.test.assign(all.begin(), all.begin() + n_test);
  ds.train.assign(all.begin() + n_test, all.end());
  return ds;
}

inline std::vector<NodePair> select_pairs(const std::vector<Graph>& graphs, double alpha) {
  std::vector<NodePair> out;
  for (const Graph& g : graphs) out.push_back(select_pair_at_quantile(g, alpha));
  return out;
}

inline Dataset build_dataset(const TaskSpec& spec) { return build_dataset(spec, select_pairs(spec.graphs, spec.alpha)); }

/// Closed-form sup over the box of |d^2 target / dx dy|.
inline double analytic_max_mixing(MixingKind kind, double lo, double hi) {
  if (!(lo < hi)) throw InvalidArgument("analytic_max_mixing: need lo < hi");
  if (kind == MixingKind::exp_sum) return std::exp(2.0 * std::max(lo, hi));
  // f(s) = 2|tanh s| sech^2 s is even, increasing on [0, s*] and decreasing after.
  auto f = [](double s) {
    const double t = std::tanh(s);
    return 2.0 * std::abs(t) * (1.0 - t * t);
  };
  const double s_star = std::atanh(1.0 / std::sqrt(3.0));
  const double a = 2.0 * lo, b = 2.0 * hi;
  double best = std::max(f(a), f(b));
  if (a <= s_star && s_star <= b) best = std::max(best, f(s_star));
  if (a <= -s_star && -s_star <= b) best = std::max(best, f(-s_star));
  return best;
}

/// Corpus of molecule-like graphs with n uniform in [n_min, n_max].
inline std::vector<Graph> molecule_corpus(int count, int n_min, int n_max, std::uint64_t seed) {
  if (count < 1 || n_min < 4 || n_max < n_min) throw InvalidArgument("molecule_corpus: bad parameters");
  Rng rng(seed);
  std::vector<Graph> out;
  for (int i = 0; i < count; ++i) {
    const int n = n_min + static_cast<int>(uniform_below(rng, n_max - n_min + 1));
    const int cycles = 1 + static_cast<int>(uniform_below(rng, 3));
    out.push_back(make_molecule_like(n, cycles, mix_seed(seed, i)));
  }
  return out;
}

/// Smallest depth that avoids under-reaching on every graph: max ceil(diam/2).
inline int under_reaching_floor(const std::vector<Graph>& graphs) {
  int m = 1;
  for (const Graph& g : graphs) m = std::max(m, (diameter(g) + 1) / 2);
  return m;
}

}  // namespace squashscope::experiments
