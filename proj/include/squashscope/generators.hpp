#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "graph.hpp"

namespace squashscope {

// Small helpers over a raw 64-bit engine. The standard distributions are
// implementation-defined, so they are avoided wherever bit-identical output
// across toolchains matters.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [0, bound) by rejection, bound > 0.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

enum class GraphKind { path, cycle, complete, tree, grid, erdos_renyi, molecule_like };

inline std::string to_string(GraphKind k) {
  switch (k) {
    case GraphKind::path: return "path";
    case GraphKind::cycle: return "cycle";
    case GraphKind::complete: return "complete";
    case GraphKind::tree: return "tree";
    case GraphKind::grid: return "grid";
    case GraphKind::erdos_renyi: return "erdos_renyi";
    case GraphKind::molecule_like: return "molecule_like";
  }
  return "?";
}

inline GraphKind parse_graph_kind(const std::string& s) {
  if (s == "path") return GraphKind::path;
  if (s == "cycle") return GraphKind::cycle;
  if (s == "complete") return GraphKind::complete;
  if (s == "tree") return GraphKind::tree;
  if (s == "grid") return GraphKind::grid;
  if (s == "erdos_renyi" || s == "er") return GraphKind::erdos_renyi;
  if (s == "molecule_like" || s == "molecule") return GraphKind::molecule_like;
  throw InvalidArgument("unknown graph kind '" + s + "'");
}

/// Parameters for `generate`. Fields not used by a kind are ignored.
struct GeneratorParams {
  GraphKind kind = GraphKind::path;
  int n = 0;             // path, cycle, complete, erdos_renyi, molecule_like
  int arity = 2;         // tree
  int depth = 1;         // tree
  int width = 0;         // grid
  int height = 0;        // grid
  double p = 0.5;        // erdos_renyi
  int extra_cycles = 1;  // molecule_like
  std::uint64_t seed = 0;
};

inline constexpr int kMaxGeneratorAttempts = 1000;

inline Graph make_path(int n) {
  if (n < 2) throw InvalidArgument("path needs n >= 2");
  std::vector<Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph::from_edges(n, std::move(e));
}

inline Graph make_cycle(int n) {
  if (n < 3) throw InvalidArgument("cycle needs n >= 3");
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return Graph::from_edges(n, std::move(e));
}

inline Graph make_complete(int n) {
  if (n < 2) throw InvalidArgument("complete graph needs n >= 2");
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return Graph::from_edges(n, std::move(e));
}

/// Full `arity`-ary tree of the given depth, nodes numbered level by level.
/// The root is node 0 and the children of node i are arity*i+1 .. arity*i+arity.
inline Graph make_tree(int arity, int depth) {
  if (arity < 1 || depth < 1) throw InvalidArgument("tree needs arity >= 1 and depth >= 1");
  long long n = 1, level = 1;
  for (int h = 0; h < depth; ++h) {
    level *= arity;
    n += level;
    if (n > 1'000'000) throw InvalidArgument("tree too large");
  }
  std::vector<Edge> e;
  for (long long c = 1; c < n; ++c) e.emplace_back(static_cast<int>((c - 1) / arity), static_cast<int>(c));
  return Graph::from_edges(static_cast<int>(n), std::move(e));
}

/// Index of the first leaf (left-most node on the deepest level).
inline int tree_first_leaf(int arity, int depth) {
  long long first = 0, level = 1;
  for (int h = 0; h < depth; ++h) {
    first += level;
    level *= arity;
  }
  return static_cast<int>(first);
}

inline Graph make_grid(int width, int height) {
  if (width < 1 || height < 1 || width * height < 2) throw InvalidArgument("grid needs at least 2 cells");
  std::vector<Edge> e;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const int id = r * width + c;
      if (c + 1 < width) e.emplace_back(id, id + 1);
      if (r + 1 < height) e.emplace_back(id, id + width);
    }
  }
  return Graph::from_edges(width * height, std::move(e));
}

inline Graph make_erdos_renyi(int n, double p, std::uint64_t seed) {
  if (n < 3) throw InvalidArgument("erdos_renyi needs n >= 3 for a non-bipartite graph");
  if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("erdos_renyi needs 0 < p <= 1");
  for (int attempt = 0; attempt < kMaxGeneratorAttempts; ++attempt) {
    Rng rng(mix_seed(seed, attempt));
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (uniform01(rng) < p) e.emplace_back(i, j);
    Graph g = Graph::from_edges(n, std::move(e));
    if (g.validated()) return g;
  }
  throw ConvergenceError("erdos_renyi: no connected non-bipartite sample in " +
                         std::to_string(kMaxGeneratorAttempts) + " attempts (p too small?)");
}

/// Random labelled tree (uniform via a Pruefer sequence) plus `extra_cycles`
/// chords between distinct non-adjacent nodes.
inline Graph make_molecule_like(int n, int extra_cycles, std::uint64_t seed) {
  if (n < 3) throw InvalidArgument("molecule_like needs n >= 3");
  if (extra_cycles < 1) throw InvalidArgument("molecule_like needs extra_cycles >= 1 (a tree is bipartite)");
  const long long max_chords = static_cast<long long>(n) * (n - 1) / 2 - (n - 1);
  if (extra_cycles > max_chords) throw InvalidArgument("molecule_like: too many extra cycles for n");
  for (int attempt = 0; attempt < kMaxGeneratorAttempts; ++attempt) {
    Rng rng(mix_seed(seed, attempt));
    std::vector<int> prufer(n - 2);
    for (int& x : prufer) x = static_cast<int>(uniform_below(rng, n));
    std::vector<int> remaining(n, 1);
    for (int x : prufer) ++remaining[x];
    std::vector<Edge> e;
    for (int x : prufer) {
      int leaf = 0;
      while (remaining[leaf] != 1) ++leaf;
      e.emplace_back(leaf, x);
      --remaining[leaf];
      --remaining[x];
    }
    int a = -1, b = -1;
    for (int i = 0; i < n; ++i) {
      if (remaining[i] == 1) (a < 0 ? a : b) = i;
    }
    e.emplace_back(a, b);

    Matrix adj = Matrix::Zero(n, n);
    for (auto [x, y] : e) adj(x, y) = adj(y, x) = 1.0;
    int added = 0;
    while (added < extra_cycles) {
      int x = static_cast<int>(uniform_below(rng, n));
      int y = static_cast<int>(uniform_below(rng, n));
      if (x == y || adj(x, y) != 0.0) continue;
      adj(x, y) = adj(y, x) = 1.0;
      e.emplace_back(x, y);
      ++added;
    }
    Graph g = Graph::from_edges(n, std::move(e));
    if (g.validated()) return g;
  }
  throw ConvergenceError("molecule_like: no non-bipartite sample in " +
                         std::to_string(kMaxGeneratorAttempts) + " attempts");
}

/// Dispatches on `params.kind`.
///
/// Randomized kinds resample until the graph is connected and non-bipartite.
/// Deterministic kinds return the requested structure as-is; paths, trees,
/// grids and even cycles are bipartite and therefore come back with
/// `validated() == false`.
inline Graph generate(const GeneratorParams& params) {
  switch (params.kind) {
    case GraphKind::path: return make_path(params.n);
    case GraphKind::cycle: return make_cycle(params.n);
    case GraphKind::complete: return make_complete(params.n);
    case GraphKind::tree: return make_tree(params.arity, params.depth);
    case GraphKind::grid: return make_grid(params.width, params.height);
    case GraphKind::erdos_renyi: return make_erdos_renyi(params.n, params.p, params.seed);
    case GraphKind::molecule_like: return make_molecule_like(params.n, params.extra_cycles, params.seed);
  }
  throw InvalidArgument("unknown graph kind");
}

}  // namespace squashscope
