#pragma once

#include <algorithm>
#include <cstdint>
#include <queue>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"

namespace squashscope {

using Edge = std::pair<int, int>;

/// Undirected simple graph on nodes 0..n-1.
///
/// Immutable after construction. Connectivity and bipartiteness are computed
/// once; `validated()` is the standing assumption of the theory (connected and
/// non-bipartite). Operations that only need finite distances check
/// `connected()`, operations that need lambda_{n-1} < 2 check `validated()`.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph from an edge list. Rejects self-loops, duplicate edges
  /// and out-of-range endpoints.
  static Graph from_edges(int n, std::vector<Edge> edges) {
    if (n < 1) throw InvalidArgument("graph needs at least one node");
    Graph g;
    g.n_ = n;
    g.adjacency_ = Matrix::Zero(n, n);
    g.neighbors_.assign(n, {});
    for (auto [a, b] : edges) {
      if (a < 0 || b < 0 || a >= n || b >= n) {
        throw InvalidGraph("edge (" + std::to_string(a) + "," + std::to_string(b) +
                           ") out of range for n=" + std::to_string(n));
      }
      if (a == b) throw InvalidGraph("self-loop at node " + std::to_string(a));
      if (g.adjacency_(a, b) != 0.0) {
        throw InvalidGraph("duplicate edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
      }
      g.adjacency_(a, b) = g.adjacency_(b, a) = 1.0;
      g.neighbors_[a].push_back(b);
      g.neighbors_[b].push_back(a);
      g.edges_.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(g.edges_.begin(), g.edges_.end());
    for (auto& nb : g.neighbors_) std::sort(nb.begin(), nb.end());
    g.degrees_.resize(n);
    for (int v = 0; v < n; ++v) g.degrees_[v] = static_cast<int>(g.neighbors_[v].size());
    g.classify();
    return g;
  }

  int n() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Matrix& adjacency() const { return adjacency_; }
  const std::vector<int>& degrees() const { return degrees_; }
  int degree(int v) const { return degrees_.at(v); }
  const std::vector<int>& neighbors(int v) const { return neighbors_.at(v); }
  bool has_edge(int a, int b) const { return adjacency_(a, b) != 0.0; }

  int max_degree() const { return *std::max_element(degrees_.begin(), degrees_.end()); }
  int min_degree() const { return *std::min_element(degrees_.begin(), degrees_.end()); }

  bool connected() const { return components_.size() == 1; }
  bool bipartite() const { return bipartite_; }
  bool validated() const { return connected() && !bipartite_; }

  /// Connected components, each sorted, ordered by smallest member.
  const std::vector<std::vector<int>>& components() const { return components_; }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  void classify() {
    std::vector<int> color(n_, -1);
    bipartite_ = true;
    components_.clear();
    for (int s = 0; s < n_; ++s) {
      if (color[s] != -1) continue;
      std::vector<int> comp;
      std::queue<int> q;
      color[s] = 0;
      q.push(s);
      while (!q.empty()) {
        int x = q.front();
        q.pop();
        comp.push_back(x);
        for (int y : neighbors_[x]) {
          if (color[y] == -1) {
            color[y] = 1 - color[x];
            q.push(y);
          } else if (color[y] == color[x]) {
            bipartite_ = false;
          }
        }
      }
      std::sort(comp.begin(), comp.end());
      components_.push_back(std::move(comp));
    }
  }

  int n_ = 0;
  std::vector<Edge> edges_;
  Matrix adjacency_;
  std::vector<int> degrees_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<int>> components_;
  bool bipartite_ = false;
};

inline std::string describe_components(const Graph& g) {
  std::ostringstream os;
  os << g.components().size() << " components: ";
  for (std::size_t c = 0; c < g.components().size(); ++c) {
    if (c) os << " | ";
    os << "{";
    const auto& comp = g.components()[c];
    for (std::size_t i = 0; i < comp.size(); ++i) {
      if (i) os << ",";
      if (i == 8 && comp.size() > 10) {
        os << "... (" << comp.size() << " nodes)";
        break;
      }
      os << comp[i];
    }
    os << "}";
  }
  return os.str();
}

inline void require_connected(const Graph& g, const char* op) {
  if (!g.connected()) {
    throw InvalidGraph(std::string(op) + ": graph is disconnected, " + describe_components(g));
  }
}

inline void require_validated(const Graph& g, const char* op) {
  require_connected(g, op);
  if (g.bipartite()) {
    throw InvalidGraph(std::string(op) +
                       ": graph is bipartite (normalized Laplacian has eigenvalue 2)");
  }
}

inline void require_pair(const Graph& g, NodePair p, bool allow_equal = false) {
  if (p.v < 0 || p.u < 0 || p.v >= g.n() || p.u >= g.n()) {
    throw InvalidArgument("node pair (" + std::to_string(p.v) + "," + std::to_string(p.u) +
                          ") out of range for n=" + std::to_string(g.n()));
  }
  if (!allow_equal && p.v == p.u) throw InvalidArgument("node pair must have v != u");
}

/// BFS distances from `source`; -1 marks unreachable nodes.
inline std::vector<int> bfs_distances(const Graph& g, int source) {
  std::vector<int> dist(g.n(), -1);
  std::queue<int> q;
  dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    int x = q.front();
    q.pop();
    for (int y : g.neighbors(x)) {
      if (dist[y] == -1) {
        dist[y] = dist[x] + 1;
        q.push(y);
      }
    }
  }
  return dist;
}

/// Geodesic distance d_G(v,u).
inline int shortest_distance(const Graph& g, NodePair p) {
  require_connected(g, "shortest_distance");
  require_pair(g, p, /*allow_equal=*/true);
  return bfs_distances(g, p.v)[p.u];
}

/// All-pairs hop distances (n BFS sweeps).
inline std::vector<std::vector<int>> all_pairs_distances(const Graph& g) {
  require_connected(g, "all_pairs_distances");
  std::vector<std::vector<int>> d(g.n());
  for (int v = 0; v < g.n(); ++v) d[v] = bfs_distances(g, v);
  return d;
}

inline int diameter(const Graph& g) {
  int diam = 0;
  for (const auto& row : all_pairs_distances(g)) diam = std::max(diam, *std::max_element(row.begin(), row.end()));
  return diam;
}

/// Number of walks of length r = d_G(v,u) from v to u, i.e. (A^r)_{vu}.
/// Walks of exactly the geodesic length are simple shortest paths.
inline std::uint64_t count_shortest_paths(const Graph& g, NodePair p) {
  require_connected(g, "count_shortest_paths");
  require_pair(g, p);
  const int r = shortest_distance(g, p);
  std::vector<std::uint64_t> walks(g.n(), 0), next(g.n());
  walks[p.u] = 1;
  for (int step = 0; step < r; ++step) {
    std::fill(next.begin(), next.end(), 0);
    for (int x = 0; x < g.n(); ++x) {
      for (int y : g.neighbors(x)) {
        if (__builtin_add_overflow(next[x], walks[y], &next[x])) {
          throw NumericalError("count_shortest_paths: 64-bit overflow");
        }
      }
    }
    walks.swap(next);
  }
  return walks[p.v];
}

}  // namespace squashscope
