#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "squashscope/generators.hpp"
#include "squashscope/graph.hpp"
#include "squashscope/graph_io.hpp"

using namespace squashscope;

namespace {

// Brute-force count of simple paths with exactly `len` edges from a to b.
std::uint64_t count_simple_paths(const Graph& g, int a, int b, int len) {
  std::vector<char> seen(g.n(), 0);
  std::function<std::uint64_t(int, int)> dfs = [&](int at, int left) -> std::uint64_t {
    if (left == 0) return at == b ? 1 : 0;
    std::uint64_t total = 0;
    seen[at] = 1;
    for (int nb : g.neighbors(at))
      if (!seen[nb]) total += dfs(nb, left - 1);
    seen[at] = 0;
    return total;
  };
  return dfs(a, len);
}

std::vector<Graph> small_corpus() {
  std::vector<Graph> gs = {make_complete(4), make_cycle(5), make_cycle(6), make_path(6), make_grid(3, 3),
                           make_tree(2, 2)};
  for (std::uint64_t s = 0; s < 6; ++s) {
    gs.push_back(make_erdos_renyi(9, 0.35, s));
    gs.push_back(make_molecule_like(10, 2, s));
  }
  return gs;
}

}  // namespace

TEST(Generators, CompleteGraph) {
  Graph g = make_complete(3);
  EXPECT_EQ(g.edge_count(), 3u);
  for (int v = 0; v < 3; ++v) EXPECT_EQ(g.degree(v), 2);
  EXPECT_TRUE(g.validated());
}

TEST(Generators, PathIsChain) {
  Graph g = make_path(5);
  EXPECT_EQ(g.edge_count(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_TRUE(g.has_edge(i, i + 1));
  EXPECT_TRUE(g.connected());
  EXPECT_TRUE(g.bipartite());
  EXPECT_FALSE(g.validated());
}

TEST(Generators, BinaryTree) {
  Graph g = make_tree(2, 2);
  EXPECT_EQ(g.n(), 7);
  EXPECT_EQ(g.degree(0), 2);
  for (int leaf = 3; leaf < 7; ++leaf) EXPECT_EQ(g.degree(leaf), 1);
  EXPECT_EQ(tree_first_leaf(2, 2), 3);
  EXPECT_EQ(make_tree(2, 3).n(), 15);
}

TEST(Generators, InvariantsHold) {
  for (const Graph& g : small_corpus()) {
    const Matrix& A = g.adjacency();
    EXPECT_TRUE(A.isApprox(A.transpose()));
    EXPECT_EQ(A.diagonal().cwiseAbs().sum(), 0.0);
    int deg_sum = 0;
    for (int v = 0; v < g.n(); ++v) {
      EXPECT_EQ(g.degree(v), static_cast<int>(A.row(v).sum()));
      deg_sum += g.degree(v);
    }
    EXPECT_EQ(static_cast<std::size_t>(deg_sum), 2 * g.edge_count());
  }
}

TEST(Generators, RandomKindsAreValidatedAndDeterministic) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Graph a = make_molecule_like(20, 3, s);
    Graph b = make_molecule_like(20, 3, s);
    EXPECT_TRUE(a.validated());
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.edge_count(), 19u + 3u);
    Graph e1 = make_erdos_renyi(12, 0.3, s), e2 = make_erdos_renyi(12, 0.3, s);
    EXPECT_TRUE(e1.validated());
    EXPECT_EQ(e1, e2);
  }
  EXPECT_FALSE(make_molecule_like(20, 3, 1) == make_molecule_like(20, 3, 2));
}

TEST(Generators, AttemptCapAndBadParameters) {
  EXPECT_THROW(make_erdos_renyi(30, 1e-6, 1), ConvergenceError);
  EXPECT_THROW(make_molecule_like(10, 0, 1), InvalidArgument);
  EXPECT_THROW(make_path(1), InvalidArgument);
  EXPECT_THROW(generate({.kind = GraphKind::cycle, .n = 2}), InvalidArgument);
}

TEST(Graph, RejectsSelfLoopsAndDuplicates) {
  EXPECT_THROW(Graph::from_edges(3, {{0, 0}}), InvalidGraph);
  EXPECT_THROW(Graph::from_edges(3, {{0, 1}, {1, 0}}), InvalidGraph);
  EXPECT_THROW(Graph::from_edges(3, {{0, 3}}), InvalidGraph);
}

TEST(Graph, DisconnectedIsFlagged) {
  Graph g = Graph::from_edges(5, {{0, 1}, {1, 2}, {2, 0}, {3, 4}});
  EXPECT_FALSE(g.connected());
  EXPECT_FALSE(g.validated());
  EXPECT_EQ(g.components().size(), 2u);
  try {
    require_connected(g, "op");
    FAIL();
  } catch (const InvalidGraph& e) {
    EXPECT_NE(std::string(e.what()).find("{3,4}"), std::string::npos);
  }
}

TEST(Distance, Examples) {
  EXPECT_EQ(shortest_distance(make_path(5), {0, 4}), 4);
  Graph k = make_complete(6);
  for (int v = 0; v < 6; ++v)
    for (int u = 0; u < 6; ++u)
      if (u != v) EXPECT_EQ(shortest_distance(k, {v, u}), 1);
  EXPECT_EQ(shortest_distance(make_grid(3, 3), {0, 8}), 4);
  EXPECT_EQ(shortest_distance(make_grid(3, 3), {2, 6}), 4);
  EXPECT_EQ(shortest_distance(make_path(5), {3, 3}), 0);
}

TEST(Distance, IsAMetric) {
  for (const Graph& g : small_corpus()) {
    auto d = all_pairs_distances(g);
    for (int a = 0; a < g.n(); ++a)
      for (int b = 0; b < g.n(); ++b) {
        EXPECT_EQ(d[a][b], d[b][a]);
        for (int c = 0; c < g.n(); ++c) EXPECT_LE(d[a][c], d[a][b] + d[b][c]);
      }
  }
}

TEST(ShortestPaths, Examples) {
  EXPECT_EQ(count_shortest_paths(make_path(5), {0, 4}), 1u);
  EXPECT_EQ(count_shortest_paths(make_cycle(6), {0, 3}), 2u);
  EXPECT_EQ(count_shortest_paths(make_complete(4), {1, 2}), 1u);
  EXPECT_EQ(count_shortest_paths(make_grid(3, 3), {0, 8}), 6u);
}

TEST(ShortestPaths, MatchesBruteForce) {
  for (const Graph& g : small_corpus()) {
    if (g.n() > 10) continue;
    for (int v = 0; v < g.n(); ++v)
      for (int u = 0; u < g.n(); ++u) {
        if (u == v) continue;
        int r = shortest_distance(g, {v, u});
        auto q = count_shortest_paths(g, {v, u});
        EXPECT_GE(q, 1u);
        EXPECT_EQ(q, count_simple_paths(g, v, u, r));
      }
  }
}

TEST(GraphIO, EdgeListParsing) {
  std::istringstream in("0 1\n1 2\n");
  Graph g = parse_edge_list(in);
  EXPECT_EQ(g, make_path(3));

  std::istringstream commented("# header\n0 1 # trailing\n\n1 2\n");
  EXPECT_EQ(parse_edge_list(commented), make_path(3));
}

TEST(GraphIO, ErrorsCarryLineNumbers) {
  std::istringstream loop("0 1\n0 0\n");
  try {
    parse_edge_list(loop);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 2u);
    EXPECT_NE(std::string(e.what()).find("self-loop"), std::string::npos);
  }
  std::istringstream junk("0 1\n1 x\n");
  EXPECT_THROW(parse_edge_list(junk), ParseError);
  std::istringstream three("0 1 2\n");
  EXPECT_THROW(parse_edge_list(three), ParseError);
}

TEST(GraphIO, RoundTripBothFormats) {
  auto dir = std::filesystem::temp_directory_path() / "squashscope_io_test";
  std::filesystem::create_directories(dir);
  std::vector<Graph> gs = small_corpus();
  gs.push_back(Graph::from_edges(6, {{0, 1}, {1, 2}}));  // isolated trailing nodes
  for (std::size_t i = 0; i < gs.size(); ++i) {
    for (auto fmt : {GraphFormat::edge_list, GraphFormat::json}) {
      auto path = (dir / ("g" + std::to_string(i) + (fmt == GraphFormat::json ? ".json" : ".txt"))).string();
      save_graph(gs[i], path, fmt);
      Graph back = load_graph(path);
      EXPECT_EQ(back, gs[i]);
      EXPECT_TRUE(back.adjacency() == gs[i].adjacency());
    }
  }
  std::filesystem::remove_all(dir);
}

TEST(GraphIO, JsonSchema) {
  Graph g = graph_from_json(nlohmann::json::parse(R"({"n": 3, "edges": [[0,1],[1,2],[2,0]]})"));
  EXPECT_EQ(g, make_complete(3));
  EXPECT_THROW(graph_from_json(nlohmann::json::parse(R"({"edges": []})")), ParseError);
}
