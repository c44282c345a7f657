#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "squashscope/bounds.hpp"
#include "squashscope/generators.hpp"

using namespace squashscope;

namespace {

MixingConstants unit() { return {}; }

MixingConstants random_constants(Rng& rng, bool premise, double gamma) {
  MixingConstants c;
  c.w = uniform_in(rng, 0.2, 1.0);
  c.c2 = uniform_in(rng, 0.1, 1.0);
  c.c2nd = uniform_in(rng, 0.0, 1.0);
  if (premise) {
    double slack = 1.0 - c.c2;
    double share = uniform01(rng);
    c.c1 = slack * share * uniform01(rng) / gamma;
    c.omega = slack * (1 - share) * uniform01(rng) * c.w;
  } else {
    c.c1 = uniform_in(rng, 0.0, 1.0);
    c.omega = uniform_in(rng, 0.0, 1.0);
    c.w = uniform_in(rng, 0.2, 2.0);
    c.c_sigma = uniform_in(rng, 0.5, 1.2);
  }
  return c;
}

double gamma_of(const Graph& g) { return std::sqrt(double(g.max_degree()) / g.min_degree()); }

}  // namespace

TEST(MessageMatrix, Kinds) {
  auto sym = build_message_matrix(make_complete(3), MatrixKind::sym);
  EXPECT_NEAR(sym.values(0, 1), 0.5, 1e-15);
  EXPECT_EQ(sym.values(0, 0), 0.0);
  auto rw = build_message_matrix(make_path(3), MatrixKind::rw);
  EXPECT_NEAR(rw.values(1, 0), 0.5, 1e-15);
  EXPECT_EQ(rw.values(1, 1), 0.0);
  EXPECT_NEAR(rw.values(1, 2), 0.5, 1e-15);
  Graph g = make_molecule_like(12, 2, 4);
  EXPECT_TRUE(build_message_matrix(g, MatrixKind::raw).values == g.adjacency());
  auto s = build_message_matrix(g, MatrixKind::sym);
  EXPECT_TRUE(s.values.isApprox(s.values.transpose()));
  auto r = build_message_matrix(g, MatrixKind::rw);
  for (int v = 0; v < g.n(); ++v) EXPECT_NEAR(r.values.row(v).sum(), 1.0, 1e-14);
  for (int v = 0; v < g.n(); ++v)
    for (int u = 0; u < g.n(); ++u) EXPECT_EQ(s.values(v, u) > 0, g.has_edge(v, u));
}

TEST(SOperator, Examples) {
  auto A = build_message_matrix(make_path(3), MatrixKind::sym);
  EXPECT_TRUE(build_S(A, unit()) == A.values);

  MixingConstants c{.omega = 1, .w = 1, .c1 = 1, .c2 = 1};
  auto K = build_message_matrix(make_complete(3), MatrixKind::raw);
  Matrix expect = 3.0 * Matrix::Identity(3, 3) + K.values;
  EXPECT_LT((build_S(K, c) - expect).cwiseAbs().maxCoeff(), 1e-15);

  MixingConstants zero_w;
  zero_w.w = 0;
  EXPECT_THROW(build_S(A, zero_w), InvalidArgument);
}

TEST(SOperator, RowSumBoundUnderPremise) {
  Rng rng(3);
  for (std::uint64_t s = 0; s < 10; ++s) {
    Graph g = make_molecule_like(14, 2, s);
    double gamma = gamma_of(g);
    auto A = build_message_matrix(g, MatrixKind::sym);
    MixingConstants c = random_constants(rng, true, gamma);
    Matrix S = build_S(A, c);
    EXPECT_GE(S.minCoeff(), 0.0);
    Matrix Sk = Matrix::Identity(g.n(), g.n());
    for (int k = 0; k < 6; ++k) {
      Sk = Sk * S;
      EXPECT_LE((Sk.rowwise().sum()).maxCoeff(), gamma + 1e-12);
    }
  }
}

TEST(Qk, SymmetricNonnegativeAndZerothPower) {
  Graph g = make_molecule_like(9, 2, 1);
  for (auto kind : {MatrixKind::sym, MatrixKind::rw, MatrixKind::raw}) {
    auto A = build_message_matrix(g, kind);
    for (int m = 1; m <= 3; ++m)
      for (int k = 0; k < m; ++k) {
        Matrix Q = build_Qk(A, {.omega = 0.3, .w = 0.8, .c1 = 0.2, .c2 = 0.7}, m, k);
        EXPECT_TRUE(Q == Q.transpose());
        EXPECT_GE(Q.minCoeff(), 0.0);
      }
    Matrix Q0 = build_Qk(A, unit(), 1, 0);
    Vector weight = (Matrix(A.values.rowwise().sum().asDiagonal()) + A.values).colwise().sum().transpose();
    Matrix expect = A.values + A.values.transpose() + Matrix(weight.asDiagonal());
    EXPECT_LT((Q0 - expect).cwiseAbs().maxCoeff(), 1e-14);
  }
  EXPECT_THROW(build_Qk(build_message_matrix(g, MatrixKind::sym), unit(), 2, 2), InvalidArgument);
}

TEST(Qk, PathMatchesNaiveLoop) {
  auto A = build_message_matrix(make_path(3), MatrixKind::sym);
  MixingConstants c{.omega = 1, .w = 1, .c1 = 1, .c2 = 1, .c2nd = 1};
  Matrix Q = build_Qk(A, c, 2, 0);
  auto a = oracle::from_eigen(A.values);
  auto S = oracle::S_matrix(a, c);
  for (int v = 0; v < 3; ++v)
    for (int u = 0; u < 3; ++u) EXPECT_NEAR(Q(v, u), oracle::Qk(a, S, 2, 0, v, u), 1e-12);
}

TEST(MixingBound, UnderReaching) {
  Graph g = make_path(5);
  auto A = build_message_matrix(g, MatrixKind::sym);
  BoundReport r = mixing_bound(g, A, {.c2nd = 1}, 1, {0, 4});
  EXPECT_TRUE(r.under_reaching);
  EXPECT_EQ(r.total_bound, 0.0);
  EXPECT_TRUE(r.osq_tilde.is_infinite());
  // Zero also falls out of the matrix products without the explicit guard.
  EXPECT_EQ(mixing_bound_matrices(A, {.c2nd = 1}, 1).total(0, 4), 0.0);
}

TEST(MixingBound, PathExample) {
  Graph g = make_path(3);
  auto A = build_message_matrix(g, MatrixKind::sym);
  BoundReport r = mixing_bound(g, A, unit(), 1, {0, 2});
  EXPECT_NEAR(r.total_bound, 0.5, 1e-15);
  EXPECT_NEAR(r.osq_tilde.value(), 2.0, 1e-14);
  ASSERT_EQ(r.per_k_terms.size(), 1u);
  EXPECT_NEAR(osq_tilde(g, A, unit(), 1, {0, 2}).value(), 2.0, 1e-14);
}

TEST(MixingBound, LinearMessageDropsQ) {
  Graph g = make_molecule_like(10, 2, 5);
  auto A = build_message_matrix(g, MatrixKind::sym);
  MixingConstants c{.omega = 0.2, .w = 0.9, .c1 = 0.1, .c2 = 0.6};
  int m = 3;
  auto Sp = matrix_powers(build_S(A, c), m);
  BoundReport r = mixing_bound(g, A, c, m, {1, 7});
  for (int k = 0; k < m; ++k) {
    Vector colsum = Sp[k].colwise().sum().transpose();
    Matrix first = Sp[m - k].transpose() * colsum.asDiagonal() * Sp[m - k];
    EXPECT_NEAR(r.per_k_terms[k], std::pow(c.w, 2 * m - k - 1) * c.w * first(1, 7), 1e-14);
  }
}

TEST(MixingBound, ZeroWeightIsInfinite) {
  Graph g = make_complete(4);
  auto A = build_message_matrix(g, MatrixKind::sym);
  MixingConstants c;
  c.w = 0.0;
  c.omega = 0.5;
  EXPECT_TRUE(osq_tilde(g, A, c, 2, {0, 1}).is_infinite());
  EXPECT_TRUE(node_osq_first_order(g, A, c, 2, {0, 1}).is_infinite());
}

TEST(MixingBound, ReportInvariantsAndNote) {
  Graph g = make_molecule_like(11, 2, 9);
  for (auto kind : {MatrixKind::sym, MatrixKind::rw, MatrixKind::raw}) {
    auto A = build_message_matrix(g, kind);
    BoundReport r = mixing_bound(g, A, {.omega = 0.1, .w = 0.7, .c1 = 0.2, .c2 = 0.5, .c2nd = 0.4}, 3, {2, 8});
    double sum = 0.0;
    for (double t : r.per_k_terms) {
      EXPECT_GE(t, 0.0);
      sum += t;
    }
    EXPECT_DOUBLE_EQ(sum, r.total_bound);
    if (r.total_bound > 0) EXPECT_NEAR(r.osq_tilde.value() * r.total_bound, 1.0, 1e-14);
    EXPECT_EQ(r.note.empty(), kind != MatrixKind::rw);
  }
}

TEST(MixingBound, MonotoneInEveryConstant) {
  Rng rng(17);
  Graph g = make_molecule_like(10, 3, 2);
  auto A = build_message_matrix(g, MatrixKind::sym);
  for (int trial = 0; trial < 30; ++trial) {
    MixingConstants c = random_constants(rng, false, 1.0);
    int m = 1 + trial % 4;
    Matrix base = mixing_bound_matrices(A, c, m).total;
    // Every power of omega/w is paired with at least as many powers of w, so
    // raising w alone cannot shrink a term.
    for (int field = 0; field < 6; ++field) {
      MixingConstants d = c;
      double* f[] = {&d.omega, &d.w, &d.c1, &d.c2, &d.c2nd, &d.c_sigma};
      *f[field] *= 1.3;
      Matrix bigger = mixing_bound_matrices(A, d, m).total;
      EXPECT_GE((bigger - base).minCoeff(), -1e-12 * base.maxCoeff()) << "field " << field;
    }
  }
}

TEST(MixingBound, MatchesNaiveOracle) {
  Rng rng(23);
  std::vector<Graph> gs = {make_complete(4), make_cycle(5), make_path(4), make_molecule_like(8, 2, 1),
                           make_erdos_renyi(7, 0.5, 3)};
  for (const Graph& g : gs)
    for (auto kind : {MatrixKind::sym, MatrixKind::rw, MatrixKind::raw})
      for (int m = 1; m <= 3; ++m) {
        MixingConstants c = random_constants(rng, false, 1.0);
        auto A = build_message_matrix(g, kind);
        auto a = oracle::from_eigen(A.values);
        Matrix total = mixing_bound_matrices(A, c, m).total;
        for (int v = 0; v < g.n(); ++v)
          for (int u = 0; u < g.n(); ++u)
            EXPECT_NEAR(total(v, u), oracle::eq7_total(a, c, m, v, u), 1e-10 * std::max(1.0, total(v, u)));
      }
}

TEST(OsqTilde, NonIncreasingInDepthUnderPremise) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    Graph g = make_molecule_like(16, 2, s);
    auto A = build_message_matrix(g, MatrixKind::sym);
    MixingConstants c{.omega = 0, .w = 1, .c1 = 0, .c2 = 1, .c2nd = 0.5};
    for (NodePair p : {NodePair{0, 15}, NodePair{3, 11}}) {
      double prev = std::numeric_limits<double>::infinity();
      for (int m = 1; m <= 8; ++m) {
        double now = osq_tilde(g, A, c, m, p).as_double();
        EXPECT_LE(now, prev * (1 + 1e-12));
        prev = now;
      }
    }
  }
}

TEST(OsqRelative, Normalization) {
  Graph g = make_path(4);
  auto A = build_message_matrix(g, MatrixKind::sym);
  MixingConstants c;
  NodePair best = osq_relative_argmax(A, c, 2);
  EXPECT_NEAR(osq_relative(g, A, c, 2, best).value(), 1.0, 1e-14);
  // Pairs order identically under the relative and absolute measures.
  std::vector<std::pair<double, double>> vals;
  for (int v = 0; v < 4; ++v)
    for (int u = v + 1; u < 4; ++u)
      vals.emplace_back(osq_tilde(g, A, c, 2, {v, u}).as_double(), osq_relative(g, A, c, 2, {v, u}).as_double());
  for (auto& a : vals)
    for (auto& b : vals) {
      EXPECT_EQ(a.first < b.first, a.second < b.second);
      EXPECT_GE(a.second, 1.0);
    }
  Graph p5 = make_path(5);
  auto A5 = build_message_matrix(p5, MatrixKind::sym);
  EXPECT_TRUE(osq_relative(p5, A5, c, 1, {0, 4}).is_infinite());
}

TEST(OsqRelative, AllZeroThrows) {
  Graph g = make_complete(3);
  auto A = build_message_matrix(g, MatrixKind::sym);
  MixingConstants c;
  c.w = 0;
  EXPECT_THROW(osq_relative(g, A, c, 1, {0, 1}), InvalidArgument);
}

TEST(AllPairsCsv, Format) {
  Graph g = make_path(5);
  auto A = build_message_matrix(g, MatrixKind::sym);
  std::ostringstream os;
  write_all_pairs_csv(g, A, {}, 1, os);
  std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "v,u,bound,osq_tilde");
  EXPECT_NE(s.find("0,4,0,inf"), std::string::npos);
}

TEST(MinWeight, TreeClosedForm) {
  for (int d : {1, 2, 3}) {
    for (int r : {2, 4}) {
      Graph t = make_tree(d, r);
      NodePair p{0, tree_first_leaf(d, r)};
      for (double mix : {0.1, 1.0, 5.0}) {
        MinWeightReport w = min_weight_bound(t, p, 1.0, mix);
        EXPECT_EQ(w.distance, r);
        EXPECT_EQ(w.depth, r / 2);
        EXPECT_EQ(w.paths, 1u);
        double walk = 1.0 / (std::sqrt(double(d)) * std::pow(d + 1.0, r - 1));
        EXPECT_NEAR(w.walk_weight, walk, 1e-14);
        double displayed = (d + 1) * std::pow(mix / (d + 1), 1.0 / r);
        EXPECT_GE(w.exact, displayed * (1 - 1e-12));
        if (d == 1) EXPECT_NEAR(w.exact, displayed, 1e-12);
        EXPECT_LE(w.degree_based, w.exact * (1 + 1e-12));
      }
    }
  }
}

TEST(MinWeight, CompleteGraphClosedForm) {
  for (int n = 3; n <= 8; ++n) {
    Graph k = make_complete(n);
    for (double mix : {0.5, 1.0, 2.0}) {
      MinWeightReport w = min_weight_bound(k, {0, n - 1}, 1.0, mix);
      EXPECT_NEAR(w.exact, (n - 1) * mix, 1e-12);
      EXPECT_NEAR(w.degree_based, (n - 1) * mix, 1e-12);
    }
  }
  EXPECT_NEAR(min_weight_bound(make_complete(5), {0, 1}, 1.0, 1.0).exact, 4.0, 1e-12);
  EXPECT_LT(min_weight_bound(make_cycle(9), {0, 4}, 1.0, 1e-12).exact, 1e-2);
}

TEST(MinWeight, DegreeFormNeverExceedsExact) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    Graph g = make_molecule_like(15, 3, s);
    for (int u = 1; u < g.n(); ++u) {
      MinWeightReport w = min_weight_bound(g, {0, u}, 0.8, 1.5);
      EXPECT_LE(w.degree_based, w.exact * (1 + 1e-12));
    }
  }
}

TEST(MinDepth, PremiseViolationsAreNamed) {
  Graph g = make_complete(4);
  try {
    min_depth_bound(g, {0, 1}, {.omega = 0.5, .w = 1, .c1 = 0, .c2 = 1}, 1.0);
    FAIL();
  } catch (const PremiseViolation& e) {
    EXPECT_NE(std::string(e.what()).find("omega/w + c1*gamma + c2 <= 1"), std::string::npos);
  }
  EXPECT_THROW(min_depth_bound(g, {0, 1}, {.w = 1.5}, 1.0), PremiseViolation);
  EXPECT_THROW(min_depth_bound(make_path(4), {0, 3}, {}, 1.0), InvalidGraph);
}

TEST(MinDepth, LinearCaseMatchesCorollary) {
  for (std::uint64_t s = 0; s < 6; ++s) {
    Graph g = make_molecule_like(18, 2, s);
    NodePair p{0, 17};
    MixingConstants c{.omega = 0, .w = 1, .c1 = 0, .c2 = 0.8, .c2nd = 0};
    MinDepthReport r = min_depth_bound(g, p, c, 2.0);
    EXPECT_DOUBLE_EQ(r.mu, 1.0);
    SpectralSummary sp = spectral_summary(g, c.c2);
    double gamma = sp.gamma;
    double tau = commute_time_moore_penrose(g).tau(0, 17);
    int rr = shortest_distance(g, p);
    double scale = g.edge_count() / std::sqrt(double(g.degree(0)) * g.degree(17));
    double corollary = tau / (4 * c.c2) +
                       scale * (2.0 / gamma - (gamma + std::pow(sp.contraction, rr - 1)) / (c.c2 * sp.lambda_1));
    EXPECT_NEAR(r.bound, corollary, 1e-8 * std::abs(corollary) + 1e-8);
  }
}

TEST(MinDepth, Decomposition) {
  Graph g = make_molecule_like(20, 2, 8);
  MixingConstants c{.omega = 0.1, .w = 0.5, .c1 = 0.1, .c2 = 0.5, .c2nd = 0.3};
  for (double mix : {0.0, 0.01, 1e6}) {
    MinDepthReport r = min_depth_bound(g, {0, 19}, c, mix);
    EXPECT_NEAR(r.bound, r.tau_term + r.mixing_term - r.correction_term, 1e-9 * std::abs(r.bound) + 1e-9);
    EXPECT_DOUBLE_EQ(r.tau_term, r.tau / (4 * c.c2));
    if (r.bracket <= 0) {
      EXPECT_DOUBLE_EQ(r.clamped_bound, r.tau_term);
    } else {
      EXPECT_GE(r.bound, r.tau_term);
    }
  }
  EXPECT_GT(min_depth_bound(g, {0, 19}, c, 1e6).bound, min_depth_bound(g, {0, 19}, c, 1e6).tau_term);
}

TEST(MinDepth, CutEdgeScale) {
  Graph g = make_molecule_like(24, 1, 12);
  for (Edge e : g.edges()) {
    std::vector<Edge> rest;
    for (Edge f : g.edges())
      if (f != e) rest.push_back(f);
    if (Graph::from_edges(g.n(), rest).connected()) continue;
    MinDepthReport r = min_depth_bound(g, {e.first, e.second}, {.c2 = 1}, 1e6);
    EXPECT_GT(r.bracket, 0.0);
    EXPECT_NEAR(r.tau, 2.0 * g.edge_count(), 1e-8 * g.edge_count());
    EXPECT_NEAR(r.tau_term, g.edge_count() / 2.0, 1e-8 * g.edge_count());
    EXPECT_GE(r.bound, g.edge_count() / 2.0);
    break;
  }
}

TEST(SpectralBound, MatrixFormOracle) {
  Graph g = make_molecule_like(12, 3, 6);
  MixingConstants c{.omega = 0.05, .w = 0.9, .c1 = 0.05, .c2 = 0.7, .c2nd = 0.4};
  const int m = 3;
  Matrix L = normalized_laplacian(g);
  int n = g.n();
  Matrix I = Matrix::Identity(n, n);
  Matrix Z = I - c.c2 * L;
  Matrix Z2m = I;
  for (int k = 0; k < 2 * m; ++k) Z2m = Z2m * Z;
  Eigen::SelfAdjointEigenSolver<Matrix> es(L);
  Matrix Ldag = Matrix::Zero(n, n);
  for (int l = 1; l < n; ++l) Ldag += es.eigenvectors().col(l) * es.eigenvectors().col(l).transpose() / es.eigenvalues()(l);
  Matrix inv = (I + Z).inverse();
  double gamma = std::sqrt(double(g.max_degree()) / g.min_degree());
  Matrix lin = Z * Z * (I - Z2m) * inv * Ldag;
  Matrix hes = ((1 + gamma) * I - L) * (I - Z2m) * inv * Ldag;
  for (int v = 0; v < n; v += 3)
    for (int u = 0; u < n; u += 2) {
      SpectralBoundReport r = spectral_mixing_bound(g, c, m, {v, u});
      double root = std::sqrt(double(g.degree(v)) * g.degree(u));
      double expect = gamma * (m * root / (2.0 * g.edge_count()) * (1 + 2 * c.c2nd * (1 + gamma)) + lin(v, u) / c.c2) +
                      2 * (c.c2nd / c.c2) * gamma * hes(v, u);
      EXPECT_NEAR(r.value, expect, 1e-10);
    }
}

TEST(SpectralBound, DominatesExactBound) {
  Rng rng(31);
  int checked = 0;
  for (std::uint64_t s = 0; s < 12; ++s) {
    Graph g = s % 2 ? make_molecule_like(8 + 2 * int(s), 2, s) : make_erdos_renyi(8 + int(s), 0.35, s);
    double gamma = gamma_of(g);
    for (auto kind : {MatrixKind::sym, MatrixKind::rw}) {
      auto A = build_message_matrix(g, kind);
      for (int m = 1; m <= 6; ++m) {
        MixingConstants c = random_constants(rng, true, gamma);
        Matrix exact = mixing_bound_matrices(A, c, m).total;
        for (int v = 0; v < g.n(); ++v)
          for (int u = v; u < g.n(); ++u) {
            double spec = spectral_mixing_bound(g, c, m, {v, u}, kind).value;
            EXPECT_GE(spec, exact(v, u) - 1e-10) << "kind " << to_string(kind) << " m " << m;
            ++checked;
          }
      }
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(SpectralBound, LinearCaseAndLargeDepth) {
  Graph g = make_complete(3);
  MixingConstants c{.c2 = 1};
  SpectralBoundReport r = spectral_mixing_bound(g, c, 2, {0, 1});
  EXPECT_EQ(r.hessian_term, 0.0);
  auto A = build_message_matrix(g, MatrixKind::sym);
  EXPECT_GE(r.value, mixing_bound(g, A, c, 2, {0, 1}).total_bound);
  // Growth becomes linear in m once Z^{2m} has decayed.
  Graph h = make_molecule_like(14, 3, 2);
  MixingConstants d{.c2 = 0.6, .c2nd = 0.2};
  double a = spectral_mixing_bound(h, d, 200, {0, 5}).value;
  double b = spectral_mixing_bound(h, d, 201, {0, 5}).value;
  double e = spectral_mixing_bound(h, d, 202, {0, 5}).value;
  EXPECT_NEAR(b - a, e - b, 1e-9);
  EXPECT_GT(b - a, 0.0);
}

TEST(NodeLevel, FirstOrder) {
  Graph p = make_path(6);
  auto A = build_message_matrix(p, MatrixKind::raw);
  MixingConstants c{.w = 0.7};
  EXPECT_TRUE(node_osq_first_order(p, A, c, 2, {0, 4}).is_infinite());
  EXPECT_NEAR(node_osq_first_order(p, A, c, 4, {0, 4}).value(), 1.0 / std::pow(0.7, 4), 1e-12);
}

TEST(NodeLevel, SecondOrderExamplesAndSymmetry) {
  Graph p = make_path(3);
  auto A = build_message_matrix(p, MatrixKind::sym);
  MixingConstants c{.w = 0.8};
  const double S01 = A.values(1, 0), S12 = A.values(1, 2);
  double denom = node_second_order_denominator(A, c, 1, 1, {0, 2});
  EXPECT_NEAR(denom, 0.8 * 0.8 * S01 * S12, 1e-15);

  Graph g = make_path(9);
  auto B = build_message_matrix(g, MatrixKind::sym);
  EXPECT_TRUE(node_osq_second_order(g, B, {.c2nd = 1}, 1, 8, {0, 1}).is_infinite());

  Graph h = make_molecule_like(9, 2, 3);
  auto H = build_message_matrix(h, MatrixKind::sym);
  MixingConstants d{.omega = 0.2, .w = 0.9, .c1 = 0.1, .c2 = 0.8, .c2nd = 0.5};
  for (int i = 0; i < h.n(); ++i)
    EXPECT_NEAR(node_second_order_denominator(H, d, 3, i, {1, 6}), node_second_order_denominator(H, d, 3, i, {6, 1}),
                1e-12);
}

TEST(NodeLevel, SumOverNodesIsGraphLevelBound) {
  Rng rng(41);
  for (std::uint64_t s = 0; s < 6; ++s) {
    Graph g = make_molecule_like(8, 2, s);
    for (auto kind : {MatrixKind::sym, MatrixKind::rw, MatrixKind::raw}) {
      auto A = build_message_matrix(g, kind);
      for (int m = 1; m <= 3; ++m) {
        MixingConstants c = random_constants(rng, false, 1.0);
        Matrix total = mixing_bound_matrices(A, c, m).total;
        auto a = oracle::from_eigen(A.values);
        for (int v = 0; v < g.n(); ++v)
          for (int u = 0; u < g.n(); ++u) {
            double sum = 0.0;
            for (int i = 0; i < g.n(); ++i) {
              double lib = node_second_order_denominator(A, c, m, i, {v, u});
              if (v == 0) EXPECT_NEAR(lib, oracle::node_denominator(a, c, m, i, v, u), 1e-10 * std::max(1.0, lib));
              sum += lib;
            }
            EXPECT_NEAR(sum, total(v, u), 1e-10 * std::max(1.0, total(v, u)));
          }
      }
    }
  }
}

TEST(Rewiring, Examples) {
  Graph p4 = make_path(4);
  Graph c4 = make_cycle(4);
  MixingConstants c{.c2nd = 0.5};
  for (int m = 1; m <= 3; ++m) {
    auto add = score_rewiring(p4, c4, c, m, {{0, 3}});
    EXPECT_LT(add[0].after.as_double(), add[0].before.as_double());
    auto rem = score_rewiring(c4, p4, c, m, {{0, 3}});
    EXPECT_GT(rem[0].after.as_double(), rem[0].before.as_double());
  }
  auto same = score_rewiring(c4, c4, c, 2, {{0, 1}, {0, 2}, {1, 3}});
  for (auto& d : same) EXPECT_EQ(d.delta, 0.0);
  EXPECT_THROW(score_rewiring(p4, make_path(5), c, 1, {{0, 1}}), InvalidArgument);
}
