#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "graph.hpp"
#include "spectral.hpp"

namespace squashscope {

enum class MatrixKind { sym, rw, raw };

inline std::string to_string(MatrixKind k) {
  switch (k) {
    case MatrixKind::sym: return "sym";
    case MatrixKind::rw: return "rw";
    case MatrixKind::raw: return "raw";
  }
  return "?";
}

inline MatrixKind parse_matrix_kind(const std::string& s) {
  if (s == "sym") return MatrixKind::sym;
  if (s == "rw") return MatrixKind::rw;
  if (s == "raw") return MatrixKind::raw;
  throw InvalidArgument("unknown message-passing matrix kind '" + s + "'");
}

/// The aggregation matrix of the MPNN: D^{-1/2} A D^{-1/2}, D^{-1} A, or A.
struct MessagePassingMatrix {
  MatrixKind kind = MatrixKind::sym;
  Matrix values;

  int n() const { return static_cast<int>(values.rows()); }
};

inline MessagePassingMatrix build_message_matrix(const Graph& g, MatrixKind kind) {
  require_connected(g, "build_message_matrix");
  const int n = g.n();
  MessagePassingMatrix A{kind, g.adjacency()};
  if (kind == MatrixKind::raw) return A;
  for (int v = 0; v < n; ++v) {
    for (int u : g.neighbors(v)) {
      A.values(v, u) = kind == MatrixKind::sym ? 1.0 / std::sqrt(double(g.degree(v)) * g.degree(u))
                                               : 1.0 / g.degree(v);
    }
  }
  return A;
}

/// Bounds on the layer weights and message-function derivatives.
struct MixingConstants {
  double omega = 0.0;    // ||Omega||
  double w = 1.0;        // ||W||
  double c1 = 0.0;       // ||d psi / d x||
  double c2 = 1.0;       // ||d psi / d y||
  double c2nd = 0.0;     // ||Hessian of psi||
  double c_sigma = 1.0;  // max(|sigma'|, |sigma''|)

  void validate() const {
    for (double x : {omega, w, c1, c2, c2nd, c_sigma}) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidArgument("mixing constants must be finite and nonnegative");
    }
  }
};

/// S = (omega/w) I + c1 diag(A 1) + c2 A.
inline Matrix build_S(const MessagePassingMatrix& A, const MixingConstants& c) {
  c.validate();
  if (!(c.w > 0.0)) throw InvalidArgument("build_S: w must be positive");
  Matrix S = c.c2 * A.values;
  Vector rows = A.values.rowwise().sum();
  S.diagonal().array() += c.omega / c.w + c.c1 * rows.array();
  return S;
}

/// S^0 .. S^m, built incrementally.
inline std::vector<Matrix> matrix_powers(const Matrix& S, int m) {
  std::vector<Matrix> p;
  p.reserve(m + 1);
  p.push_back(Matrix::Identity(S.rows(), S.cols()));
  for (int k = 1; k <= m; ++k) p.push_back(p.back() * S);
  return p;
}

namespace detail {

inline Matrix qk_from_powers(const Matrix& A, const std::vector<Matrix>& Sp, int m, int k) {
  const Matrix& Sl = Sp[m - k - 1];
  const Vector colsum = Sp[k].colwise().sum().transpose();  // (1^T S^k)^T
  Matrix P = Sl.transpose() * colsum.asDiagonal() * (A * Sl);
  Matrix degA = A.rowwise().sum().asDiagonal();
  const Vector weight = ((colsum.transpose()) * (degA + A)).transpose();
  Matrix third = Sl.transpose() * weight.asDiagonal() * Sl;
  Matrix sym_third = 0.5 * (third + third.transpose());
  return P + P.transpose() + sym_third;
}

inline Matrix first_from_powers(const std::vector<Matrix>& Sp, int m, int k) {
  const Matrix& Sh = Sp[m - k];
  const Vector colsum = Sp[k].colwise().sum().transpose();
  return Sh.transpose() * colsum.asDiagonal() * Sh;
}

}  // namespace detail

/// Q_k = P_k + P_k^T + (S^{m-k-1})^T diag(1^T S^k (diag(A1) + A)) S^{m-k-1},
/// with P_k = (S^{m-k-1})^T diag(1^T S^k) A S^{m-k-1}.
inline Matrix build_Qk(const MessagePassingMatrix& A, const MixingConstants& c, int m, int k) {
  if (m < 1) throw InvalidArgument("build_Qk: depth must be >= 1");
  if (k < 0 || k > m - 1) throw InvalidArgument("build_Qk: index k out of range [0, m-1]");
  auto Sp = matrix_powers(build_S(A, c), m);
  return detail::qk_from_powers(A.values, Sp, m, k);
}

/// All-pairs evaluation of the Hessian bound, term by term.
struct BoundMatrices {
  std::vector<Matrix> per_k;  // k = 0..m-1, each already scaled by its power of c_sigma w
  Matrix total;
};

inline BoundMatrices mixing_bound_matrices(const MessagePassingMatrix& A, const MixingConstants& c, int m) {
  if (m < 1) throw InvalidArgument("mixing bound: depth must be >= 1");
  c.validate();
  const int n = A.n();
  BoundMatrices out;
  out.total = Matrix::Zero(n, n);
  if (c.w == 0.0) {
    out.per_k.assign(m, Matrix::Zero(n, n));
    return out;
  }
  auto Sp = matrix_powers(build_S(A, c), m);
  const double cw = c.c_sigma * c.w;
  for (int k = 0; k < m; ++k) {
    Matrix term = c.w * detail::first_from_powers(Sp, m, k);
    if (c.c2nd != 0.0) term += c.c2nd * detail::qk_from_powers(A.values, Sp, m, k);
    term *= std::pow(cw, 2 * m - k - 1);
    out.total += term;
    out.per_k.push_back(std::move(term));
  }
  return out;
}

inline std::string non_symmetric_note(MatrixKind kind) {
  if (kind == MatrixKind::rw) {
    return "rw kind: diag(1^T S^k) is used; it differs from diag(S^k 1) when A is not symmetric";
  }
  return "";
}

struct BoundReport {
  NodePair pair;
  int depth = 0;
  MatrixKind kind = MatrixKind::sym;
  int distance = 0;
  bool under_reaching = false;
  std::vector<double> per_k_terms;
  double total_bound = 0.0;
  ExtendedReal osq_tilde;
  std::string note;
};

/// Hessian mixing bound at (v,u) with per-k breakdown and its reciprocal.
inline BoundReport mixing_bound(const Graph& g, const MessagePassingMatrix& A, const MixingConstants& c, int m,
                                NodePair pair) {
  require_pair(g, pair, /*allow_equal=*/true);
  if (A.n() != g.n()) throw InvalidArgument("mixing_bound: matrix size does not match graph");
  BoundReport r;
  r.pair = pair;
  r.depth = m;
  r.kind = A.kind;
  r.distance = shortest_distance(g, pair);
  r.under_reaching = 2 * m < r.distance;
  r.note = non_symmetric_note(A.kind);
  BoundMatrices bm = mixing_bound_matrices(A, c, m);
  for (int k = 0; k < m; ++k) {
    double t = r.under_reaching ? 0.0 : bm.per_k[k](pair.v, pair.u);
    r.per_k_terms.push_back(t);
    r.total_bound += t;
  }
  if (c.w == 0.0) {
    std::string msg = "w = 0: zero capacity";
    r.note = r.note.empty() ? msg : r.note + "; " + msg;
  }
  r.osq_tilde = ExtendedReal::reciprocal(r.total_bound);
  return r;
}

inline ExtendedReal osq_tilde(const Graph& g, const MessagePassingMatrix& A, const MixingConstants& c, int m,
                              NodePair pair) {
  return mixing_bound(g, A, c, m, pair).osq_tilde;
}

/// Pair bound relative to the largest bound over all (i, j), reciprocated.
inline ExtendedReal osq_relative(const Graph& g, const MessagePassingMatrix& A, const MixingConstants& c, int m,
                                 NodePair pair) {
  require_pair(g, pair, /*allow_equal=*/true);
  BoundMatrices bm = mixing_bound_matrices(A, c, m);
  const double best = bm.total.maxCoeff();
  if (!(best > 0.0)) throw InvalidArgument("osq_relative: bound is zero for every pair");
  const double mine = 2 * m < shortest_distance(g, pair) ? 0.0 : bm.total(pair.v, pair.u);
  return ExtendedReal::reciprocal(mine / best);
}

/// Pair attaining the largest bound (used as the normalizer of osq_relative).
inline NodePair osq_relative_argmax(const MessagePassingMatrix& A, const MixingConstants& c, int m) {
  BoundMatrices bm = mixing_bound_matrices(A, c, m);
  Eigen::Index i, j;
  bm.total.maxCoeff(&i, &j);
  return {static_cast<int>(i), static_cast<int>(j)};
}

/// CSV heatmap with one row per ordered pair v != u.
inline void write_all_pairs_csv(const Graph& g, const MessagePassingMatrix& A, const MixingConstants& c, int m,
                                std::ostream& out) {
  BoundMatrices bm = mixing_bound_matrices(A, c, m);
  auto dist = all_pairs_distances(g);
  out << "v,u,bound,osq_tilde\n";
  out.precision(12);
  for (int v = 0; v < g.n(); ++v) {
    for (int u = 0; u < g.n(); ++u) {
      if (u == v) continue;
      double b = 2 * m < dist[v][u] ? 0.0 : bm.total(v, u);
      out << v << "," << u << "," << b << ",";
      if (b > 0.0) out << 1.0 / b; else out << "inf";
      out << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// Capacity lower bounds

struct MinWeightReport {
  int distance = 0;          // r
  int depth = 0;             // ceil(r / 2)
  std::uint64_t paths = 0;   // q
  double walk_weight = 0.0;  // (A^r)_{vu} for the chosen kind
  double exact = 0.0;        // (1/c2) (mix / (A^r)_{vu})^{1/r}
  double degree_based = 0.0; // (d_min/c2) (mix / q)^{1/r}
};

/// Minimum weight norm needed for mixing `target_mixing` at the smallest depth
/// that avoids under-reaching.
inline MinWeightReport min_weight_bound(const Graph& g, NodePair pair, double c2, double target_mixing,
                                        MatrixKind kind = MatrixKind::sym) {
  require_pair(g, pair);
  if (!(target_mixing > 0.0)) throw InvalidArgument("min_weight_bound: target mixing must be positive");
  if (!(c2 > 0.0)) throw InvalidArgument("min_weight_bound: c2 must be positive");
  MinWeightReport r;
  r.distance = shortest_distance(g, pair);
  r.depth = (r.distance + 1) / 2;
  r.paths = count_shortest_paths(g, pair);
  MessagePassingMatrix A = build_message_matrix(g, kind);
  Vector e = Vector::Zero(g.n());
  e(pair.u) = 1.0;
  for (int s = 0; s < r.distance; ++s) e = A.values * e;
  r.walk_weight = e(pair.v);
  const double inv_r = 1.0 / r.distance;
  r.exact = std::pow(target_mixing / r.walk_weight, inv_r) / c2;
  r.degree_based = g.min_degree() / c2 * std::pow(target_mixing / static_cast<double>(r.paths), inv_r);
  return r;
}

/// Throws PremiseViolation unless max{w, omega/w + c1 gamma + c2} <= 1 and the
/// auxiliary conditions (0 < c2, c_sigma <= 1) hold.
inline void check_commute_premise(const MixingConstants& c, double gamma, const char* op) {
  c.validate();
  auto fail = [&](const std::string& what) { throw PremiseViolation(std::string(op) + ": premise violated: " + what); };
  if (!(c.w > 0.0)) fail("w > 0");
  if (c.w > 1.0 + 1e-12) {
    std::ostringstream os;
    os << "w <= 1 (w = " << c.w << ")";
    fail(os.str());
  }
  const double alpha = c.omega / c.w + c.c1 * gamma + c.c2;
  if (alpha > 1.0 + 1e-12) {
    std::ostringstream os;
    os << "omega/w + c1*gamma + c2 <= 1 (value " << alpha << ")";
    fail(os.str());
  }
  if (!(c.c2 > 0.0)) fail("c2 > 0");
  if (c.c_sigma > 1.0 + 1e-12) fail("c_sigma <= 1");
}

struct MinDepthReport {
  int distance = 0;
  double tau = 0.0;
  double tau_term = 0.0;         // tau / (4 c2)
  double mixing_term = 0.0;      // |E|/sqrt(d_v d_u) * mix / (gamma mu)
  double correction_term = 0.0;  // |E|/sqrt(d_v d_u) * (1/c2)((gamma + |1-c2 l*|^{r-1})/l1 + 2 c2nd/mu)
  double bracket = 0.0;          // mixing_term - correction_term
  double bound = 0.0;            // tau_term + bracket
  double clamped_bound = 0.0;    // tau_term + max(bracket, 0)
  double mu = 1.0;
  SpectralSummary spectrum;
};

inline MinDepthReport min_depth_bound(const Graph& g, NodePair pair, const MixingConstants& c, double target_mixing) {
  require_validated(g, "min_depth_bound");
  require_pair(g, pair);
  if (!(target_mixing >= 0.0)) throw InvalidArgument("min_depth_bound: target mixing must be nonnegative");
  const double gamma = std::sqrt(static_cast<double>(g.max_degree()) / g.min_degree());
  check_commute_premise(c, gamma, "min_depth_bound");
  MinDepthReport r;
  r.spectrum = spectral_summary(g, c.c2);
  r.distance = shortest_distance(g, pair);
  r.tau = commute_time_spectral(g).tau(pair.v, pair.u);
  r.mu = 1.0 + 2.0 * c.c2nd * (1.0 + gamma);
  const double scale = static_cast<double>(g.edge_count()) / std::sqrt(double(g.degree(pair.v)) * g.degree(pair.u));
  r.tau_term = r.tau / (4.0 * c.c2);
  r.mixing_term = scale * target_mixing / (gamma * r.mu);
  r.correction_term = scale / c.c2 *
                      ((gamma + std::pow(r.spectrum.contraction, r.distance - 1)) / r.spectrum.lambda_1 +
                       2.0 * c.c2nd / r.mu);
  r.bracket = r.mixing_term - r.correction_term;
  r.bound = r.tau_term + r.bracket;
  r.clamped_bound = r.tau_term + std::max(0.0, r.bracket);
  return r;
}

struct SpectralBoundReport {
  double value = 0.0;
  double kernel_term = 0.0;   // gamma^k m sqrt(d_v d_u)/2|E| (1 + 2 c2nd (1 + gamma^s))
  double linear_term = 0.0;   // gamma^k / c2 (Z^2 (I - Z^{2m}) (I + Z)^{-1} Delta^+)_{vu}
  double hessian_term = 0.0;  // 2 (c2nd/c2) gamma^k (((1+gamma^s) I - Delta)(I - Z^{2m})(I + Z)^{-1} Delta^+)_{vu}
  int k_exp = 1;
  int s_exp = 1;
};

/// Closed-form upper bound on the mixing through the normalized Laplacian,
/// Z = I - c2 Delta. Valid for the sym and rw aggregations.
inline SpectralBoundReport spectral_mixing_bound(const Graph& g, const MixingConstants& c, int m, NodePair pair,
                                                 MatrixKind kind = MatrixKind::sym) {
  require_validated(g, "spectral_mixing_bound");
  require_pair(g, pair, /*allow_equal=*/true);
  if (m < 1) throw InvalidArgument("spectral_mixing_bound: depth must be >= 1");
  if (kind == MatrixKind::raw) throw InvalidArgument("spectral_mixing_bound: kind must be sym or rw");
  const double gamma = std::sqrt(static_cast<double>(g.max_degree()) / g.min_degree());
  check_commute_premise(c, gamma, "spectral_mixing_bound");

  SpectralBoundReport r;
  r.k_exp = kind == MatrixKind::sym ? 1 : 4;
  r.s_exp = kind == MatrixKind::sym ? 1 : 2;
  const double gk = std::pow(gamma, r.k_exp);
  const double gs = std::pow(gamma, r.s_exp);

  SpectralData s = laplacian_spectrum(g, LaplacianKind::normalized);
  double f_lin = 0.0, f_hess = 0.0;
  for (int l = 1; l < s.n(); ++l) {
    const double lam = s.lambda(l);
    const double z = 1.0 - c.c2 * lam;
    const double tail = (1.0 - std::pow(z, 2 * m)) / ((1.0 + z) * lam);
    const double pp = s.eigenvectors(pair.v, l) * s.eigenvectors(pair.u, l);
    f_lin += z * z * tail * pp;
    f_hess += (1.0 + gs - lam) * tail * pp;
  }
  const double two_m = 2.0 * static_cast<double>(g.edge_count());
  const double root = std::sqrt(double(g.degree(pair.v)) * g.degree(pair.u));
  r.kernel_term = gk * m * root / two_m * (1.0 + 2.0 * c.c2nd * (1.0 + gs));
  r.linear_term = gk / c.c2 * f_lin;
  r.hessian_term = 2.0 * (c.c2nd / c.c2) * gk * f_hess;
  r.value = r.kernel_term + r.linear_term + r.hessian_term;
  return r;
}

// ---------------------------------------------------------------------------
// Node-level measures

/// Jacobian bound matrix (c_sigma w)^m S^m.
inline Matrix jacobian_bound_matrix(const MessagePassingMatrix& A, const MixingConstants& c, int m) {
  if (m < 0) throw InvalidArgument("jacobian bound: negative depth");
  if (c.w == 0.0) {
    if (m == 0) return Matrix::Identity(A.n(), A.n());
    return Matrix::Zero(A.n(), A.n());
  }
  return std::pow(c.c_sigma * c.w, m) * matrix_powers(build_S(A, c), m).back();
}

inline ExtendedReal node_osq_first_order(const Graph& g, const MessagePassingMatrix& A, const MixingConstants& c,
                                         int m, NodePair pair) {
  require_pair(g, pair, /*allow_equal=*/true);
  if (m < 1) throw InvalidArgument("node_osq_first_order: depth must be >= 1");
  if (m < shortest_distance(g, pair) || c.w == 0.0) return ExtendedReal::infinity();
  return ExtendedReal::reciprocal(jacobian_bound_matrix(A, c, m)(pair.v, pair.u));
}

/// Per-node Hessian bound at node i for the pair (v,u): the denominator of
/// the second-order node-level measure. Summed over i it equals the
/// graph-level bound at (v,u).
inline double node_second_order_denominator(const MessagePassingMatrix& A, const MixingConstants& c, int m, int i,
                                            NodePair pair) {
  if (m < 1) throw InvalidArgument("node_second_order_denominator: depth must be >= 1");
  c.validate();
  if (c.w == 0.0) return 0.0;
  const int n = A.n();
  if (i < 0 || i >= n) throw InvalidArgument("node index out of range");
  auto Sp = matrix_powers(build_S(A, c), m);
  const double cw = c.c_sigma * c.w;
  const auto v = pair.v, u = pair.u;

  double first = 0.0;
  for (int k = 0; k < m; ++k) {
    const Matrix& Sh = Sp[m - k];
    double inner = (Sh.col(v).array() * Sp[k].row(i).transpose().array() * Sh.col(u).array()).sum();
    first += std::pow(cw, 2 * m - k - 1) * c.w * inner;
  }
  double second = 0.0;
  if (c.c2nd != 0.0) {
    Matrix degA = A.values.rowwise().sum().asDiagonal();
    Matrix B = degA + A.values;
    for (int l = 0; l < m; ++l) {
      const Matrix& Sl = Sp[l];
      Matrix ASl = A.values * Sl;
      Vector P = Sl.col(v).cwiseProduct(ASl.col(u)) + Sl.col(u).cwiseProduct(ASl.col(v)) +
                 B * Sl.col(v).cwiseProduct(Sl.col(u));
      second += std::pow(cw, m + l) * (Sp[m - 1 - l].row(i) * P)(0);
    }
  }
  return first + c.c2nd * second;
}

inline ExtendedReal node_osq_second_order(const Graph& g, const MessagePassingMatrix& A, const MixingConstants& c,
                                          int m, int i, NodePair pair) {
  require_pair(g, pair, /*allow_equal=*/true);
  if (i < 0 || i >= g.n()) throw InvalidArgument("node index out of range");
  return ExtendedReal::reciprocal(node_second_order_denominator(A, c, m, i, pair));
}

// ---------------------------------------------------------------------------
// Rewiring

struct RewiringDelta {
  NodePair pair;
  ExtendedReal before;
  ExtendedReal after;
  double delta = 0.0;  // after - before; 0 when both are infinite
};

inline std::vector<RewiringDelta> score_rewiring(const Graph& before, const Graph& after, const MixingConstants& c,
                                                 int m, const std::vector<NodePair>& pairs,
                                                 MatrixKind kind = MatrixKind::sym) {
  if (before.n() != after.n()) throw InvalidArgument("score_rewiring: node counts differ");
  MessagePassingMatrix Ab = build_message_matrix(before, kind);
  MessagePassingMatrix Aa = build_message_matrix(after, kind);
  std::vector<RewiringDelta> out;
  for (NodePair p : pairs) {
    RewiringDelta d{p, osq_tilde(before, Ab, c, m, p), osq_tilde(after, Aa, c, m, p), 0.0};
    if (d.before.is_infinite() && d.after.is_infinite()) {
      d.delta = 0.0;
    } else {
      d.delta = d.after.as_double() - d.before.as_double();
    }
    out.push_back(d);
  }
  return out;
}

}  // namespace squashscope
