#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "graph.hpp"
#include "jacobi.hpp"
#include "parallel.hpp"

namespace squashscope {

enum class LaplacianKind { normalized, unnormalized, generic };

struct SpectralData {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // orthonormal columns
  LaplacianKind which = LaplacianKind::generic;

  int n() const { return static_cast<int>(eigenvalues.size()); }
  double lambda(int l) const { return eigenvalues(l); }
  auto phi(int l) const { return eigenvectors.col(l); }
};

/// Normalized Laplacian I - D^{-1/2} A D^{-1/2}. Needs every degree positive.
inline Matrix normalized_laplacian(const Graph& g) {
  require_connected(g, "normalized_laplacian");
  const int n = g.n();
  Vector inv_sqrt(n);
  for (int v = 0; v < n; ++v) inv_sqrt(v) = 1.0 / std::sqrt(static_cast<double>(g.degree(v)));
  Matrix L = -(inv_sqrt.asDiagonal() * g.adjacency() * inv_sqrt.asDiagonal());
  L.diagonal().array() += 1.0;
  return L;
}

/// Combinatorial Laplacian D - A.
inline Matrix unnormalized_laplacian(const Graph& g) {
  Matrix L = -g.adjacency();
  for (int v = 0; v < g.n(); ++v) L(v, v) = g.degree(v);
  return L;
}

inline SpectralData eigendecompose(const Matrix& M, LaplacianKind which = LaplacianKind::generic) {
  EigenResult r = jacobi_eigen(M);
  return {std::move(r.values), std::move(r.vectors), which};
}

/// Spectrum of a graph Laplacian. The normalized case requires a validated
/// graph (connected and non-bipartite, so that lambda_{n-1} < 2).
inline SpectralData laplacian_spectrum(const Graph& g, LaplacianKind which = LaplacianKind::normalized) {
  if (which == LaplacianKind::normalized) {
    require_validated(g, "laplacian_spectrum");
    return eigendecompose(normalized_laplacian(g), which);
  }
  require_connected(g, "laplacian_spectrum");
  return eigendecompose(unnormalized_laplacian(g), LaplacianKind::unnormalized);
}

inline double zero_threshold(const SpectralData& s) {
  return 1e-9 * std::max(1e-300, s.eigenvalues.cwiseAbs().maxCoeff());
}

/// Sum over l >= 1 of phi_l phi_l^T / lambda_l.
inline Matrix laplacian_pseudo_inverse(const SpectralData& s) {
  const int n = s.n();
  if (n < 2) throw InvalidArgument("laplacian_pseudo_inverse: need n >= 2");
  const double tol = zero_threshold(s);
  if (std::abs(s.lambda(0)) >= tol) throw NumericalError("laplacian_pseudo_inverse: no zero eigenvalue");
  if (std::abs(s.lambda(1)) < tol) {
    throw InvalidGraph("laplacian_pseudo_inverse: repeated zero eigenvalue (graph is disconnected)");
  }
  Matrix P = Matrix::Zero(n, n);
  for (int l = 1; l < n; ++l) P.noalias() += (1.0 / s.lambda(l)) * s.phi(l) * s.phi(l).transpose();
  return P;
}

struct CommuteTable {
  Matrix tau;         // expected round-trip steps
  Matrix resistance;  // effective resistance
  std::size_t edge_count = 0;
};

/// Spectral commute time: tau(v,u) = 2|E| sum_{l>=1} (phi_l(v)/sqrt(d_v) - phi_l(u)/sqrt(d_u))^2 / lambda_l.
///
/// Only connectivity is needed here; bipartite graphs are fine because
/// lambda = 2 is a regular positive eigenvalue for this formula.
inline CommuteTable commute_time_spectral(const Graph& g) {
  require_connected(g, "commute_time_spectral");
  const int n = g.n();
  SpectralData s = eigendecompose(normalized_laplacian(g), LaplacianKind::normalized);
  const double tol = zero_threshold(s);
  if (n > 1 && std::abs(s.lambda(1)) < tol) throw InvalidGraph("commute_time_spectral: repeated zero eigenvalue");
  const double two_m = 2.0 * static_cast<double>(g.edge_count());

  // Scaled eigenvectors psi_l(v) = phi_l(v) / sqrt(d_v lambda_l).
  Matrix psi(n, std::max(0, n - 1));
  for (int l = 1; l < n; ++l) {
    for (int v = 0; v < n; ++v) psi(v, l - 1) = s.eigenvectors(v, l) / std::sqrt(g.degree(v) * s.lambda(l));
  }
  CommuteTable t;
  t.edge_count = g.edge_count();
  t.tau = Matrix::Zero(n, n);
  for (int v = 0; v < n; ++v) {
    for (int u = v + 1; u < n; ++u) {
      double val = two_m * (psi.row(v) - psi.row(u)).squaredNorm();
      t.tau(v, u) = t.tau(u, v) = val;
    }
  }
  t.resistance = t.tau / two_m;
  return t;
}

/// R(u,v) = G_uu + G_vv - 2 G_uv with G = (L + J/n)^{-1}, L = D - A.
inline Matrix resistance_via_moore_penrose(const Graph& g) {
  require_connected(g, "resistance_via_moore_penrose");
  const int n = g.n();
  Matrix shifted = unnormalized_laplacian(g);
  shifted.array() += 1.0 / n;
  Eigen::FullPivLU<Matrix> lu(shifted);
  if (!lu.isInvertible()) throw NumericalError("resistance_via_moore_penrose: shifted Laplacian is singular");
  Matrix G = lu.inverse();
  Matrix R(n, n);
  for (int v = 0; v < n; ++v)
    for (int u = 0; u < n; ++u) R(v, u) = v == u ? 0.0 : G(v, v) + G(u, u) - 2.0 * G(v, u);
  return 0.5 * (R + R.transpose());
}

inline CommuteTable commute_time_moore_penrose(const Graph& g) {
  CommuteTable t;
  t.resistance = resistance_via_moore_penrose(g);
  t.edge_count = g.edge_count();
  t.tau = 2.0 * static_cast<double>(g.edge_count()) * t.resistance;
  return t;
}

inline void write_commute_csv(const CommuteTable& t, std::ostream& out) {
  out << "row,col,tau,resistance\n";
  out.precision(12);
  for (Eigen::Index r = 0; r < t.tau.rows(); ++r)
    for (Eigen::Index c = 0; c < t.tau.cols(); ++c)
      out << r << "," << c << "," << t.tau(r, c) << "," << t.resistance(r, c) << "\n";
}

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t walkers = 0;
};

inline constexpr std::uint64_t kWalkerStepCap = 10'000'000;

/// Monte-Carlo commute time: each walker starts at v, walks until it hits u,
/// then until it returns to v. Walker i uses the substream mix_seed(seed, i).
inline MonteCarloEstimate commute_time_monte_carlo(const Graph& g, NodePair pair, std::size_t walkers,
                                                   std::uint64_t seed, int threads = 1) {
  require_connected(g, "commute_time_monte_carlo");
  require_pair(g, pair, /*allow_equal=*/true);
  if (walkers < 100) throw InvalidArgument("commute_time_monte_carlo: need at least 100 walkers");
  if (pair.v == pair.u) return {0.0, 0.0, walkers};

  std::vector<double> steps(walkers);
  parallel_for(walkers, threads, [&](std::size_t i) {
    Rng rng(mix_seed(seed, i));
    std::uint64_t count = 0;
    int at = pair.v;
    for (int target : {pair.u, pair.v}) {
      while (at != target) {
        const auto& nb = g.neighbors(at);
        at = nb[uniform_below(rng, nb.size())];
        if (++count > kWalkerStepCap) {
          throw ConvergenceError("commute_time_monte_carlo: walker " + std::to_string(i) +
                                 " exceeded the step cap");
        }
      }
    }
    steps[i] = static_cast<double>(count);
  });

  double mean = 0.0;
  for (double s : steps) mean += s;
  mean /= static_cast<double>(walkers);
  double var = 0.0;
  for (double s : steps) var += (s - mean) * (s - mean);
  var /= static_cast<double>(walkers - 1);
  return {mean, std::sqrt(var / static_cast<double>(walkers)), walkers};
}

struct SpectralSummary {
  double lambda_1 = 0.0;
  double lambda_max = 0.0;
  double lambda_star = 0.0;
  double contraction = 0.0;  // |1 - c2 lambda_star|
  double gamma = 1.0;        // sqrt(d_max / d_min)
  bool tie = false;          // |1 - c2 lambda_1| == |1 - c2 lambda_max|, resolved toward lambda_1
};

inline SpectralSummary spectral_summary(const Graph& g, double c2) {
  require_validated(g, "spectral_summary");
  if (!(c2 > 0.0 && c2 <= 1.0)) throw InvalidArgument("spectral_summary: need 0 < c2 <= 1");
  SpectralData s = laplacian_spectrum(g, LaplacianKind::normalized);
  SpectralSummary out;
  out.lambda_1 = s.lambda(1);
  out.lambda_max = s.lambda(s.n() - 1);
  const double a = std::abs(1.0 - c2 * out.lambda_1);
  const double b = std::abs(1.0 - c2 * out.lambda_max);
  out.tie = std::abs(a - b) <= 1e-12;
  out.lambda_star = (out.tie || a > b) ? out.lambda_1 : out.lambda_max;
  out.contraction = std::max(a, b);
  out.gamma = std::sqrt(static_cast<double>(g.max_degree()) / g.min_degree());
  return out;
}

}  // namespace squashscope
