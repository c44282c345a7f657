#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "core.hpp"

namespace squashscope {

struct EigenResult {
  Vector values;   // ascending
  Matrix vectors;  // column i belongs to values(i)
  int sweeps = 0;
};

/// Cyclic Jacobi eigensolver for dense real symmetric matrices.
///
/// Stops once the off-diagonal Frobenius norm drops below
/// `rel_tol * ||M||_F`. Eigenvalues come back ascending and each eigenvector
/// is signed so that its largest-magnitude entry is positive.
inline EigenResult jacobi_eigen(const Matrix& M, double rel_tol = 1e-12, int max_sweeps = 100) {
  const Eigen::Index n = M.rows();
  if (M.cols() != n) throw InvalidArgument("jacobi_eigen: matrix is not square");
  if (n == 0) return {};
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if (((M - M.transpose()).cwiseAbs().maxCoeff()) > 1e-12 * scale) {
    throw InvalidArgument("jacobi_eigen: matrix is not symmetric");
  }
  if (!M.allFinite()) throw NumericalError("jacobi_eigen: non-finite entries");

  Matrix a = 0.5 * (M + M.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double target = rel_tol * a.norm();

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; off_norm() > target; ++sweep) {
    if (sweep >= max_sweeps) throw ConvergenceError("jacobi_eigen: no convergence within sweep cap");
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle from the 2x2 symmetric Schur decomposition.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) < a(j, j); });

  EigenResult r;
  r.sweeps = sweep;
  r.values.resize(n);
  r.vectors.resize(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    r.values(c) = a(order[c], order[c]);
    Vector col = v.col(order[c]);
    Eigen::Index arg = 0;
    for (Eigen::Index k = 1; k < n; ++k)
      if (std::abs(col(k)) > std::abs(col(arg)) + 1e-14) arg = k;
    if (col(arg) < 0) col = -col;
    r.vectors.col(c) = col;
  }
  return r;
}

}  // namespace squashscope
