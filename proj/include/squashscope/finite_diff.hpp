#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "bounds.hpp"
#include "certify.hpp"
#include "mpnn.hpp"
#include "parallel.hpp"

namespace squashscope {

inline constexpr double kFirstOrderStep = 1e-5;
inline constexpr double kSecondOrderStep = 1e-3;
inline constexpr double kMaxTieGap = 1e-6;

namespace detail {

inline void require_finite(const Matrix& H, const char* op) {
  if (!H.allFinite()) throw NumericalError(std::string(op) + ": non-finite model output (exploding weights?)");
}

inline std::vector<int> column_argmax(const Matrix& H) {
  std::vector<int> arg(H.cols());
  for (int c = 0; c < H.cols(); ++c) {
    Eigen::Index i;
    H.col(c).maxCoeff(&i);
    arg[c] = static_cast<int>(i);
  }
  return arg;
}

/// Throws if some channel's top two candidates are within kMaxTieGap.
inline void require_tie_free(const Matrix& H, const char* op) {
  if (H.rows() < 2) return;
  for (int c = 0; c < H.cols(); ++c) {
    double top = -INFINITY, second = -INFINITY;
    for (int i = 0; i < H.rows(); ++i) {
      double x = H(i, c);
      if (x > top) {
        second = top;
        top = x;
      } else if (x > second) {
        second = x;
      }
    }
    if (top - second <= kMaxTieGap)
      throw NumericalError(std::string(op) + ": MAX readout tie in channel " + std::to_string(c));
  }
}

}  // namespace detail

/// Central-difference Jacobian of the final node states with respect to the
/// features of node u. Block v (d x d) holds d h_v^(m) / d x_u.
inline std::vector<Matrix> fd_jacobian(const MpnnModel& model, const MessagePassingMatrix& A, const Matrix& X, int u,
                                       double h = kFirstOrderStep) {
  model.validate();
  const int n = A.n(), d = model.width();
  if (u < 0 || u >= n) throw InvalidArgument("fd_jacobian: source node out of range");
  std::vector<Matrix> blocks(n, Matrix::Zero(d, d));
  for (int b = 0; b < d; ++b) {
    Matrix Xp = X, Xm = X;
    Xp(u, b) += h;
    Xm(u, b) -= h;
    Matrix Hp = forward(model, A, Xp).node_states;
    Matrix Hm = forward(model, A, Xm).node_states;
    detail::require_finite(Hp, "fd_jacobian");
    detail::require_finite(Hm, "fd_jacobian");
    for (int v = 0; v < n; ++v) blocks[v].col(b) = (Hp.row(v) - Hm.row(v)).transpose() / (2.0 * h);
  }
  return blocks;
}

inline double spectral_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(M).singularValues()(0);
}

struct MixingMeasurement {
  Matrix cross;  // d x d, entry (a, b) = d^2 y / dx_v^a dx_u^b
  double max_abs = 0.0;
};

/// 4-point cross difference of the graph output. Under MAX readout the point
/// must be tie-free and every perturbed evaluation must select the same
/// argmax nodes, otherwise the difference would straddle a kink.
inline MixingMeasurement fd_mixing(const MpnnModel& model, const MessagePassingMatrix& A, const Matrix& X,
                                   NodePair pair, double h = kSecondOrderStep) {
  model.validate();
  const int d = model.width();
  if (pair.v < 0 || pair.u < 0 || pair.v >= A.n() || pair.u >= A.n())
    throw InvalidArgument("fd_mixing: node pair out of range");
  const bool is_max = model.readout == Readout::max;
  std::vector<int> arg;
  if (is_max) {
    Matrix H0 = forward(model, A, X).node_states;
    detail::require_tie_free(H0, "fd_mixing");
    arg = detail::column_argmax(H0);
  }
  auto eval = [&](const Matrix& Xs) {
    ForwardResult r = forward(model, A, Xs);
    detail::require_finite(r.node_states, "fd_mixing");
    if (is_max && detail::column_argmax(r.node_states) != arg)
      throw NumericalError("fd_mixing: MAX readout argmax changes within the difference stencil");
    return r.graph_output;
  };
  MixingMeasurement out;
  out.cross = Matrix::Zero(d, d);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      double f[2][2];
      for (int sa = 0; sa < 2; ++sa)
        for (int sb = 0; sb < 2; ++sb) {
          Matrix Xs = X;
          Xs(pair.v, a) += sa ? h : -h;
          Xs(pair.u, b) += sb ? h : -h;
          f[sa][sb] = eval(Xs);
        }
      out.cross(a, b) = (f[1][1] - f[1][0] - f[0][1] + f[0][0]) / (4.0 * h * h);
    }
  }
  out.max_abs = out.cross.cwiseAbs().maxCoeff();
  return out;
}

/// Cross second derivatives of the state of node i: a d x d^2 matrix whose
/// row g, column a*d + b holds d^2 h_i^g / dx_v^a dx_u^b.
inline Matrix fd_node_hessian(const MpnnModel& model, const MessagePassingMatrix& A, const Matrix& X, int i,
                              NodePair pair, double h = kSecondOrderStep) {
  model.validate();
  const int d = model.width();
  Matrix out = Matrix::Zero(d, d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      Vector acc = Vector::Zero(d);
      for (int sa = 0; sa < 2; ++sa)
        for (int sb = 0; sb < 2; ++sb) {
          Matrix Xs = X;
          Xs(pair.v, a) += sa ? h : -h;
          Xs(pair.u, b) += sb ? h : -h;
          Matrix H = forward(model, A, Xs).node_states;
          detail::require_finite(H, "fd_node_hessian");
          acc += (sa == sb ? 1.0 : -1.0) * H.row(i).transpose();
        }
      out.col(a * d + b) = acc / (4.0 * h * h);
    }
  return out;
}

/// Sample k of the nested sequence used for the outer maximization: the box's
/// lower and upper corners, then (when 2d <= 10) every corner of the (v,u)
/// sub-box with other coordinates at their midpoint, then uniform draws.
inline Matrix box_sample(const InputBox& box, NodePair pair, std::size_t k, std::uint64_t seed) {
  if (k == 0) return box.lo;
  if (k == 1) return box.hi;
  const int d = box.d();
  std::size_t corner = k - 2;
  if (2 * d <= 10 && corner < (std::size_t(1) << (2 * d))) {
    Matrix X = 0.5 * (box.lo + box.hi);
    for (int a = 0; a < d; ++a) {
      X(pair.v, a) = (corner >> a) & 1 ? box.hi(pair.v, a) : box.lo(pair.v, a);
      X(pair.u, a) = (corner >> (d + a)) & 1 ? box.hi(pair.u, a) : box.lo(pair.u, a);
    }
    return X;
  }
  Rng rng(mix_seed(seed, k));
  Matrix X(box.n(), d);
  for (int i = 0; i < box.n(); ++i)
    for (int a = 0; a < d; ++a) X(i, a) = uniform_in(rng, box.lo(i, a), box.hi(i, a));
  return X;
}

/// Largest sampled |cross-Hessian entry| over the box: a lower estimate of
/// the maximal mixing. More samples never decrease it for a fixed seed.
inline double empirical_max_mixing(const MpnnModel& model, const MessagePassingMatrix& A, NodePair pair,
                                   const InputBox& box, std::size_t samples, std::uint64_t seed, int threads = 1) {
  if (samples < 1) throw InvalidArgument("empirical_max_mixing: samples must be >= 1");
  box.validate();
  if (box.n() != A.n() || box.d() != model.width()) throw InvalidArgument("empirical_max_mixing: box shape mismatch");
  std::vector<double> vals(samples, 0.0);
  parallel_for(samples, resolve_threads(threads),
               [&](std::size_t k) { vals[k] = fd_mixing(model, A, box_sample(box, pair, k, seed), pair).max_abs; });
  return *std::max_element(vals.begin(), vals.end());
}

struct VerifyResult {
  double empirical = 0.0;
  double theoretical = 0.0;
  bool satisfied = true;
  double slack = 0.0;
  MixingConstants constants;
};

inline double fd_tolerance(double theoretical) { return 1e-4 * std::max(1.0, theoretical); }

/// Empirical mixing against the Hessian bound. The constants are certified
/// from the model unless an override is given (used to test the harness).
inline VerifyResult verify_bound(const MpnnModel& model, const Graph& g, NodePair pair, const InputBox& box,
                                 std::size_t samples, std::uint64_t seed,
                                 const std::optional<MixingConstants>& override_constants = std::nullopt,
                                 int threads = 1) {
  model.validate();
  if (model.depth() < 1) throw InvalidArgument("verify_bound: model needs at least one layer");
  MessagePassingMatrix A = build_message_matrix(g, model.matrix_kind);
  VerifyResult r;
  r.constants = override_constants ? *override_constants : certify_constants(model, box, &A).constants;
  r.theoretical = mixing_bound(g, A, r.constants, model.depth(), pair).total_bound;
  r.empirical = empirical_max_mixing(model, A, pair, box, samples, seed, threads);
  r.slack = r.theoretical - r.empirical;
  r.satisfied = r.empirical <= r.theoretical + fd_tolerance(r.theoretical);
  return r;
}

struct JacobianCheck {
  double worst_excess = -INFINITY;  // max over v of ||J_v|| - bound_v
  bool satisfied = true;
};

/// First-order inequality ||d h_v / d x_u|| <= (c_sigma w)^m (S^m)_{vu} for all v.
inline JacobianCheck check_jacobian_bound(const MpnnModel& model, const MessagePassingMatrix& A, const Matrix& X,
                                          int u, const MixingConstants& c) {
  std::vector<Matrix> blocks = fd_jacobian(model, A, X, u);
  Matrix bound = jacobian_bound_matrix(A, c, model.depth());
  JacobianCheck out;
  for (int v = 0; v < A.n(); ++v) {
    const double norm = spectral_norm(blocks[v]);
    const double b = bound(v, u);
    out.worst_excess = std::max(out.worst_excess, norm - b);
    if (norm > b + 1e-6 * std::max(1.0, b)) out.satisfied = false;
  }
  return out;
}

}  // namespace squashscope
