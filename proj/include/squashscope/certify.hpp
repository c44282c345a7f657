#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mpnn.hpp"

namespace squashscope {

/// Per-coordinate interval for the node features: lo(i, a) <= X(i, a) <= hi(i, a).
struct InputBox {
  Matrix lo;
  Matrix hi;

  static InputBox uniform(int n, int d, double lo, double hi) {
    return {Matrix::Constant(n, d, lo), Matrix::Constant(n, d, hi)};
  }
  static InputBox point(const Matrix& X) { return {X, X}; }

  int n() const { return static_cast<int>(lo.rows()); }
  int d() const { return static_cast<int>(lo.cols()); }

  void validate() const {
    if (lo.rows() != hi.rows() || lo.cols() != hi.cols()) throw InvalidArgument("input box: lo/hi shape mismatch");
    if ((lo.array() > hi.array()).any()) throw InvalidArgument("input box: lo must not exceed hi");
    if (!lo.allFinite() || !hi.allFinite()) throw InvalidArgument("input box: bounds must be finite");
  }

  /// sup |x_a| over all nodes, per channel.
  Vector channel_sup() const {
    return lo.cwiseAbs().cwiseMax(hi.cwiseAbs()).colwise().maxCoeff().transpose();
  }
};

inline constexpr double kSigmoidPrimeSup = 0.25;
inline const double kSigmoidSecondSup = 1.0 / (6.0 * std::sqrt(3.0));

/// Upper bound on the spectral norm ||W||_2. Power iteration on W^T W gives a
/// Rayleigh quotient rho and residual r; some eigenvalue lies in [rho - r,
/// rho + r], and from a positive start vector that is the top one. The result
/// is sqrt(rho + r) with a relative pad, never above the Frobenius norm.
inline double operator_norm(const Matrix& W, int max_iter = 20000) {
  if (W.size() == 0) return 0.0;
  const double fro = W.norm();
  if (fro == 0.0) return 0.0;
  Matrix M = W.transpose() * W;
  const int n = static_cast<int>(M.rows());
  Vector x(n);
  for (int i = 0; i < n; ++i) x(i) = 1.0 + 0.1 * i / n;
  x.normalize();
  double rho = 0.0, resid = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector y = M * x;
    rho = x.dot(y);
    resid = (y - rho * x).norm();
    if (resid <= 1e-14 * std::max(rho, 1e-300)) break;
    const double ny = y.norm();
    if (ny == 0.0) {
      // x landed in the kernel: restart from a different direction.
      x = Vector::Unit(n, it % n);
      continue;
    }
    x = y / ny;
  }
  return std::min(fro, std::sqrt(rho + resid) * (1.0 + 1e-10));
}

struct LayerCertificate {
  double omega = 0.0;
  double w = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c2nd = 0.0;
  Vector state_sup;  // per-channel sup |h| entering the layer
};

struct CertifiedConstants {
  MixingConstants constants;
  std::vector<LayerCertificate> per_layer;
  std::vector<std::string> formulas;
};

/// Certified constants for a model. Gated messages need a bound on the
/// incoming states: the input box supplies it for the first layer; later
/// layers use |tanh| <= 1, or interval propagation through the aggregation
/// matrix for unbounded activations (which then requires A).
inline CertifiedConstants certify_constants(const MpnnModel& model, const std::optional<InputBox>& box = std::nullopt,
                                            const MessagePassingMatrix* A = nullptr) {
  model.validate();
  const int d = model.width();
  CertifiedConstants out;
  out.constants.omega = 0.0;
  out.constants.w = 0.0;
  out.constants.c1 = 0.0;
  out.constants.c2 = 0.0;
  out.constants.c2nd = 0.0;
  out.constants.c_sigma = activation_c_sigma(model.activation);
  out.formulas.push_back("omega = max_t ||Omega_t||_2, w = max_t ||W_t||_2 (power iteration, residual-padded)");
  out.formulas.push_back("c_sigma = " + std::string(model.activation == Activation::gelu ? "1.13 (sup |GELU'|)" : "1"));

  bool any_gated = false;
  for (const Layer& L : model.layers) any_gated |= L.message.family == MessageFamily::gated;
  if (any_gated) {
    out.formulas.push_back("gated: c1 = 1/4 max_r sup|u_r.y| ||G1||; c2 = 1/4 max_r sup|u_r.y| ||G2|| + ||U||");
    out.formulas.push_back(
        "gated: c2nd = sqrt(sum_r (sup|s''| sup|u_r.y| ||g_r||^2 + 2 sup|s'| ||g_r|| ||u_r||)^2), g_r = [G1_r, G2_r]");
  } else {
    out.formulas.push_back("linear: c1 = ||C1||, c2 = ||C2||, c2nd = 0");
  }

  std::optional<Vector> sup;
  if (box) {
    box->validate();
    if (box->d() != d) throw InvalidArgument("certify_constants: input box width does not match the model");
    sup = box->channel_sup();
  }
  double row_bound = -1.0;
  if (A) row_bound = A->values.cwiseAbs().rowwise().sum().maxCoeff();

  for (std::size_t t = 0; t < model.layers.size(); ++t) {
    const Layer& L = model.layers[t];
    LayerCertificate lc;
    lc.omega = operator_norm(L.Omega);
    lc.w = operator_norm(L.W);
    const MessageFunction& psi = L.message;
    Vector msg_sup;  // per-channel sup |psi|
    if (psi.family == MessageFamily::linear) {
      lc.c1 = operator_norm(psi.C1);
      lc.c2 = operator_norm(psi.C2);
      if (sup) msg_sup = (psi.C1.cwiseAbs() + psi.C2.cwiseAbs()) * *sup;
    } else {
      if (!sup) throw InvalidArgument(
            "certify_constants: gated messages need a declared input box (and the aggregation matrix when the "
            "activation is unbounded)");
      lc.state_sup = *sup;
      Vector uy = psi.U.cwiseAbs() * *sup;  // sup |u_r . y|
      const double max_uy = uy.maxCoeff();
      lc.c1 = kSigmoidPrimeSup * max_uy * operator_norm(psi.G1);
      lc.c2 = kSigmoidPrimeSup * max_uy * operator_norm(psi.G2) + operator_norm(psi.U);
      double acc = 0.0;
      for (int r = 0; r < d; ++r) {
        const double g2 = psi.G1.row(r).squaredNorm() + psi.G2.row(r).squaredNorm();
        const double term =
            kSigmoidSecondSup * uy(r) * g2 + 2.0 * kSigmoidPrimeSup * std::sqrt(g2) * psi.U.row(r).norm();
        acc += term * term;
      }
      lc.c2nd = std::sqrt(acc);
      msg_sup = uy;
    }
    if (sup) lc.state_sup = *sup;

    // Bound on the states leaving this layer.
    if (model.activation == Activation::tanh) {
      sup = Vector::Ones(d);
    } else if (sup && row_bound >= 0.0) {
      Vector z = L.Omega.cwiseAbs() * *sup + row_bound * (L.W.cwiseAbs() * msg_sup);
      sup = z;  // |identity(z)| = |z| and |GELU(z)| <= |z|
    } else {
      sup.reset();
    }

    out.constants.omega = std::max(out.constants.omega, lc.omega);
    out.constants.w = std::max(out.constants.w, lc.w);
    out.constants.c1 = std::max(out.constants.c1, lc.c1);
    out.constants.c2 = std::max(out.constants.c2, lc.c2);
    out.constants.c2nd = std::max(out.constants.c2nd, lc.c2nd);
    out.per_layer.push_back(std::move(lc));
  }
  return out;
}

}  // namespace squashscope
