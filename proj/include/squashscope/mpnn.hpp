#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "bounds.hpp"
#include "generators.hpp"
#include "graph.hpp"

namespace squashscope {

// exp is not a valid model activation for certification (its derivatives are
// unbounded); it exists so that unbounded targets can be emulated.
enum class Activation { tanh, gelu, identity, exp };
enum class Readout { sum, mean, max };
enum class MessageFamily { linear, gated };

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::tanh: return "tanh";
    case Activation::gelu: return "gelu";
    case Activation::identity: return "identity";
    case Activation::exp: return "exp";
  }
  return "?";
}

inline std::string to_string(Readout r) {
  switch (r) {
    case Readout::sum: return "sum";
    case Readout::mean: return "mean";
    case Readout::max: return "max";
  }
  return "?";
}

inline std::string to_string(MessageFamily f) { return f == MessageFamily::linear ? "linear" : "gated"; }

inline Activation parse_activation(const std::string& s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "gelu") return Activation::gelu;
  if (s == "identity") return Activation::identity;
  if (s == "exp") return Activation::exp;
  throw InvalidArgument("unknown activation '" + s + "'");
}

inline Readout parse_readout(const std::string& s) {
  if (s == "sum") return Readout::sum;
  if (s == "mean") return Readout::mean;
  if (s == "max") return Readout::max;
  throw InvalidArgument("unknown readout '" + s + "'");
}

inline MessageFamily parse_message_family(const std::string& s) {
  if (s == "linear") return MessageFamily::linear;
  if (s == "gated") return MessageFamily::gated;
  throw InvalidArgument("unknown message family '" + s + "'");
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double activate(Activation a, double z) {
  switch (a) {
    case Activation::tanh: return std::tanh(z);
    case Activation::gelu: return 0.5 * z * (1.0 + std::erf(z / std::sqrt(2.0)));
    case Activation::identity: return z;
    case Activation::exp: return std::exp(z);
  }
  return z;
}

inline double activate_derivative(Activation a, double z) {
  switch (a) {
    case Activation::tanh: {
      double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::gelu: {
      const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
      return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0))) + z * pdf;
    }
    case Activation::identity: return 1.0;
    case Activation::exp: return std::exp(z);
  }
  return 1.0;
}

/// sup over the reals of max(|sigma'|, |sigma''|). GELU's first derivative
/// peaks at about 1.1289 (z = sqrt 2), which dominates sup|GELU''| = 0.798.
inline double activation_c_sigma(Activation a) {
  switch (a) {
    case Activation::tanh: return 1.0;
    case Activation::gelu: return 1.13;
    case Activation::identity: return 1.0;
    case Activation::exp: break;
  }
  throw InvalidArgument("activation '" + to_string(a) + "' has unbounded derivatives");
}

/// psi(x, y): x is the receiving node's state, y the sender's.
struct MessageFunction {
  MessageFamily family = MessageFamily::linear;
  Matrix C1, C2;     // linear
  Matrix G1, G2, U;  // gated: sigmoid(G1 x + G2 y) * (U y)

  static MessageFunction linear(Matrix c1, Matrix c2) {
    MessageFunction m;
    m.family = MessageFamily::linear;
    m.C1 = std::move(c1);
    m.C2 = std::move(c2);
    return m;
  }

  static MessageFunction gated(Matrix g1, Matrix g2, Matrix u) {
    MessageFunction m;
    m.family = MessageFamily::gated;
    m.G1 = std::move(g1);
    m.G2 = std::move(g2);
    m.U = std::move(u);
    return m;
  }

  Vector operator()(const Vector& x, const Vector& y) const {
    if (family == MessageFamily::linear) return C1 * x + C2 * y;
    Vector gate = (G1 * x + G2 * y).unaryExpr([](double z) { return sigmoid(z); });
    return gate.cwiseProduct(U * y);
  }

  std::vector<const Matrix*> matrices() const {
    if (family == MessageFamily::linear) return {&C1, &C2};
    return {&G1, &G2, &U};
  }
};

struct Layer {
  Matrix Omega;
  Matrix W;
  MessageFunction message;
};

struct MpnnModel {
  std::vector<Layer> layers;
  Activation activation = Activation::tanh;
  Readout readout = Readout::sum;
  Vector theta;
  MatrixKind matrix_kind = MatrixKind::sym;

  int width() const { return static_cast<int>(theta.size()); }
  int depth() const { return static_cast<int>(layers.size()); }

  void validate() const {
    const int d = width();
    if (d < 1) throw InvalidArgument("model: theta must be nonempty");
    if (std::abs(theta.norm() - 1.0) > 1e-12) throw InvalidArgument("model: theta must have unit norm");
    for (const Layer& L : layers) {
      std::vector<const Matrix*> ms = {&L.Omega, &L.W};
      for (const Matrix* m : L.message.matrices()) ms.push_back(m);
      for (const Matrix* m : ms)
        if (m->rows() != d || m->cols() != d) throw InvalidArgument("model: every layer matrix must be d x d");
    }
  }
};

struct ForwardResult {
  Matrix node_states;
  double graph_output = 0.0;
};

/// Per-channel readout of the final states (before the theta projection).
inline Vector read_out(Readout r, const Matrix& H) {
  switch (r) {
    case Readout::sum: return H.colwise().sum().transpose();
    case Readout::mean: return H.colwise().mean().transpose();
    case Readout::max: return H.colwise().maxCoeff().transpose();
  }
  return {};
}

/// One application of the layer to all node states (rows of H).
inline Matrix apply_layer(const Layer& L, Activation act, const MessagePassingMatrix& A, const Matrix& H) {
  const int n = static_cast<int>(H.rows());
  Matrix M;
  if (L.message.family == MessageFamily::linear) {
    Vector rows = A.values.rowwise().sum();
    M = rows.asDiagonal() * H * L.message.C1.transpose() + A.values * H * L.message.C2.transpose();
  } else {
    M = Matrix::Zero(n, H.cols());
    for (int v = 0; v < n; ++v)
      for (int u = 0; u < n; ++u)
        if (A.values(v, u) != 0.0)
          M.row(v) += A.values(v, u) * L.message(H.row(v).transpose(), H.row(u).transpose()).transpose();
  }
  Matrix Z = H * L.Omega.transpose() + M * L.W.transpose();
  return Z.unaryExpr([act](double z) { return activate(act, z); });
}

inline ForwardResult forward(const MpnnModel& model, const MessagePassingMatrix& A, const Matrix& X) {
  if (X.rows() != A.n()) throw InvalidArgument("forward: feature rows must equal the node count");
  if (X.cols() != model.width()) throw InvalidArgument("forward: feature width does not match the model");
  ForwardResult r;
  r.node_states = X;
  for (const Layer& L : model.layers) r.node_states = apply_layer(L, model.activation, A, r.node_states);
  r.graph_output = model.theta.dot(read_out(model.readout, r.node_states));
  return r;
}

inline ForwardResult forward(const MpnnModel& model, const Graph& g, const Matrix& X) {
  model.validate();
  return forward(model, build_message_matrix(g, model.matrix_kind), X);
}

// ---------------------------------------------------------------------------
// Random models

struct RandomModelSpec {
  int width = 2;
  int depth = 2;
  MessageFamily family = MessageFamily::linear;
  Activation activation = Activation::tanh;
  Readout readout = Readout::sum;
  MatrixKind matrix_kind = MatrixKind::sym;
  double scale = 1.0;  // entries uniform in [-scale/sqrt(d), scale/sqrt(d)]
};

inline Matrix random_matrix(Rng& rng, int rows, int cols, double bound) {
  Matrix M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = uniform_in(rng, -bound, bound);
  return M;
}

inline MpnnModel random_model(const RandomModelSpec& spec, std::uint64_t seed) {
  if (spec.width < 1 || spec.depth < 0) throw InvalidArgument("random_model: width >= 1 and depth >= 0 required");
  Rng rng(seed);
  const int d = spec.width;
  const double s = spec.scale / std::sqrt(double(d));
  MpnnModel model;
  model.activation = spec.activation;
  model.readout = spec.readout;
  model.matrix_kind = spec.matrix_kind;
  for (int t = 0; t < spec.depth; ++t) {
    Layer L;
    L.Omega = random_matrix(rng, d, d, s);
    L.W = random_matrix(rng, d, d, s);
    if (spec.family == MessageFamily::linear) {
      Matrix c1 = random_matrix(rng, d, d, s);
      L.message = MessageFunction::linear(std::move(c1), random_matrix(rng, d, d, s));
    } else {
      Matrix g1 = random_matrix(rng, d, d, s);
      Matrix g2 = random_matrix(rng, d, d, s);
      L.message = MessageFunction::gated(std::move(g1), std::move(g2), random_matrix(rng, d, d, s));
    }
    model.layers.push_back(std::move(L));
  }
  Vector theta(d);
  for (int i = 0; i < d; ++i) theta(i) = uniform_in(rng, -1.0, 1.0);
  if (theta.norm() == 0.0) theta(0) = 1.0;
  model.theta = theta / theta.norm();
  return model;
}

/// Scalar emulator of the target act(x_v + x_u) on the path P_2: one layer,
/// Omega = W = 1, psi(x, y) = y, raw aggregation, mean readout.
inline MpnnModel pair_sum_emulator(Activation act) {
  MpnnModel model;
  model.activation = act;
  model.readout = Readout::mean;
  model.matrix_kind = MatrixKind::raw;
  Matrix one = Matrix::Constant(1, 1, 1.0);
  model.layers.push_back({one, one, MessageFunction::linear(Matrix::Zero(1, 1), one)});
  model.theta = Vector::Constant(1, 1.0);
  return model;
}

}  // namespace squashscope
