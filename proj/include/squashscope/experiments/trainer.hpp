#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "../bounds.hpp"
#include "../generators.hpp"
#include "../mpnn.hpp"
#include "task.hpp"

namespace squashscope::experiments {

// Trainable counterparts of the MPNN layer with tanh activation, MAX readout,
// and an affine output y = theta . READ(h) + b. Scalar inputs sit in channel 0.
enum class ModelTemplate { gcn_like, gin_like, sage_like, gated_like };

inline std::string to_string(ModelTemplate t) {
  switch (t) {
    case ModelTemplate::gcn_like: return "gcn_like";
    case ModelTemplate::gin_like: return "gin_like";
    case ModelTemplate::sage_like: return "sage_like";
    case ModelTemplate::gated_like: return "gated_like";
  }
  return "?";
}

inline ModelTemplate parse_model_template(const std::string& s) {
  for (auto t : {ModelTemplate::gcn_like, ModelTemplate::gin_like, ModelTemplate::sage_like, ModelTemplate::gated_like})
    if (s == to_string(t)) return t;
  throw InvalidArgument("unknown model template '" + s + "'");
}

inline const std::vector<ModelTemplate>& all_templates() {
  static const std::vector<ModelTemplate> t = {ModelTemplate::gcn_like, ModelTemplate::gin_like,
                                               ModelTemplate::sage_like, ModelTemplate::gated_like};
  return t;
}

inline MatrixKind template_matrix_kind(ModelTemplate t) {
  switch (t) {
    case ModelTemplate::gin_like: return MatrixKind::raw;
    case ModelTemplate::sage_like: return MatrixKind::rw;
    default: return MatrixKind::sym;
  }
}

inline MessageFamily template_family(ModelTemplate t) {
  return t == ModelTemplate::gated_like ? MessageFamily::gated : MessageFamily::linear;
}

struct TrainConfig {
  int depth = 8;
  int width = 16;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int epochs = 200;
  int batch_size = 1;
  double init_scale = 1.0;
  int restarts = 3;

  void validate() const {
    if (depth < 1 || width < 1 || epochs < 0 || batch_size < 1 || restarts < 1)
      throw InvalidArgument("train config: depth, width, batch size and restarts must be positive");
    if (!(learning_rate > 0.0) || !(init_scale > 0.0)) throw InvalidArgument("train config: rates must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
      throw InvalidArgument("train config: moment decays must lie in [0, 1)");
  }
};

/// Aggregation data for one graph under one normalization.
struct GraphOperator {
  Matrix A;
  Vector row_sum;
  std::vector<int> src, dst;  // directed edges dst <- src with weight A(dst, src)
  std::vector<double> weight;
};

inline GraphOperator make_operator(const Graph& g, MatrixKind kind) {
  GraphOperator op;
  op.A = build_message_matrix(g, kind).values;
  op.row_sum = op.A.rowwise().sum();
  for (int v = 0; v < g.n(); ++v)
    for (int u : g.neighbors(v)) {
      op.dst.push_back(v);
      op.src.push_back(u);
      op.weight.push_back(op.A(v, u));
    }
  return op;
}

class ScalarMpnn {
 public:
  ScalarMpnn(ModelTemplate tmpl, int width, int depth) : tmpl_(tmpl), d_(width), m_(depth) {
    if (width < 1 || depth < 1) throw InvalidArgument("ScalarMpnn: width and depth must be positive");
    slots_ = template_family(tmpl) == MessageFamily::gated ? 5 : 4;
    params = Vector::Zero(param_count());
  }

  ModelTemplate model_template() const { return tmpl_; }
  int width() const { return d_; }
  int depth() const { return m_; }
  int param_count() const { return m_ * slots_ * d_ * d_ + d_ + 1; }

  /// Layer matrices uniform in [-s, s] with s = scale / sqrt(fan-in); theta
  /// likewise; output bias zero.
  void initialize(std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    const double s = scale / std::sqrt(double(d_));
    for (int i = 0; i < param_count() - 1; ++i) params(i) = uniform_in(rng, -s, s);
    params(param_count() - 1) = 0.0;
  }

  double predict(const GraphOperator& op, const Matrix& features) const { return run(op, features, nullptr).y; }

  /// |y - target| and, when grad is non-null, its gradient added into *grad.
  double loss_and_gradient(const GraphOperator& op, const Matrix& features, double target, Vector* grad,
                           double weight = 1.0) const {
    Cache cache;
    const double y = run(op, features, &cache).y;
    const double loss = std::abs(y - target);
    if (grad) backward(op, cache, weight * ((y > target) - (y < target)), *grad);
    return loss;
  }

  Vector params;

 private:
  struct Cache {
    std::vector<Matrix> H, M;  // H[0..m], M[0..m-1]
    std::vector<Matrix> gate, value, hv, hu;
    Vector readout;
    std::vector<int> arg;
  };
  struct Output {
    double y;
  };

  Eigen::Map<const Matrix> block(int layer, int slot) const {
    return Eigen::Map<const Matrix>(params.data() + (layer * slots_ + slot) * d_ * d_, d_, d_);
  }
  static Eigen::Map<Matrix> grad_block(Vector& g, int d, int slots, int layer, int slot) {
    return Eigen::Map<Matrix>(g.data() + (layer * slots + slot) * d * d, d, d);
  }
  Eigen::Map<const Vector> theta() const { return Eigen::Map<const Vector>(params.data() + m_ * slots_ * d_ * d_, d_); }
  double bias() const { return params(param_count() - 1); }

  Output run(const GraphOperator& op, const Matrix& features, Cache* cache) const {
    const int n = static_cast<int>(op.A.rows());
    if (features.rows() != n || features.cols() != 1) throw InvalidArgument("ScalarMpnn: features must be n x 1");
    Matrix H = Matrix::Zero(n, d_);
    H.col(0) = features.col(0);
    if (cache) cache->H.push_back(H);
    const bool gated = slots_ == 5;
    const std::size_t E = op.src.size();
    for (int t = 0; t < m_; ++t) {
      Matrix M;
      if (!gated) {
        M = op.row_sum.asDiagonal() * H * block(t, 2).transpose() + op.A * H * block(t, 3).transpose();
      } else {
        Matrix Hv(E, d_), Hu(E, d_);
        for (std::size_t e = 0; e < E; ++e) {
          Hv.row(e) = H.row(op.dst[e]);
          Hu.row(e) = H.row(op.src[e]);
        }
        Matrix pre = Hv * block(t, 2).transpose() + Hu * block(t, 3).transpose();
        Matrix gate = pre.unaryExpr([](double z) { return sigmoid(z); });
        Matrix value = Hu * block(t, 4).transpose();
        M = Matrix::Zero(n, d_);
        for (std::size_t e = 0; e < E; ++e) M.row(op.dst[e]) += op.weight[e] * gate.row(e).cwiseProduct(value.row(e));
        if (cache) {
          cache->gate.push_back(std::move(gate));
          cache->value.push_back(std::move(value));
          cache->hv.push_back(std::move(Hv));
          cache->hu.push_back(std::move(Hu));
        }
      }
      H = (H * block(t, 0).transpose() + M * block(t, 1).transpose()).array().tanh().matrix();
      if (cache) {
        cache->M.push_back(std::move(M));
        cache->H.push_back(H);
      }
    }
    Vector r(d_);
    std::vector<int> arg(d_);
    for (int c = 0; c < d_; ++c) {
      Eigen::Index i;
      r(c) = H.col(c).maxCoeff(&i);
      arg[c] = static_cast<int>(i);
    }
    if (cache) {
      cache->readout = r;
      cache->arg = std::move(arg);
    }
    return {theta().dot(r) + bias()};
  }

  void backward(const GraphOperator& op, const Cache& cache, double dy, Vector& grad) const {
    if (grad.size() != param_count()) grad = Vector::Zero(param_count());
    if (dy == 0.0) return;
    const int n = static_cast<int>(op.A.rows());
    grad.segment(m_ * slots_ * d_ * d_, d_) += dy * cache.readout;
    grad(param_count() - 1) += dy;
    Matrix dH = Matrix::Zero(n, d_);
    Vector th = theta();
    for (int c = 0; c < d_; ++c) dH(cache.arg[c], c) += dy * th(c);
    const bool gated = slots_ == 5;
    for (int t = m_ - 1; t >= 0; --t) {
      const Matrix& Hin = cache.H[t];
      const Matrix& Hout = cache.H[t + 1];
      Matrix dZ = dH.cwiseProduct((1.0 - Hout.array().square()).matrix());
      grad_block(grad, d_, slots_, t, 0) += dZ.transpose() * Hin;
      grad_block(grad, d_, slots_, t, 1) += dZ.transpose() * cache.M[t];
      Matrix dM = dZ * block(t, 1);
      Matrix dHin = dZ * block(t, 0);
      if (!gated) {
        Matrix DH = op.row_sum.asDiagonal() * Hin;
        grad_block(grad, d_, slots_, t, 2) += dM.transpose() * DH;
        grad_block(grad, d_, slots_, t, 3) += dM.transpose() * (op.A * Hin);
        dHin += op.row_sum.asDiagonal() * dM * block(t, 2) + op.A.transpose() * dM * block(t, 3);
      } else {
        const Matrix& gate = cache.gate[t];
        const Matrix& value = cache.value[t];
        const std::size_t E = op.src.size();
        Matrix dMsg(E, d_);
        for (std::size_t e = 0; e < E; ++e) dMsg.row(e) = op.weight[e] * dM.row(op.dst[e]);
        Matrix dValue = dMsg.cwiseProduct(gate);
        Matrix dPre = dMsg.cwiseProduct(value).cwiseProduct(gate).cwiseProduct((1.0 - gate.array()).matrix());
        grad_block(grad, d_, slots_, t, 2) += dPre.transpose() * cache.hv[t];
        grad_block(grad, d_, slots_, t, 3) += dPre.transpose() * cache.hu[t];
        grad_block(grad, d_, slots_, t, 4) += dValue.transpose() * cache.hu[t];
        Matrix dHv = dPre * block(t, 2);
        Matrix dHu = dPre * block(t, 3) + dValue * block(t, 4);
        for (std::size_t e = 0; e < E; ++e) {
          dHin.row(op.dst[e]) += dHv.row(e);
          dHin.row(op.src[e]) += dHu.row(e);
        }
      }
      dH = std::move(dHin);
    }
  }

  ModelTemplate tmpl_;
  int d_;
  int m_;
  int slots_;
};

struct GradientCheck {
  double rel_error = 0.0;  // ||analytic - fd|| / max(||analytic||, ||fd||)
  double max_abs_error = 0.0;
  int parameters = 0;
};

/// Central-difference check of the loss gradient. The caller keeps the
/// prediction away from the target so the absolute value stays smooth.
inline GradientCheck check_gradient(const ScalarMpnn& model, const GraphOperator& op, const Matrix& features,
                                    double target, double h = 1e-6) {
  Vector analytic = Vector::Zero(model.param_count());
  model.loss_and_gradient(op, features, target, &analytic);
  ScalarMpnn probe = model;
  Vector fd(model.param_count());
  for (int p = 0; p < model.param_count(); ++p) {
    const double keep = probe.params(p);
    probe.params(p) = keep + h;
    const double up = probe.loss_and_gradient(op, features, target, nullptr);
    probe.params(p) = keep - h;
    const double down = probe.loss_and_gradient(op, features, target, nullptr);
    probe.params(p) = keep;
    fd(p) = (up - down) / (2.0 * h);
  }
  GradientCheck out;
  out.parameters = model.param_count();
  const double scale = std::max({analytic.norm(), fd.norm(), 1e-300});
  out.rel_error = (analytic - fd).norm() / scale;
  out.max_abs_error = (analytic - fd).cwiseAbs().maxCoeff();
  return out;
}

struct TrainResult {
  std::vector<double> train_curve;  // mean train MAE per epoch
  double test_mae = 0.0;
  double test_rel_mae = 0.0;
  bool diverged = false;
  std::string diagnostic;
};

inline double mean_abs_target(const std::vector<Instance>& set) {
  double s = 0.0;
  for (const Instance& i : set) s += std::abs(i.target);
  return set.empty() ? 0.0 : s / set.size();
}

inline double evaluate_mae(const ScalarMpnn& model, const std::vector<GraphOperator>& ops,
                           const std::vector<Instance>& set) {
  double s = 0.0;
  for (const Instance& i : set) s += std::abs(model.predict(ops[i.graph_index], i.features) - i.target);
  return set.empty() ? 0.0 : s / set.size();
}

/// One training run: Adam on the MAE loss, seeded init and shuffling.
inline TrainResult train_once(ModelTemplate tmpl, const std::vector<GraphOperator>& ops, const Dataset& data,
                              const TrainConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (data.train.empty() || data.test.empty()) throw InvalidArgument("train: dataset split is empty");
  ScalarMpnn model(tmpl, cfg.width, cfg.depth);
  model.initialize(mix_seed(seed, 0), cfg.init_scale);
  const int P = model.param_count();
  Vector m1 = Vector::Zero(P), m2 = Vector::Zero(P), grad(P);
  Rng rng(mix_seed(seed, 1));
  std::vector<std::size_t> order(data.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  long step = 0;
  TrainResult out;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_below(rng, i)]);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double w = 1.0 / double(end - start);
      grad.setZero();
      for (std::size_t k = start; k < end; ++k) {
        const Instance& inst = data.train[order[k]];
        total += model.loss_and_gradient(ops[inst.graph_index], inst.features, inst.target, &grad, w);
      }
      if (!grad.allFinite()) {
        out.diverged = true;
        out.diagnostic = "non-finite gradient at epoch " + std::to_string(epoch);
        return out;
      }
      ++step;
      m1 = cfg.beta1 * m1 + (1.0 - cfg.beta1) * grad;
      m2 = cfg.beta2 * m2 + (1.0 - cfg.beta2) * grad.cwiseAbs2();
      const double c1 = 1.0 - std::pow(cfg.beta1, step), c2 = 1.0 - std::pow(cfg.beta2, step);
      model.params.array() -= cfg.learning_rate * (m1.array() / c1) / ((m2.array() / c2).sqrt() + cfg.adam_eps);
    }
    const double epoch_mae = total / order.size();
    if (!std::isfinite(epoch_mae)) {
      out.diverged = true;
      out.diagnostic = "non-finite loss at epoch " + std::to_string(epoch);
      return out;
    }
    out.train_curve.push_back(epoch_mae);
  }
  out.test_mae = evaluate_mae(model, ops, data.test);
  const double scale = mean_abs_target(data.test);
  out.test_rel_mae = scale > 0.0 ? out.test_mae / scale : out.test_mae;
  if (!std::isfinite(out.test_mae)) {
    out.diverged = true;
    out.diagnostic = "non-finite test MAE";
  }
  return out;
}

}  // namespace squashscope::experiments
