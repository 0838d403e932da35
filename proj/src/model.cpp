#include "sklu/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sklu/errors.hpp"
#include "sklu/prng.hpp"

namespace sklu {

namespace {

double activate(double z, Activation a) {
  return a == Activation::Tanh ? std::tanh(z) : (z > 0.0 ? z : 0.0);
}

// Derivative in terms of (pre-activation z, post-activation a). The relu
// subgradient at exactly 0 is 0.
double activate_deriv(double z, double a, Activation act) {
  return act == Activation::Tanh ? 1.0 - a * a : (z > 0.0 ? 1.0 : 0.0);
}

Vector softmax(ConstVectorRef logits) {
  Vector p = (logits.array() - logits.maxCoeff()).exp();
  p /= p.sum();
  return p;
}

struct LayerView {
  Eigen::Map<const Matrix> w;
  Eigen::Map<const Vector> b;
};

LayerView layer_view(const Vector& params, const std::vector<Index>& dims, Index l,
                     Index offset) {
  const Index in = dims[std::size_t(l)];
  const Index out = dims[std::size_t(l) + 1];
  return {Eigen::Map<const Matrix>(params.data() + offset, out, in),
          Eigen::Map<const Vector>(params.data() + offset + in * out, out)};
}

Index layer_offset(const std::vector<Index>& dims, Index l) {
  Index off = 0;
  for (Index i = 0; i < l; ++i) off += (dims[std::size_t(i)] + 1) * dims[std::size_t(i) + 1];
  return off;
}

}  // namespace

Index MlpModel::param_count() const {
  return layer_offset(layer_dims, layer_count());
}

MlpModel mlp_init(std::vector<Index> layer_dims, Activation act, std::uint64_t seed) {
  MlpModel m;
  m.layer_dims = std::move(layer_dims);
  m.activation = act;
  m.params = Vector::Zero(m.param_count());
  SplitMix64 rng(seed);
  for (Index l = 0; l < m.layer_count(); ++l) {
    const Index in = m.layer_dims[std::size_t(l)];
    const Index out = m.layer_dims[std::size_t(l) + 1];
    const double scale =
        act == Activation::Relu ? std::sqrt(2.0 / double(in)) : std::sqrt(1.0 / double(in));
    const Index off = layer_offset(m.layer_dims, l);
    for (Index i = 0; i < in * out; ++i) m.params[off + i] = scale * rng.next_gaussian();
    // biases stay zero
  }
  return m;
}

Vector forward(const MlpModel& m, ConstVectorRef x) {
  if (x.size() != m.input_dim()) throw DimensionMismatch("forward: input length != d");
  Vector a = x;
  Index off = 0;
  for (Index l = 0; l < m.layer_count(); ++l) {
    const LayerView lay = layer_view(m.params, m.layer_dims, l, off);
    Vector z = lay.w * a + lay.b;
    if (l + 1 < m.layer_count())
      for (Index i = 0; i < z.size(); ++i) z[i] = activate(z[i], m.activation);
    a = std::move(z);
    off += (m.layer_dims[std::size_t(l)] + 1) * m.layer_dims[std::size_t(l) + 1];
  }
  return a;
}

Vector jvp(const MlpModel& m, ConstVectorRef x, ConstVectorRef v) {
  if (x.size() != m.input_dim()) throw DimensionMismatch("jvp: input length != d");
  if (v.size() != m.param_count()) throw DimensionMismatch("jvp: tangent length != p");
  Vector a = x;
  Vector da = Vector::Zero(x.size());
  Index off = 0;
  for (Index l = 0; l < m.layer_count(); ++l) {
    const Index in = m.layer_dims[std::size_t(l)];
    const Index out = m.layer_dims[std::size_t(l) + 1];
    const LayerView lay = layer_view(m.params, m.layer_dims, l, off);
    const Eigen::Map<const Matrix> dw(v.data() + off, out, in);
    const Eigen::Map<const Vector> db(v.data() + off + in * out, out);

    Vector z = lay.w * a + lay.b;
    Vector dz = dw * a + lay.w * da + db;
    if (l + 1 < m.layer_count()) {
      a.resize(out);
      da.resize(out);
      for (Index i = 0; i < out; ++i) {
        const double ai = activate(z[i], m.activation);
        a[i] = ai;
        da[i] = activate_deriv(z[i], ai, m.activation) * dz[i];
      }
    } else {
      return dz;
    }
    off += (in + 1) * out;
  }
  return a;  // unreachable for layer_count >= 1
}

Vector vjp(const MlpModel& m, ConstVectorRef x, ConstVectorRef u) {
  if (x.size() != m.input_dim()) throw DimensionMismatch("vjp: input length != d");
  if (u.size() != m.output_dim()) throw DimensionMismatch("vjp: cotangent length != t");
  const Index layers = m.layer_count();
  const std::size_t n_layers = std::size_t(layers);

  // Forward pass, keeping pre- and post-activations per layer.
  std::vector<Vector> zs(n_layers);
  std::vector<Vector> as(n_layers + 1);
  as[0] = x;
  Index off = 0;
  for (Index l = 0; l < layers; ++l) {
    const LayerView lay = layer_view(m.params, m.layer_dims, l, off);
    zs[std::size_t(l)] = lay.w * as[std::size_t(l)] + lay.b;
    Vector a = zs[std::size_t(l)];
    if (l + 1 < layers)
      for (Index i = 0; i < a.size(); ++i) a[i] = activate(a[i], m.activation);
    as[std::size_t(l) + 1] = std::move(a);
    off += (m.layer_dims[std::size_t(l)] + 1) * m.layer_dims[std::size_t(l) + 1];
  }

  Vector out = Vector::Zero(m.param_count());
  Vector g = u;
  for (Index l = layers - 1; l >= 0; --l) {
    const Index in = m.layer_dims[std::size_t(l)];
    const Index n_out = m.layer_dims[std::size_t(l) + 1];
    off = layer_offset(m.layer_dims, l);
    Eigen::Map<Matrix> gw(out.data() + off, n_out, in);
    Eigen::Map<Vector> gb(out.data() + off + in * n_out, n_out);
    gw.noalias() = g * as[std::size_t(l)].transpose();
    gb = g;
    if (l > 0) {
      const LayerView lay = layer_view(m.params, m.layer_dims, l, off);
      Vector back = lay.w.transpose() * g;
      const Vector& z = zs[std::size_t(l) - 1];
      const Vector& a = as[std::size_t(l)];
      for (Index i = 0; i < back.size(); ++i)
        back[i] *= activate_deriv(z[i], a[i], m.activation);
      g = std::move(back);
    }
  }
  return out;
}

Matrix loss_output_hessian(LossKind loss, ConstVectorRef f_out) {
  const Index t = f_out.size();
  if (loss == LossKind::Mse) return Matrix::Identity(t, t);
  const Vector p = softmax(f_out);
  Matrix h = Matrix(p.asDiagonal());
  h.noalias() -= p * p.transpose();
  return h;
}

GgnOperator::GgnOperator(const MlpModel& model, const Matrix& inputs, LossKind loss)
    : model_(model), inputs_(inputs), loss_(loss) {
  if (inputs_.rows() != model.input_dim())
    throw DimensionMismatch("GgnOperator: input rows != model input dim");
  if (loss_ == LossKind::CrossEntropy) {
    probs_.resize(model.output_dim(), inputs_.cols());
    for (Index i = 0; i < inputs_.cols(); ++i) probs_.col(i) = softmax(forward(model_, inputs_.col(i)));
  }
}

Index GgnOperator::dim() const { return model_.param_count(); }

void GgnOperator::apply(ConstVectorRef x, VectorRef y) const {
  if (x.size() != dim()) throw DimensionMismatch("GgnOperator: vector length != p");
  y.setZero();
  for (Index i = 0; i < inputs_.cols(); ++i) {
    Vector jx = jvp(model_, inputs_.col(i), x);
    if (loss_ == LossKind::CrossEntropy) {
      const auto pi = probs_.col(i);
      jx = pi.cwiseProduct(jx) - pi * pi.dot(jx);
    }
    y += vjp(model_, inputs_.col(i), jx);
  }
}

Vector ggn_diagonal(const MlpModel& model, const Matrix& inputs, LossKind loss) {
  const Index t = model.output_dim();
  Vector diag = Vector::Zero(model.param_count());
  for (Index i = 0; i < inputs.cols(); ++i) {
    Matrix h_sqrt;
    if (loss == LossKind::CrossEntropy) {
      const Matrix h = loss_output_hessian(loss, forward(model, inputs.col(i)));
      Eigen::SelfAdjointEigenSolver<Matrix> es(h);
      h_sqrt = es.eigenvectors() *
               es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
               es.eigenvectors().transpose();
    } else {
      h_sqrt = Matrix::Identity(t, t);
    }
    for (Index r = 0; r < t; ++r) {
      const Vector row = vjp(model, inputs.col(i), h_sqrt.col(r));
      diag.array() += row.array().square();
    }
  }
  return diag;
}

namespace {

// dL/df for one sample under the library's loss conventions.
Vector loss_grad(LossKind loss, ConstVectorRef f, const Dataset& data, Index i) {
  if (loss == LossKind::Mse) {
    if (!data.targets) throw DimensionMismatch("mse loss needs regression targets");
    return f - data.targets->col(i);
  }
  if (!data.labels) throw DimensionMismatch("cross-entropy loss needs class labels");
  Vector g = softmax(f);
  g[(*data.labels)[std::size_t(i)]] -= 1.0;
  return g;
}

double sample_loss(LossKind loss, ConstVectorRef f, const Dataset& data, Index i) {
  if (loss == LossKind::Mse) {
    return 0.5 * (f - data.targets->col(i)).squaredNorm();
  }
  const Vector ls = (f.array() - f.maxCoeff()).exp();
  const double log_z = std::log(ls.sum()) + f.maxCoeff();
  return log_z - f[(*data.labels)[std::size_t(i)]];
}

}  // namespace

TrainResult train_sgd(const MlpModel& m, const Dataset& data, LossKind loss, Index epochs,
                      double lr, Index batch, std::uint64_t seed) {
  if (data.size() == 0) throw EmptyInput("train_sgd: empty dataset");
  if (batch < 1) throw InvalidDimensions("train_sgd: batch must be >= 1");
  TrainResult result;
  result.model = m;
  MlpModel& model = result.model;

  std::vector<Index> order(std::size_t(data.size()));
  std::iota(order.begin(), order.end(), Index{0});
  SplitMix64 rng(seed);

  for (Index epoch = 0; epoch < epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = std::size_t(rng.next_below(i));
      std::swap(order[i - 1], order[j]);
    }
    double epoch_loss = 0.0;
    for (Index start = 0; start < data.size(); start += batch) {
      const Index bsz = std::min(batch, data.size() - start);
      Vector grad = Vector::Zero(model.param_count());
      for (Index b = 0; b < bsz; ++b) {
        const Index idx = order[std::size_t(start + b)];
        const Vector f = forward(model, data.inputs.col(idx));
        epoch_loss += sample_loss(loss, f, data, idx);
        grad += vjp(model, data.inputs.col(idx), loss_grad(loss, f, data, idx));
      }
      model.params -= (lr / double(bsz)) * grad;
    }
    epoch_loss /= double(data.size());
    if (!std::isfinite(epoch_loss))
      throw NonFiniteLoss("train_sgd: loss diverged at epoch " + std::to_string(epoch) +
                          " (value " + std::to_string(epoch_loss) + ")");
    result.epoch_losses.push_back(epoch_loss);
  }
  result.final_loss = result.epoch_losses.empty() ? mean_loss(model, data, loss)
                                                  : result.epoch_losses.back();
  return result;
}

double mean_loss(const MlpModel& m, const Dataset& data, LossKind loss) {
  double total = 0.0;
  for (Index i = 0; i < data.size(); ++i)
    total += sample_loss(loss, forward(m, data.inputs.col(i)), data, i);
  return total / double(data.size());
}

double accuracy(const MlpModel& m, const Dataset& data) {
  if (!data.labels) throw DimensionMismatch("accuracy: dataset has no class labels");
  Index correct = 0;
  for (Index i = 0; i < data.size(); ++i) {
    Index argmax = 0;
    forward(m, data.inputs.col(i)).maxCoeff(&argmax);
    if (int(argmax) == (*data.labels)[std::size_t(i)]) ++correct;
  }
  return double(correct) / double(data.size());
}

}  // namespace sklu
