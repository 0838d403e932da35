#pragma once

#include <cstdint>
#include <vector>

#include "sklu/data.hpp"
#include "sklu/operators.hpp"
#include "sklu/types.hpp"

namespace sklu {

enum class Activation { Tanh, Relu };
enum class LossKind { Mse, CrossEntropy };

/// Small fully-connected network with a flat parameter vector. Layout per
/// layer: weight matrix (out x in, column-major), then bias. The last layer
/// is affine, hidden layers apply the activation.
struct MlpModel {
  std::vector<Index> layer_dims;  // [d, h1, ..., t]
  Activation activation = Activation::Tanh;
  Vector params;

  Index input_dim() const { return layer_dims.front(); }
  Index output_dim() const { return layer_dims.back(); }
  Index param_count() const;
  Index layer_count() const { return Index(layer_dims.size()) - 1; }
};

/// Deterministic fan-in-scaled Gaussian init, zero biases.
MlpModel mlp_init(std::vector<Index> layer_dims, Activation act, std::uint64_t seed);

Vector forward(const MlpModel& m, ConstVectorRef x);

/// J_theta(x) . v by forward-mode tangent propagation.
Vector jvp(const MlpModel& m, ConstVectorRef x, ConstVectorRef v);

/// J_theta(x)^T . u by reverse accumulation.
Vector vjp(const MlpModel& m, ConstVectorRef x, ConstVectorRef u);

/// Hessian of the loss w.r.t. the network output. Mse uses the 1/2 ||y-f||^2
/// convention so the Hessian is the identity; cross-entropy treats f as
/// logits and returns diag(pi) - pi pi^T.
Matrix loss_output_hessian(LossKind loss, ConstVectorRef f_out);

/// Generalized Gauss-Newton operator sum_i J_i^T H_i J_i over the dataset
/// inputs. Softmax probabilities are cached per datum at construction, so
/// apply() is two passes (jvp + vjp) per datum.
class GgnOperator final : public LinearOperator {
 public:
  GgnOperator(const MlpModel& model, const Matrix& inputs, LossKind loss);

  Index dim() const override;
  void apply(ConstVectorRef x, VectorRef y) const override;
  Index data_size() const { return inputs_.cols(); }

 private:
  const MlpModel& model_;
  Matrix inputs_;
  LossKind loss_;
  Matrix probs_;  // t x n softmax cache, cross-entropy only
};

/// Exact diagonal of the GGN, accumulated per parameter from the rows of
/// H^{1/2} J. Memory stays at one p-vector.
Vector ggn_diagonal(const MlpModel& model, const Matrix& inputs, LossKind loss);

struct TrainResult {
  MlpModel model;
  double final_loss = 0.0;
  std::vector<double> epoch_losses;
};

/// Plain mini-batch SGD, shuffle seeded per epoch. Throws NonFiniteLoss when
/// the running loss stops being finite.
TrainResult train_sgd(const MlpModel& m, const Dataset& data, LossKind loss, Index epochs,
                      double lr, Index batch, std::uint64_t seed);

/// Mean loss over a dataset (same conventions as train_sgd).
double mean_loss(const MlpModel& m, const Dataset& data, LossKind loss);

/// Classification accuracy by argmax over the outputs.
double accuracy(const MlpModel& m, const Dataset& data);

}  // namespace sklu
