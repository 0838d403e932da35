#pragma once

#include "sklu/model.hpp"
#include "sklu/sketched_lanczos.hpp"

namespace sklu {

enum class ScoreMethod { Slu, LeExact, Lla, DiagLaplace };

const char* score_method_name(ScoreMethod m);
ScoreMethod score_method_from_name(const std::string& name);

/// The rows of J as a t x p stack, one vjp with each canonical output vector.
Matrix jacobian_rows(const MlpModel& m, ConstVectorRef x);

/// Residual Jacobian mass outside the sketched basis:
/// ||J||_F^2 - ||U_S^T (S J^T)||_F^2, clamped at zero. Higher means more
/// uncertain. ||J||_F^2 is exact (t vjp calls), the projection term is the
/// sketched estimate.
double slu_score(const MlpModel& m, const SketchedBasis& basis, ConstVectorRef x);

/// Exact projection residual ||J||_F^2 - ||J U||_F^2 for a dense
/// column-orthonormal basis.
double exact_score(const MlpModel& m, const Matrix& basis, ConstVectorRef x);

/// Linearized-Laplace predictive variance with prior precision alpha:
/// (1/alpha) ||J||_F^2 - sum_i lambda_i / (alpha (lambda_i + alpha)) ||J u_i||^2.
double lla_score(const MlpModel& m, const Matrix& basis, ConstVectorRef eigenvalues,
                 double alpha, ConstVectorRef x);

/// Diagonal-Laplace score sum_j ||J[:, j]||^2 / (G_jj + alpha) given a
/// precomputed GGN diagonal.
double diag_laplace_score_with_diag(const MlpModel& m, ConstVectorRef ggn_diag, double alpha,
                                    ConstVectorRef x);

/// Convenience form that computes the diagonal from the data first. Use the
/// _with_diag variant when scoring many points.
double diag_laplace_score(const MlpModel& m, const Matrix& inputs, LossKind loss, double alpha,
                          ConstVectorRef x);

/// Immutable query-time bundle tying a model to one scoring method. Exactly
/// one of the method-specific fields is used, checked at construction.
class ScorePipeline {
 public:
  static ScorePipeline slu(const MlpModel& m, const SketchedBasis& basis);
  static ScorePipeline le_exact(const MlpModel& m, Matrix basis);
  static ScorePipeline lla(const MlpModel& m, Matrix basis, Vector eigenvalues, double alpha);
  static ScorePipeline diag_laplace(const MlpModel& m, Vector ggn_diag, double alpha);

  double score(ConstVectorRef x) const;
  ScoreMethod method() const { return method_; }

 private:
  ScorePipeline(const MlpModel& m, ScoreMethod method) : model_(&m), method_(method) {}

  const MlpModel* model_;
  ScoreMethod method_;
  const SketchedBasis* sketched_ = nullptr;
  Matrix dense_basis_;
  Vector eigenvalues_;
  Vector ggn_diag_;
  double alpha_ = 1.0;
};

}  // namespace sklu
