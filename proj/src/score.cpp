#include "sklu/score.hpp"

#include <algorithm>
#include <string>

#include "sklu/errors.hpp"
#include "sklu/linalg.hpp"

namespace sklu {

const char* score_method_name(ScoreMethod m) {
  switch (m) {
    case ScoreMethod::Slu: return "slu";
    case ScoreMethod::LeExact: return "le_exact";
    case ScoreMethod::Lla: return "lla";
    case ScoreMethod::DiagLaplace: return "diag_laplace";
  }
  return "?";
}

ScoreMethod score_method_from_name(const std::string& name) {
  if (name == "slu") return ScoreMethod::Slu;
  if (name == "le_exact") return ScoreMethod::LeExact;
  if (name == "lla") return ScoreMethod::Lla;
  if (name == "diag_laplace") return ScoreMethod::DiagLaplace;
  throw InvalidDimensions("unknown score method: " + name);
}

Matrix jacobian_rows(const MlpModel& m, ConstVectorRef x) {
  const Index t = m.output_dim();
  Matrix j(t, m.param_count());
  Vector unit = Vector::Zero(t);
  for (Index r = 0; r < t; ++r) {
    unit[r] = 1.0;
    j.row(r) = vjp(m, x, unit).transpose();
    unit[r] = 0.0;
  }
  return j;
}

double slu_score(const MlpModel& m, const SketchedBasis& basis, ConstVectorRef x) {
  const Index t = m.output_dim();
  double j_norm_sq = 0.0;
  Matrix sj(basis.sketch.rows(), t);  // S J^T, one column per output
  Vector unit = Vector::Zero(t);
  for (Index r = 0; r < t; ++r) {
    unit[r] = 1.0;
    const Vector row = vjp(m, x, unit);
    unit[r] = 0.0;
    j_norm_sq += squared_norm(row);
    sketch_apply_into(basis.sketch, row, sj.col(r));
  }
  double projected = 0.0;
  if (basis.k > 0) projected = frobenius_norm_sq(basis.u_s.transpose() * sj);
  return std::max(0.0, j_norm_sq - projected);  // sketch noise can dip below zero
}

double exact_score(const MlpModel& m, const Matrix& basis, ConstVectorRef x) {
  if (basis.rows() != m.param_count() && basis.size() > 0)
    throw DimensionMismatch("exact_score: basis rows != p");
  const Index t = m.output_dim();
  double j_norm_sq = 0.0;
  double projected = 0.0;
  Vector unit = Vector::Zero(t);
  for (Index r = 0; r < t; ++r) {
    unit[r] = 1.0;
    const Vector row = vjp(m, x, unit);
    unit[r] = 0.0;
    j_norm_sq += squared_norm(row);
    if (basis.cols() > 0) projected += (basis.transpose() * row).squaredNorm();
  }
  return j_norm_sq - projected;
}

double lla_score(const MlpModel& m, const Matrix& basis, ConstVectorRef eigenvalues, double alpha,
                 ConstVectorRef x) {
  if (alpha <= 0.0) throw InvalidAlpha("lla_score: alpha must be positive");
  if (basis.cols() != eigenvalues.size())
    throw DimensionMismatch("lla_score: eigenvalue count != basis width");
  const Index t = m.output_dim();
  double j_norm_sq = 0.0;
  Vector proj_sq = Vector::Zero(basis.cols());
  Vector unit = Vector::Zero(t);
  for (Index r = 0; r < t; ++r) {
    unit[r] = 1.0;
    const Vector row = vjp(m, x, unit);
    unit[r] = 0.0;
    j_norm_sq += squared_norm(row);
    if (basis.cols() > 0) proj_sq += (basis.transpose() * row).array().square().matrix();
  }
  double score = j_norm_sq / alpha;
  for (Index i = 0; i < basis.cols(); ++i) {
    const double li = eigenvalues[i];
    score -= li / (alpha * (li + alpha)) * proj_sq[i];
  }
  return score;
}

double diag_laplace_score_with_diag(const MlpModel& m, ConstVectorRef ggn_diag, double alpha,
                                    ConstVectorRef x) {
  if (alpha <= 0.0) throw InvalidAlpha("diag_laplace_score: alpha must be positive");
  if (ggn_diag.size() != m.param_count())
    throw DimensionMismatch("diag_laplace_score: diagonal length != p");
  const Index t = m.output_dim();
  Vector col_norm_sq = Vector::Zero(m.param_count());
  Vector unit = Vector::Zero(t);
  for (Index r = 0; r < t; ++r) {
    unit[r] = 1.0;
    const Vector row = vjp(m, x, unit);
    unit[r] = 0.0;
    col_norm_sq.array() += row.array().square();
  }
  return (col_norm_sq.array() / (ggn_diag.array() + alpha)).sum();
}

double diag_laplace_score(const MlpModel& m, const Matrix& inputs, LossKind loss, double alpha,
                          ConstVectorRef x) {
  if (alpha <= 0.0) throw InvalidAlpha("diag_laplace_score: alpha must be positive");
  const Vector diag = ggn_diagonal(m, inputs, loss);
  return diag_laplace_score_with_diag(m, diag, alpha, x);
}

ScorePipeline ScorePipeline::slu(const MlpModel& m, const SketchedBasis& basis) {
  if (basis.sketch.p != m.param_count())
    throw DimensionMismatch("ScorePipeline::slu: sketch dimension != model parameter count");
  ScorePipeline p(m, ScoreMethod::Slu);
  p.sketched_ = &basis;
  return p;
}

ScorePipeline ScorePipeline::le_exact(const MlpModel& m, Matrix basis) {
  if (basis.size() > 0 && basis.rows() != m.param_count())
    throw DimensionMismatch("ScorePipeline::le_exact: basis rows != p");
  ScorePipeline p(m, ScoreMethod::LeExact);
  p.dense_basis_ = std::move(basis);
  return p;
}

ScorePipeline ScorePipeline::lla(const MlpModel& m, Matrix basis, Vector eigenvalues,
                                 double alpha) {
  if (alpha <= 0.0) throw InvalidAlpha("ScorePipeline::lla: alpha must be positive");
  if (basis.cols() != eigenvalues.size())
    throw DimensionMismatch("ScorePipeline::lla: eigenvalue count != basis width");
  ScorePipeline p(m, ScoreMethod::Lla);
  p.dense_basis_ = std::move(basis);
  p.eigenvalues_ = std::move(eigenvalues);
  p.alpha_ = alpha;
  return p;
}

ScorePipeline ScorePipeline::diag_laplace(const MlpModel& m, Vector ggn_diag, double alpha) {
  if (alpha <= 0.0) throw InvalidAlpha("ScorePipeline::diag_laplace: alpha must be positive");
  ScorePipeline p(m, ScoreMethod::DiagLaplace);
  p.ggn_diag_ = std::move(ggn_diag);
  p.alpha_ = alpha;
  return p;
}

double ScorePipeline::score(ConstVectorRef x) const {
  switch (method_) {
    case ScoreMethod::Slu: return slu_score(*model_, *sketched_, x);
    case ScoreMethod::LeExact: return exact_score(*model_, dense_basis_, x);
    case ScoreMethod::Lla: return lla_score(*model_, dense_basis_, eigenvalues_, alpha_, x);
    case ScoreMethod::DiagLaplace:
      return diag_laplace_score_with_diag(*model_, ggn_diag_, alpha_, x);
  }
  return 0.0;
}

}  // namespace sklu
