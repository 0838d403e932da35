#pragma once

#include <Eigen/Dense>

namespace sklu {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;   // column-major f64, the storage used everywhere
using Vector = Eigen::VectorXd;

using MatrixRef = Eigen::Ref<Matrix>;
using VectorRef = Eigen::Ref<Vector>;
using ConstMatrixRef = Eigen::Ref<const Matrix>;
using ConstVectorRef = Eigen::Ref<const Vector>;

}  // namespace sklu
