#pragma once

#include <cstdint>

#include "sklu/errors.hpp"
#include "sklu/operators.hpp"
#include "sklu/types.hpp"

namespace sklu {

/// Relative threshold below which a QR column counts as rank-deficient.
inline constexpr double kRankDeficiencyTol = 1e-12;

/// Symmetric tridiagonal matrix, single off-diagonal stored.
struct TridiagonalMatrix {
  Vector diag;     // length k
  Vector offdiag;  // length k-1

  Index size() const { return diag.size(); }
  Matrix dense() const;
};

/// Eigenvalues sorted descending, eigenvector columns aligned with them.
struct Spectrum {
  Vector eigenvalues;
  Matrix eigenvectors;  // may be 0x0 when only values were requested
};

struct QrResult {
  Matrix q;
  Matrix r;
};

/// Modified Gram-Schmidt with a second full pass (MGS2). Q is
/// column-orthonormal, R upper-triangular with non-negative diagonal and
/// Q R = A. Throws RankDeficient when a column's residual drops below
/// kRankDeficiencyTol times its input norm.
QrResult qr_orthonormalize(const Matrix& a);

/// Same factorization, overwriting `a` with Q and returning R. Used where the
/// extra copy matters.
Matrix qr_orthonormalize_inplace(Matrix& a);

/// Full eigen-decomposition of a symmetric tridiagonal matrix by implicit
/// QL/QR steps with Wilkinson shifts, eigenvectors accumulated. Throws
/// ConvergenceFailure past 100000 iterations for a single eigenvalue.
Spectrum tridiag_eig(const TridiagonalMatrix& t);

/// Eigenvalues only (descending), same algorithm without accumulation.
Vector tridiag_eigenvalues(const TridiagonalMatrix& t);

/// Power-method estimate of the largest singular value of a symmetric
/// operator (max |eigenvalue|). Deterministic given the seed; returns the
/// estimate after exactly `iters` applications.
double operator_norm(const LinearOperator& op, Index iters, std::uint64_t seed);

/// Pairwise (cascade) summation; error grows with log(n) instead of n.
double pairwise_sum(const double* data, Index n);

/// Sum of squared entries via pairwise summation.
double frobenius_norm_sq(const Matrix& a);
double squared_norm(const Vector& v);

}  // namespace sklu
