#include <doctest.h>

#include "sklu/linalg.hpp"
#include "sklu/prng.hpp"
#include "test_oracles.hpp"

using namespace sklu;

namespace {

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.next_gaussian();
  return m;
}

}  // namespace

TEST_CASE("qr_orthonormalize on the identity") {
  const Matrix a = Matrix::Identity(3, 3);
  const QrResult qr = qr_orthonormalize(a);
  CHECK((qr.q - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((qr.r - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("qr_orthonormalize on scaled orthogonal columns") {
  Matrix a(3, 2);
  a << 2, 0, 0, 0, 0, 3;
  const QrResult qr = qr_orthonormalize(a);
  Matrix expected_q(3, 2);
  expected_q << 1, 0, 0, 0, 0, 1;
  CHECK((qr.q - expected_q).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(qr.r(0, 0) == doctest::Approx(2.0));
  CHECK(qr.r(1, 1) == doctest::Approx(3.0));
  CHECK(qr.r(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("qr_orthonormalize reconstruction and orthogonality on random input") {
  const Matrix a = random_matrix(50, 10, 42);
  const QrResult qr = qr_orthonormalize(a);
  CHECK((qr.q.transpose() * qr.q - Matrix::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((qr.q * qr.r - a).norm() / a.norm() < 1e-9);
  for (Index j = 0; j < 10; ++j) CHECK(qr.r(j, j) >= 0.0);
  // span preservation
  CHECK((qr.q * (qr.q.transpose() * a) - a).norm() <= 1e-8 * a.norm());
}

TEST_CASE("qr_orthonormalize flags rank deficiency") {
  Matrix a = random_matrix(20, 4, 7);
  a.col(2) = 2.0 * a.col(0) - a.col(1);
  CHECK_THROWS_AS(qr_orthonormalize(a), RankDeficient);
  try {
    qr_orthonormalize(a);
  } catch (const RankDeficient& e) {
    CHECK(e.column == 2);
  }
}

TEST_CASE("tridiag_eig 1x1") {
  TridiagonalMatrix t;
  t.diag = Vector::Constant(1, 5.0);
  t.offdiag = Vector(0);
  const Spectrum s = tridiag_eig(t);
  CHECK(s.eigenvalues[0] == doctest::Approx(5.0));
  CHECK(std::abs(s.eigenvectors(0, 0)) == doctest::Approx(1.0));
}

TEST_CASE("tridiag_eig 2x2 closed form") {
  TridiagonalMatrix t;
  t.diag = Vector::Constant(2, 2.0);
  t.offdiag = Vector::Constant(1, 1.0);
  const Spectrum s = tridiag_eig(t);
  CHECK(s.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(s.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-12));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (Index j = 0; j < 2; ++j) {
    CHECK(std::abs(std::abs(s.eigenvectors(0, j)) - inv_sqrt2) < 1e-12);
    CHECK(std::abs(std::abs(s.eigenvectors(1, j)) - inv_sqrt2) < 1e-12);
  }
}

TEST_CASE("tridiag_eig matches a dense Jacobi oracle on random 30x30") {
  SplitMix64 rng(11);
  TridiagonalMatrix t;
  t.diag = gaussian_vector(30, rng);
  t.offdiag = gaussian_vector(29, rng);
  const Spectrum s = tridiag_eig(t);
  const Vector oracle = oracles::jacobi_eigenvalues(t.dense());
  CHECK((s.eigenvalues - oracle).cwiseAbs().maxCoeff() < 1e-9);

  // per-pair residual and unit-norm vectors
  const Matrix dense = t.dense();
  for (Index j = 0; j < 30; ++j) {
    const Vector w = s.eigenvectors.col(j);
    CHECK(std::abs(w.norm() - 1.0) < 1e-10);
    const double resid = (dense * w - s.eigenvalues[j] * w).norm();
    CHECK(resid <= 1e-10 * std::max(1.0, std::abs(s.eigenvalues[j])));
  }
}

TEST_CASE("tridiag_eig preserves the trace") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SplitMix64 rng(seed);
    const Index k = 3 + Index(rng.next_below(40));
    TridiagonalMatrix t;
    t.diag = gaussian_vector(k, rng) * 10.0;
    t.offdiag = gaussian_vector(k - 1, rng);
    const Vector evals = tridiag_eigenvalues(t);
    CHECK(std::abs(evals.sum() - t.diag.sum()) <=
          1e-9 * double(k) * t.diag.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("operator_norm on a scaled identity") {
  const Vector d = Vector::Constant(10, 3.0);
  CHECK(operator_norm(DiagonalOperator(d), 50, 1) == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("operator_norm on a diagonal spectrum") {
  Vector d(10);
  for (Index i = 0; i < 10; ++i) d[i] = double(i + 1);
  CHECK(std::abs(operator_norm(DiagonalOperator(d), 200, 3) - 10.0) < 1e-6);
}

TEST_CASE("operator_norm of a projector difference matches a dense SVD oracle") {
  Matrix qa = random_matrix(100, 5, 21);
  Matrix qb = random_matrix(100, 5, 22);
  qr_orthonormalize_inplace(qa);
  qr_orthonormalize_inplace(qb);
  const Matrix diff = qa * qa.transpose() - qb * qb.transpose();
  const double oracle = Eigen::JacobiSVD<Matrix>(diff).singularValues()(0);
  const double mine = operator_norm(MatrixOperator(diff), 20000, 5);
  CHECK(std::abs(mine - oracle) < 1e-6);
}

TEST_CASE("operator_norm estimates are monotone in iteration count for PSD operators") {
  const Matrix b = random_matrix(40, 40, 31);
  const Matrix psd = b.transpose() * b;
  const MatrixOperator op(psd);
  const double e10 = operator_norm(op, 10, 9);
  const double e50 = operator_norm(op, 50, 9);
  const double e200 = operator_norm(op, 200, 9);
  CHECK(e10 <= e50 + 1e-12);
  CHECK(e50 <= e200 + 1e-12);
}

TEST_CASE("frobenius_norm_sq basics") {
  CHECK(frobenius_norm_sq(Matrix::Zero(4, 7)) == 0.0);
  CHECK(frobenius_norm_sq(Matrix::Identity(4, 4)) == 4.0);
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  CHECK(frobenius_norm_sq(a) == 30.0);
}

TEST_CASE("pairwise summation stays accurate on large inputs") {
  const Index n = 200000;
  const Matrix a = Matrix::Constant(n, 1, 0.1);
  CHECK(frobenius_norm_sq(a) == doctest::Approx(0.01 * double(n)).epsilon(1e-13));
}
