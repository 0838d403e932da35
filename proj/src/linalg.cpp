#include "sklu/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "sklu/prng.hpp"

namespace sklu {

Matrix TridiagonalMatrix::dense() const {
  const Index n = size();
  Matrix t = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) t(i, i) = diag[i];
  for (Index i = 0; i + 1 < n; ++i) {
    t(i + 1, i) = offdiag[i];
    t(i, i + 1) = offdiag[i];
  }
  return t;
}

Matrix qr_orthonormalize_inplace(Matrix& a) {
  const Index n = a.cols();
  Matrix r = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    auto col = a.col(j);
    const double input_norm = col.norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (Index i = 0; i < j; ++i) {
        const double proj = a.col(i).dot(col);
        r(i, j) += proj;
        col -= proj * a.col(i);
      }
    }
    const double rjj = col.norm();
    if (rjj <= kRankDeficiencyTol * input_norm || rjj == 0.0) {
      throw RankDeficient(j, "qr_orthonormalize: column " + std::to_string(j) +
                                 " is numerically dependent on earlier columns");
    }
    r(j, j) = rjj;
    col /= rjj;
  }
  return r;
}

QrResult qr_orthonormalize(const Matrix& a) {
  QrResult res;
  res.q = a;
  res.r = qr_orthonormalize_inplace(res.q);
  return res;
}

namespace {

constexpr Index kTridiagIterCap = 100000;

// Implicit QL with Wilkinson shifts on (d, e); rotations optionally
// accumulated into z. d comes back holding unsorted eigenvalues.
void tridiag_ql(Vector& d, Vector& e, Matrix* z) {
  const Index n = d.size();
  if (n == 1) return;
  const double eps = std::numeric_limits<double>::epsilon();

  for (Index l = 0; l < n; ++l) {
    Index iter = 0;
    Index m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == kTridiagIterCap)
          throw ConvergenceFailure("tridiag_eig: QL iteration cap exceeded");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (Index i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          if (z != nullptr) {
            for (Index k = 0; k < n; ++k) {
              f = (*z)(k, i + 1);
              (*z)(k, i + 1) = s * (*z)(k, i) + c * f;
              (*z)(k, i) = c * (*z)(k, i) - s * f;
            }
          }
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

Spectrum sort_descending(Vector d, Matrix z) {
  const Index n = d.size();
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return d[a] > d[b]; });
  Spectrum spec;
  spec.eigenvalues.resize(n);
  if (z.size() > 0) spec.eigenvectors.resize(z.rows(), n);
  for (Index i = 0; i < n; ++i) {
    spec.eigenvalues[i] = d[order[i]];
    if (z.size() > 0) spec.eigenvectors.col(i) = z.col(order[i]);
  }
  return spec;
}

}  // namespace

Spectrum tridiag_eig(const TridiagonalMatrix& t) {
  const Index n = t.size();
  Vector d = t.diag;
  Vector e(n);
  e.head(n - 1 > 0 ? n - 1 : 0) = t.offdiag;
  e[n - 1] = 0.0;
  Matrix z = Matrix::Identity(n, n);
  tridiag_ql(d, e, &z);
  return sort_descending(std::move(d), std::move(z));
}

Vector tridiag_eigenvalues(const TridiagonalMatrix& t) {
  const Index n = t.size();
  Vector d = t.diag;
  Vector e(n);
  e.head(n - 1 > 0 ? n - 1 : 0) = t.offdiag;
  e[n - 1] = 0.0;
  tridiag_ql(d, e, nullptr);
  std::sort(d.data(), d.data() + n, std::greater<double>());
  return d;
}

double operator_norm(const LinearOperator& op, Index iters, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Vector x = unit_sphere_vector(op.dim(), rng);
  Vector y(op.dim());
  double estimate = 0.0;
  for (Index it = 0; it < iters; ++it) {
    op.apply(x, y);
    estimate = y.norm();
    if (estimate == 0.0) return 0.0;  // landed in the kernel
    x = y / estimate;
  }
  return estimate;
}

double pairwise_sum(const double* data, Index n) {
  if (n <= 64) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const Index half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

namespace {
double pairwise_sum_sq(const double* data, Index n) {
  if (n <= 64) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += data[i] * data[i];
    return s;
  }
  const Index half = n / 2;
  return pairwise_sum_sq(data, half) + pairwise_sum_sq(data + half, n - half);
}
}  // namespace

double frobenius_norm_sq(const Matrix& a) { return pairwise_sum_sq(a.data(), a.size()); }

double squared_norm(const Vector& v) { return pairwise_sum_sq(v.data(), v.size()); }

}  // namespace sklu
