#include "sklu/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <vector>

#include "sklu/memtrack.hpp"
#include "sklu/prng.hpp"

namespace sklu {

namespace {

void draw_start_vector(VectorRef v, std::uint64_t seed) {
  SplitMix64 rng(seed);
  for (Index i = 0; i < v.size(); ++i) v[i] = rng.next_gaussian();
  v /= v.norm();
}

TridiagonalMatrix assemble_t(const std::vector<double>& alphas, const std::vector<double>& betas) {
  TridiagonalMatrix t;
  t.diag = Eigen::Map<const Vector>(alphas.data(), Index(alphas.size()));
  t.offdiag.resize(Index(betas.size()));
  for (std::size_t i = 0; i < betas.size(); ++i) t.offdiag[Index(i)] = betas[i];
  return t;
}

}  // namespace

LanczosResult lanczos_low_memory(const LinearOperator& op, Index k, std::uint64_t seed,
                                 const LanczosEmitFn& emit) {
  if (k < 1) throw InvalidDimensions("lanczos_low_memory: k must be >= 1");
  const Index p = op.dim();

  memtrack::Block work_mem(3 * p);
  Vector v_prev = Vector::Zero(p);
  Vector v(p);
  Vector w(p);
  draw_start_vector(v, seed);

  std::vector<double> alphas, betas;
  alphas.reserve(std::size_t(k));
  betas.reserve(std::size_t(k));
  double beta_prev = 0.0;
  double scale = 0.0;  // largest ||G v|| seen, the breakdown reference

  for (Index i = 1; i <= k; ++i) {
    if (emit) emit(v);
    op.apply(v, w);
    scale = std::max(scale, w.norm());
    alphas.push_back(v.dot(w));
    if (i == k) break;
    w -= alphas.back() * v;
    if (i > 1) w -= beta_prev * v_prev;
    const double beta = w.norm();
    if (beta <= kLanczosBreakdownTol * scale) break;  // Krylov space exhausted
    betas.push_back(beta);
    v_prev.swap(v);
    v.swap(w);
    v *= 1.0 / beta;
    beta_prev = beta;
  }

  LanczosResult res;
  res.t = assemble_t(alphas, betas);
  res.k_effective = Index(alphas.size());
  res.seed = seed;
  return res;
}

LanczosResult lanczos_hi_memory(const LinearOperator& op, Index k, std::uint64_t seed) {
  if (k < 1) throw InvalidDimensions("lanczos_hi_memory: k must be >= 1");
  const Index p = op.dim();
  if (k > p) throw InvalidDimensions("lanczos_hi_memory: k must not exceed the dimension");

  memtrack::Block basis_mem(p * k);
  memtrack::Block work_mem(p);
  Matrix basis(p, k);
  Vector w(p);
  draw_start_vector(basis.col(0), seed);

  std::vector<double> alphas, betas;
  double beta_prev = 0.0;
  double scale = 0.0;

  for (Index i = 1; i <= k; ++i) {
    op.apply(basis.col(i - 1), w);
    scale = std::max(scale, w.norm());
    alphas.push_back(basis.col(i - 1).dot(w));
    if (i == k) break;
    w -= alphas.back() * basis.col(i - 1);
    if (i > 1) w -= beta_prev * basis.col(i - 2);
    // Double correction against everything beyond the three-term window; the
    // recurrence itself keeps the window locally orthogonal at roundoff.
    for (int pass = 0; pass < 2; ++pass)
      for (Index j = 0; j <= i - 3; ++j) w -= basis.col(j).dot(w) * basis.col(j);
    const double beta = w.norm();
    if (beta <= kLanczosBreakdownTol * scale) break;
    betas.push_back(beta);
    basis.col(i) = w * (1.0 / beta);  // same scaling op as the streaming variant
    beta_prev = beta;
  }

  LanczosResult res;
  res.t = assemble_t(alphas, betas);
  res.k_effective = Index(alphas.size());
  res.seed = seed;
  res.basis = basis.leftCols(res.k_effective);
  return res;
}

Spectrum extract_eigenpairs(const LanczosResult& res, double top_fraction) {
  if (!(top_fraction > 0.0 && top_fraction <= 1.0))
    throw InvalidDimensions("extract_eigenpairs: top_fraction must be in (0, 1]");
  const Index keep = Index(std::ceil(top_fraction * double(res.k_effective)));

  Spectrum full = tridiag_eig(res.t);
  const double lambda_max = full.eigenvalues.size() > 0 ? full.eigenvalues[0] : 0.0;
  if (full.eigenvalues.size() > 0 && full.eigenvalues.minCoeff() < -1e-8 * std::abs(lambda_max)) {
    std::cerr << "sklu: warning: Ritz value " << full.eigenvalues.minCoeff()
              << " is negative beyond roundoff for a PSD operator\n";
  }

  Spectrum out;
  out.eigenvalues = full.eigenvalues.head(keep);
  if (res.basis.size() > 0) out.eigenvectors = res.basis * full.eigenvectors.leftCols(keep);
  return out;
}

Matrix basis_overlap_heatmap(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionMismatch("basis_overlap_heatmap: row counts differ");
  return a.transpose() * b;
}

}  // namespace sklu
