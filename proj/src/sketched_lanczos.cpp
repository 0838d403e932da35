#include "sklu/sketched_lanczos.hpp"

#include <string>
#include <utility>

#include "sklu/memtrack.hpp"
#include "sklu/prng.hpp"

namespace sklu {

SketchedBasis sketched_lanczos(const LinearOperator& op, Index k, const SketchOperator& sketch,
                               std::uint64_t seed, bool retain_eigenvalues) {
  if (k < 1) throw InvalidDimensions("sketched_lanczos: k must be >= 1");
  if (sketch.p != op.dim())
    throw DimensionMismatch("sketched_lanczos: sketch ambient dimension != operator dimension");

  const Index rows = sketch.rows();
  memtrack::Block store_mem(rows * k);
  Matrix v_s(rows, k);
  Index col = 0;
  const auto emit = [&](ConstVectorRef v) {
    sketch_apply_into(sketch, v, v_s.col(col));
    ++col;
  };

  LanczosResult lres = lanczos_low_memory(op, k, seed, emit);
  if (lres.k_effective < k) {
    // Breakdown: keep the reduced width, zero columns would poison the QR.
    Matrix shrunk = v_s.leftCols(lres.k_effective);
    v_s = std::move(shrunk);
    store_mem.resize(rows * lres.k_effective);
  }

  SketchedBasis basis;
  basis.sketch = sketch;
  basis.k = lres.k_effective;
  basis.lanczos_seed = seed;
  if (retain_eigenvalues) basis.eigenvalues = tridiag_eigenvalues(lres.t);

  try {
    qr_orthonormalize_inplace(v_s);
  } catch (const RankDeficient& e) {
    throw RankDeficient(e.column, std::string("sketched_lanczos: sketched columns collapsed (") +
                                      e.what() + ")");
  }
  basis.u_s = std::move(v_s);
  store_mem.release();  // ownership moved out
  return basis;
}

namespace {

class DeflatedOperator final : public LinearOperator {
 public:
  DeflatedOperator(const LinearOperator& op, const Matrix& u0, const Vector& lambda0)
      : op_(op), u0_(u0), lambda0_(lambda0) {}
  Index dim() const override { return op_.dim(); }
  void apply(ConstVectorRef x, VectorRef y) const override {
    op_.apply(x, y);
    y.noalias() -= u0_ * lambda0_.cwiseProduct(u0_.transpose() * x);
  }

 private:
  const LinearOperator& op_;
  const Matrix& u0_;
  const Vector& lambda0_;
};

}  // namespace

SketchedBasis preconditioned_sketched_lanczos(const LinearOperator& op, Index k0, Index k1,
                                              const SketchOperator& sketch, std::uint64_t seed,
                                              bool retain_eigenvalues) {
  if (k0 < 1 || k1 < 1)
    throw InvalidDimensions("preconditioned_sketched_lanczos: k0 and k1 must be >= 1");
  if (sketch.p != op.dim())
    throw DimensionMismatch("preconditioned_sketched_lanczos: sketch/operator dimension mismatch");

  LanczosResult hi = lanczos_hi_memory(op, k0, seed);
  Spectrum top = extract_eigenpairs(hi, 1.0);
  Preconditioner pre{std::move(top.eigenvectors), std::move(top.eigenvalues)};

  DeflatedOperator deflated(op, pre.u0, pre.lambda0);
  const std::uint64_t phase2_seed = SplitMix64::mix(seed ^ 0x736b6c2d70686153ULL);
  SketchedBasis tail = sketched_lanczos(deflated, k1, sketch, phase2_seed, retain_eigenvalues);

  Matrix concat(sketch.rows(), pre.u0.cols() + tail.k);
  concat.leftCols(pre.u0.cols()) = sketch_apply_columns(sketch, pre.u0);
  concat.rightCols(tail.k) = tail.u_s;

  SketchedBasis basis;
  basis.sketch = sketch;
  basis.lanczos_seed = seed;
  basis.k = concat.cols();
  // Sketching perturbs the orthogonality of [S u0 | U_S']; record the defect
  // and restore the invariant with one more QR.
  basis.concat_defect =
      (concat.transpose() * concat - Matrix::Identity(basis.k, basis.k)).cwiseAbs().maxCoeff();
  try {
    qr_orthonormalize_inplace(concat);
  } catch (const RankDeficient& e) {
    throw RankDeficient(e.column,
                        std::string("preconditioned_sketched_lanczos: concatenated basis "
                                    "collapsed (") +
                            e.what() + ")");
  }
  basis.u_s = std::move(concat);
  if (retain_eigenvalues && tail.eigenvalues) {
    Vector all(pre.lambda0.size() + tail.eigenvalues->size());
    all << pre.lambda0, *tail.eigenvalues;
    std::sort(all.data(), all.data() + all.size(), std::greater<double>());
    basis.eigenvalues = std::move(all);
  }
  basis.preconditioner = std::move(pre);
  return basis;
}

double sketched_projection_norm(const SketchedBasis& basis, ConstVectorRef v) {
  const Vector sv = sketch_apply(basis.sketch, v);
  return (basis.u_s.transpose() * sv).norm();
}

}  // namespace sklu
