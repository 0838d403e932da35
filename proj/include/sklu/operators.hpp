#pragma once

#include <functional>
#include <utility>

#include "sklu/errors.hpp"
#include "sklu/types.hpp"

namespace sklu {

/// Matrix-free symmetric operator. Every algorithm in this library touches a
/// matrix G only through y = G x; symmetry is the caller's promise and is
/// checked probabilistically where it matters.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual Index dim() const = 0;

  /// y = G x. Must be deterministic for a fixed operator instance.
  virtual void apply(ConstVectorRef x, VectorRef y) const = 0;

  Vector operator()(ConstVectorRef x) const {
    if (x.size() != dim()) throw DimensionMismatch("operator input has wrong length");
    Vector y(dim());
    apply(x, y);
    return y;
  }
};

/// View of an explicit dense symmetric matrix. Does not own the matrix.
class MatrixOperator final : public LinearOperator {
 public:
  explicit MatrixOperator(const Matrix& a) : a_(a) {}
  Index dim() const override { return a_.rows(); }
  void apply(ConstVectorRef x, VectorRef y) const override { y.noalias() = a_ * x; }

 private:
  const Matrix& a_;
};

class DiagonalOperator final : public LinearOperator {
 public:
  explicit DiagonalOperator(Vector d) : d_(std::move(d)) {}
  Index dim() const override { return d_.size(); }
  void apply(ConstVectorRef x, VectorRef y) const override { y = d_.cwiseProduct(x); }

 private:
  Vector d_;
};

/// Adapts a callable (x, y) -> void.
class FunctionOperator final : public LinearOperator {
 public:
  using Fn = std::function<void(ConstVectorRef, VectorRef)>;
  FunctionOperator(Index dim, Fn fn) : dim_(dim), fn_(std::move(fn)) {}
  Index dim() const override { return dim_; }
  void apply(ConstVectorRef x, VectorRef y) const override { fn_(x, y); }

 private:
  Index dim_;
  Fn fn_;
};

}  // namespace sklu
