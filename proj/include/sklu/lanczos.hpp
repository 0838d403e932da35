#pragma once

#include <cstdint>
#include <functional>

#include "sklu/linalg.hpp"
#include "sklu/operators.hpp"

namespace sklu {

/// Off-diagonal coefficients at or below this fraction of ||G v|| stop the
/// recurrence: the Krylov space is exhausted and k_effective is reported
/// instead of raising an error.
inline constexpr double kLanczosBreakdownTol = 1e-12;

/// Outcome of a Lanczos run. basis is p x k_effective for the hi-memory
/// variant and empty for the streaming one.
struct LanczosResult {
  TridiagonalMatrix t;
  Matrix basis;
  Index k_effective = 0;
  std::uint64_t seed = 0;
};

using LanczosEmitFn = std::function<void(ConstVectorRef)>;

/// Three-term recurrence holding exactly three length-p vectors. Each
/// accepted basis vector is handed to `emit` in order; the i-th call carries
/// the vector whose coefficients occupy row/column i of T. The start vector
/// is uniform on the unit sphere, drawn from `seed`.
LanczosResult lanczos_low_memory(const LinearOperator& op, Index k, std::uint64_t seed,
                                 const LanczosEmitFn& emit = {});

/// Full-reorthogonalization variant: stores the whole basis and applies a
/// double Gram-Schmidt correction against all columns outside the three-term
/// window, keeping ||V^T V - I||_max at roundoff level.
LanczosResult lanczos_hi_memory(const LinearOperator& op, Index k, std::uint64_t seed);

/// Diagonalizes T and returns the top ceil(top_fraction * k_effective) Ritz
/// pairs, descending. Ritz vectors are reconstructed as basis * W when the
/// basis is available, otherwise only values are returned.
Spectrum extract_eigenpairs(const LanczosResult& res, double top_fraction);

/// Entry (i, j) is the inner product of column i of a with column j of b.
Matrix basis_overlap_heatmap(const Matrix& a, const Matrix& b);

}  // namespace sklu
