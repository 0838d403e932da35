#pragma once

#include <cstdint>
#include <optional>

#include "sklu/lanczos.hpp"
#include "sklu/sketch.hpp"

namespace sklu {

/// Exact top eigenpairs subtracted from the operator during the
/// preconditioned variant. Costs k0 * p floats to keep.
struct Preconditioner {
  Matrix u0;       // p x k0, column-orthonormal
  Vector lambda0;  // k0, descending
};

/// Column-orthonormal basis of the sketched Krylov vectors, the stand-in for
/// the top-k eigenbasis in all sketched score computations.
struct SketchedBasis {
  Matrix u_s;  // sketch.rows() x k, column-orthonormal
  SketchOperator sketch;
  Index k = 0;
  std::optional<Vector> eigenvalues;  // Ritz values, retained on request
  std::optional<Preconditioner> preconditioner;
  std::uint64_t lanczos_seed = 0;
  /// Orthogonality defect of the concatenated basis before the final QR,
  /// recorded by the preconditioned variant for diagnostics.
  double concat_defect = 0.0;
};

/// Streaming Lanczos with sketch-on-the-fly: each accepted Krylov vector is
/// sketched into an s x k store and the store is orthonormalized post-hoc.
/// Peak working set stays at 3 length-p vectors plus the store (plus one
/// padded transform scratch). Deterministic given (seed, sketch).
///
/// Breakdown shrinks the basis to k_effective columns; a rank-deficient
/// sketched store re-raises RankDeficient with context.
SketchedBasis sketched_lanczos(const LinearOperator& op, Index k, const SketchOperator& sketch,
                               std::uint64_t seed, bool retain_eigenvalues = true);

/// Two-phase variant: k0 hi-memory iterations give exact top pairs (U0, L0),
/// then sketched Lanczos runs k1 iterations on the deflated operator
/// v -> G v - U0 L0 (U0^T v). The returned basis is the re-orthonormalized
/// concatenation [S U0 | U_S'] with the preconditioner retained.
SketchedBasis preconditioned_sketched_lanczos(const LinearOperator& op, Index k0, Index k1,
                                              const SketchOperator& sketch, std::uint64_t seed,
                                              bool retain_eigenvalues = true);

/// ||U_S^T (S v)||_2, the sketched stand-in for ||U^T v||_2.
double sketched_projection_norm(const SketchedBasis& basis, ConstVectorRef v);

}  // namespace sklu
