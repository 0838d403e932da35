#pragma once

#include <cstdint>
#include <vector>

#include "sklu/errors.hpp"
#include "sklu/types.hpp"

namespace sklu {

/// Which orthogonal transform sits between the sign diagonal and the
/// subsampling. Wht keeps all arithmetic real and is the default; Dft emits
/// s complex coefficients stored as 2s interleaved reals.
enum class SketchTransform { Wht, Dft };

const char* transform_id(SketchTransform t);
SketchTransform transform_from_id(const std::string& id);

/// Seeded randomized subspace embedding R^p -> R^s, applied matrix-free as
/// scale * P * H * D * pad(v): zero-pad to the next power of two, flip signs
/// with a Rademacher diagonal D, run an orthonormal fast transform H, keep s
/// coordinates P, and rescale so that E ||Sv||^2 = ||v||^2.
///
/// Fully determined by (p, s, seed, transform); signs and indices are drawn
/// from the counter-based generator named in prng.hpp and are regenerated
/// rather than persisted.
struct SketchOperator {
  Index p = 0;      // ambient dimension
  Index p_pad = 0;  // next power of two >= p
  Index s = 0;      // number of sampled coordinates
  std::uint64_t seed = 0;
  SketchTransform transform = SketchTransform::Wht;
  std::vector<std::int8_t> signs;           // length p_pad, entries +-1
  std::vector<std::int32_t> sample_indices; // length s, strictly increasing
  double scale = 0.0;                       // sqrt(p_pad / s)

  /// Length of a sketched vector: s for Wht, 2s for Dft (re/im pairs).
  Index rows() const { return transform == SketchTransform::Dft ? 2 * s : s; }
};

/// Throws InvalidDimensions unless 1 <= s <= next_pow2(p).
SketchOperator sketch_new(Index p, Index s, std::uint64_t seed,
                          SketchTransform transform = SketchTransform::Wht);

Vector sketch_apply(const SketchOperator& sk, ConstVectorRef v);

/// Same, writing into a caller-provided buffer of length sk.rows().
void sketch_apply_into(const SketchOperator& sk, ConstVectorRef v, VectorRef out);

/// Column j of the result is sketch_apply of column j of a.
Matrix sketch_apply_columns(const SketchOperator& sk, const Matrix& a);

/// In-place orthonormal Walsh-Hadamard transform; x.size() must be a power
/// of two. Preserves the l2 norm.
void fwht_orthonormal(VectorRef x);

Index next_pow2(Index n);

}  // namespace sklu
