#include "sklu/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sklu/memtrack.hpp"
#include "sklu/prng.hpp"

namespace sklu {

const char* transform_id(SketchTransform t) {
  return t == SketchTransform::Wht ? "fwht-ortho-v1" : "dft-ortho-v1";
}

SketchTransform transform_from_id(const std::string& id) {
  if (id == "fwht-ortho-v1") return SketchTransform::Wht;
  if (id == "dft-ortho-v1") return SketchTransform::Dft;
  throw InvalidDimensions("unknown sketch transform id: " + id);
}

Index next_pow2(Index n) {
  Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

SketchOperator sketch_new(Index p, Index s, std::uint64_t seed, SketchTransform transform) {
  if (p < 1) throw InvalidDimensions("sketch_new: p must be positive");
  const Index p_pad = next_pow2(p);
  if (s < 1 || s > p_pad)
    throw InvalidDimensions("sketch_new: need 1 <= s <= next_pow2(p), got s=" +
                            std::to_string(s) + ", next_pow2(p)=" + std::to_string(p_pad));

  SketchOperator sk;
  sk.p = p;
  sk.p_pad = p_pad;
  sk.s = s;
  sk.seed = seed;
  sk.transform = transform;
  sk.scale = std::sqrt(double(p_pad) / double(s));

  SplitMix64 rng(seed);
  sk.signs.resize(p_pad);
  for (Index i = 0; i < p_pad; ++i) sk.signs[i] = (rng.next_u64() & 1u) ? 1 : -1;

  // Partial Fisher-Yates: s distinct indices drawn uniformly without
  // replacement from [0, p_pad), stored sorted.
  std::vector<std::int32_t> perm(p_pad);
  std::iota(perm.begin(), perm.end(), 0);
  for (Index i = 0; i < s; ++i) {
    const Index j = i + Index(rng.next_below(std::uint64_t(p_pad - i)));
    std::swap(perm[i], perm[j]);
  }
  sk.sample_indices.assign(perm.begin(), perm.begin() + s);
  std::sort(sk.sample_indices.begin(), sk.sample_indices.end());
  return sk;
}

void fwht_orthonormal(VectorRef x) {
  const Index n = x.size();
  double* buf = x.data();
  for (Index h = 1; h < n; h <<= 1) {
    for (Index i = 0; i < n; i += h << 1) {
      for (Index j = i; j < i + h; ++j) {
        const double a = buf[j];
        const double b = buf[j + h];
        buf[j] = a + b;
        buf[j + h] = a - b;
      }
    }
  }
  x *= 1.0 / std::sqrt(double(n));
}

namespace {

// Iterative radix-2 FFT with per-stage trig twiddles (no recurrence drift).
void fft_inplace(Vector& re, Vector& im) {
  const Index n = re.size();
  for (Index i = 1, j = 0; i < n; ++i) {
    Index bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }
  for (Index len = 2; len <= n; len <<= 1) {
    const Index half = len >> 1;
    const double ang = -2.0 * M_PI / double(len);
    for (Index i = 0; i < n; i += len) {
      for (Index j = 0; j < half; ++j) {
        const double wr = std::cos(ang * double(j));
        const double wi = std::sin(ang * double(j));
        const double vr = re[i + j + half] * wr - im[i + j + half] * wi;
        const double vi = re[i + j + half] * wi + im[i + j + half] * wr;
        re[i + j + half] = re[i + j] - vr;
        im[i + j + half] = im[i + j] - vi;
        re[i + j] += vr;
        im[i + j] += vi;
      }
    }
  }
}

}  // namespace

void sketch_apply_into(const SketchOperator& sk, ConstVectorRef v, VectorRef out) {
  if (v.size() != sk.p) throw DimensionMismatch("sketch_apply: vector length != p");
  if (out.size() != sk.rows()) throw DimensionMismatch("sketch_apply: output length mismatch");

  if (sk.transform == SketchTransform::Wht) {
    memtrack::Block scratch_mem(sk.p_pad);
    Vector buf(sk.p_pad);
    for (Index i = 0; i < sk.p; ++i) buf[i] = double(sk.signs[i]) * v[i];
    buf.tail(sk.p_pad - sk.p).setZero();
    fwht_orthonormal(buf);
    for (Index j = 0; j < sk.s; ++j) out[j] = sk.scale * buf[sk.sample_indices[j]];
  } else {
    memtrack::Block scratch_mem(2 * sk.p_pad);
    Vector re(sk.p_pad), im(sk.p_pad);
    for (Index i = 0; i < sk.p; ++i) re[i] = double(sk.signs[i]) * v[i];
    re.tail(sk.p_pad - sk.p).setZero();
    im.setZero();
    fft_inplace(re, im);
    const double norm = sk.scale / std::sqrt(double(sk.p_pad));
    for (Index j = 0; j < sk.s; ++j) {
      out[2 * j] = norm * re[sk.sample_indices[j]];
      out[2 * j + 1] = norm * im[sk.sample_indices[j]];
    }
  }
}

Vector sketch_apply(const SketchOperator& sk, ConstVectorRef v) {
  Vector out(sk.rows());
  sketch_apply_into(sk, v, out);
  return out;
}

Matrix sketch_apply_columns(const SketchOperator& sk, const Matrix& a) {
  if (a.rows() != sk.p) throw DimensionMismatch("sketch_apply_columns: A.rows != p");
  Matrix out(sk.rows(), a.cols());
  for (Index j = 0; j < a.cols(); ++j) sketch_apply_into(sk, a.col(j), out.col(j));
  return out;
}

}  // namespace sklu
