#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sklu/linalg.hpp"
#include "sklu/operators.hpp"
#include "sklu/types.hpp"

namespace sklu {

/// Inputs are stored one sample per column. Classification targets are class
/// indices; regression targets are one column per sample.
struct Dataset {
  Matrix inputs;  // d x n
  std::optional<std::vector<int>> labels;
  std::optional<Matrix> targets;  // t x n
  std::string name;
  std::uint64_t seed = 0;

  Index dim() const { return inputs.rows(); }
  Index size() const { return inputs.cols(); }
};

/// Ground-truth low-rank PSD operator M = V diag(lambda) V^T with explicit
/// access to both the matrix-vector product and the exact projector norm
/// x -> ||V^T x||, so sketching error and truncation error can be separated.
struct SyntheticFisher {
  Index p = 0;
  Index rank = 0;
  Matrix v;        // p x rank, column-orthonormal
  Vector lambdas;  // rank, positive descending

  void apply(ConstVectorRef x, VectorRef y) const;
  double projector_norm(ConstVectorRef x) const { return (v.transpose() * x).norm(); }
  std::unique_ptr<LinearOperator> as_operator() const;
};

/// lambdas_i = decay^i, V from a QR'd Gaussian draw.
SyntheticFisher synthetic_fisher(Index p, Index rank, double decay, std::uint64_t seed);

/// Unit vectors whose projection onto span(V) has norm exactly 1/sqrt(2),
/// with both the in-span and out-of-span directions uniform.
std::vector<Vector> synthetic_test_jacobians(const SyntheticFisher& sf, Index m,
                                             std::uint64_t seed);

struct TwoGaussianTask {
  Dataset id_train;
  Dataset id_test;
  Dataset ood_test;
};

/// Two well-separated Gaussian class blobs along axis 0 as the ID task, and
/// an OoD blob displaced from the class-0 mean by `shift` along the last
/// axis, which the ID means never use. shift = 0 makes the OoD blob coincide
/// with class 0.
TwoGaussianTask two_gaussian_task(Index d, Index n, double shift, std::uint64_t seed);

/// Reads the IDX binary format (big-endian magic and dims, raw byte payload).
/// Pixels are scaled into [0, 1]. When labels_path is given, label count must
/// match the image count.
Dataset load_idx(const std::string& images_path,
                 const std::optional<std::string>& labels_path = std::nullopt);

/// Writes a dataset back out as IDX (bytes are rounded from [0,1] floats).
void save_idx(const Dataset& ds, Index side, const std::string& images_path,
              const std::optional<std::string>& labels_path = std::nullopt);

/// Rotates square images counter-clockwise about their center with bilinear
/// interpolation and zero fill. 0 degrees returns the input bit-exactly.
Dataset rotate_images(const Dataset& ds, double degrees, Index side);

/// Seeded subsample of m columns without replacement, order preserved.
Dataset subsample(const Dataset& ds, Index m, std::uint64_t seed);

/// Dataset manifest: enough structured text to rebuild or locate a dataset.
struct DatasetManifest {
  std::string name;
  std::string kind;  // "two-gaussian" | "idx" | "synthetic-fisher"
  std::string images_path;
  std::string labels_path;
  std::uint64_t seed = 0;
  Index d = 0;
  Index n = 0;
  double shift = 0.0;
  double rotate_degrees = 0.0;

  std::string to_json() const;
  static DatasetManifest from_json(const std::string& text);
};

}  // namespace sklu
