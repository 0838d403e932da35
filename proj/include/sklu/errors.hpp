#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sklu {

/// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Inconsistent vector/matrix shapes at an operation boundary.
struct DimensionMismatch : Error {
  using Error::Error;
};

/// Construction parameters outside the valid range (e.g. sketch size).
struct InvalidDimensions : Error {
  using Error::Error;
};

/// QR met a column whose residual collapsed below the rank threshold.
struct RankDeficient : Error {
  std::ptrdiff_t column;
  RankDeficient(std::ptrdiff_t col, const std::string& msg) : Error(msg), column(col) {}
};

/// An iterative eigensolver ran out of its iteration budget.
struct ConvergenceFailure : Error {
  using Error::Error;
};

struct InvalidAlpha : Error {
  using Error::Error;
};

struct EmptyInput : Error {
  using Error::Error;
};

/// Training loss became NaN or infinite.
struct NonFiniteLoss : Error {
  using Error::Error;
};

/// Binary file parsing errors.
struct BadMagic : Error {
  using Error::Error;
};
struct TruncatedFile : Error {
  using Error::Error;
};

}  // namespace sklu
