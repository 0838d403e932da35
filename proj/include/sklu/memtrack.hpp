#pragma once

#include <cstdint>

namespace sklu::memtrack {

// Bookkeeping for the f64 working-set of the big algorithms. Long-lived
// buffers register themselves through Block; tests read the high-water mark.
// Counts are in units of 64-bit floats, not bytes.

void reset();
std::int64_t current_floats();
std::int64_t peak_floats();

/// RAII registration of an f64 buffer of a given element count.
class Block {
 public:
  Block() = default;
  explicit Block(std::int64_t nfloats);
  Block(const Block&) = delete;
  Block& operator=(const Block&) = delete;
  Block(Block&& other) noexcept;
  Block& operator=(Block&& other) noexcept;
  ~Block();

  void resize(std::int64_t nfloats);
  void release();

 private:
  std::int64_t size_ = 0;
};

}  // namespace sklu::memtrack
