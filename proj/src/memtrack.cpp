#include "sklu/memtrack.hpp"

#include <atomic>

namespace sklu::memtrack {

namespace {
std::atomic<std::int64_t> g_current{0};
std::atomic<std::int64_t> g_peak{0};

void add(std::int64_t n) {
  const std::int64_t now = g_current.fetch_add(n) + n;
  std::int64_t prev = g_peak.load();
  while (now > prev && !g_peak.compare_exchange_weak(prev, now)) {
  }
}

void sub(std::int64_t n) { g_current.fetch_sub(n); }
}  // namespace

void reset() {
  g_current.store(0);
  g_peak.store(0);
}

std::int64_t current_floats() { return g_current.load(); }
std::int64_t peak_floats() { return g_peak.load(); }

Block::Block(std::int64_t nfloats) : size_(nfloats) { add(size_); }

Block::Block(Block&& other) noexcept : size_(other.size_) { other.size_ = 0; }

Block& Block::operator=(Block&& other) noexcept {
  if (this != &other) {
    release();
    size_ = other.size_;
    other.size_ = 0;
  }
  return *this;
}

Block::~Block() { release(); }

void Block::resize(std::int64_t nfloats) {
  release();
  size_ = nfloats;
  add(size_);
}

void Block::release() {
  if (size_ != 0) {
    sub(size_);
    size_ = 0;
  }
}

}  // namespace sklu::memtrack
