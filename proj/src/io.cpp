#include "sklu/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "sklu/errors.hpp"
#include "sklu/prng.hpp"

namespace sklu {

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  write_u32(out, std::uint32_t(v));
  write_u32(out, std::uint32_t(v >> 32));
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw TruncatedFile("truncated header: " + path);
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
         (std::uint32_t(b[3]) << 24);
}

std::uint64_t read_u64(std::istream& in, const std::string& path) {
  const std::uint64_t lo = read_u32(in, path);
  const std::uint64_t hi = read_u32(in, path);
  return lo | (hi << 32);
}

void write_string(std::ostream& out, const std::string& s) {
  write_u32(out, std::uint32_t(s.size()));
  out.write(s.data(), std::streamsize(s.size()));
}

std::string read_string(std::istream& in, const std::string& path) {
  const std::uint32_t n = read_u32(in, path);
  std::string s(n, '\0');
  if (!in.read(s.data(), std::streamsize(n))) throw TruncatedFile("truncated string: " + path);
  return s;
}

void write_f64_block(std::ostream& out, const double* data, Index n) {
  for (Index i = 0; i < n; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &data[i], 8);
    write_u64(out, bits);
  }
}

void read_f64_block(std::istream& in, double* data, Index n, const std::string& path) {
  for (Index i = 0; i < n; ++i) {
    const std::uint64_t bits = read_u64(in, path);
    std::memcpy(&data[i], &bits, 8);
  }
}

void check_magic(std::istream& in, const char expected[4], const std::string& path) {
  char magic[4];
  if (!in.read(magic, 4)) throw TruncatedFile("missing magic: " + path);
  if (std::memcmp(magic, expected, 4) != 0)
    throw BadMagic("bad magic in " + path + " (expected " + std::string(expected, 4) + ")");
}

constexpr std::uint32_t kCheckpointVersion = 1;
constexpr std::uint32_t kBasisVersion = 1;

}  // namespace

void save_checkpoint(const MlpModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TruncatedFile("cannot open for writing: " + path);
  out.write("MLPC", 4);
  write_u32(out, kCheckpointVersion);
  write_u32(out, m.activation == Activation::Tanh ? 0u : 1u);
  write_u32(out, std::uint32_t(m.layer_dims.size()));
  for (Index d : m.layer_dims) write_u32(out, std::uint32_t(d));
  for (Index i = 0; i < m.params.size(); ++i) {
    const float f = float(m.params[i]);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    write_u32(out, bits);
  }
}

MlpModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TruncatedFile("cannot open: " + path);
  check_magic(in, "MLPC", path);
  const std::uint32_t version = read_u32(in, path);
  if (version != kCheckpointVersion)
    throw BadMagic("unsupported MLPC version in " + path);
  MlpModel m;
  m.activation = read_u32(in, path) == 0 ? Activation::Tanh : Activation::Relu;
  const std::uint32_t n_dims = read_u32(in, path);
  m.layer_dims.resize(n_dims);
  for (auto& d : m.layer_dims) d = Index(read_u32(in, path));
  m.params.resize(m.param_count());
  for (Index i = 0; i < m.params.size(); ++i) {
    const std::uint32_t bits = read_u32(in, path);
    float f;
    std::memcpy(&f, &bits, 4);
    m.params[i] = double(f);
  }
  return m;
}

void save_basis(const SketchedBasis& basis, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TruncatedFile("cannot open for writing: " + path);
  out.write("SKLB", 4);
  write_u32(out, kBasisVersion);
  write_u64(out, std::uint64_t(basis.sketch.p));
  write_u64(out, std::uint64_t(basis.sketch.s));
  write_u32(out, std::uint32_t(basis.k));
  const Index k0 = basis.preconditioner ? basis.preconditioner->u0.cols() : 0;
  write_u32(out, std::uint32_t(k0));
  write_u64(out, basis.lanczos_seed);
  write_u64(out, basis.sketch.seed);
  write_string(out, SplitMix64::kAlgorithmId);
  write_string(out, transform_id(basis.sketch.transform));
  write_u32(out, basis.eigenvalues ? 1u : 0u);

  write_f64_block(out, basis.u_s.data(), basis.u_s.size());
  if (basis.eigenvalues) {
    write_u32(out, std::uint32_t(basis.eigenvalues->size()));
    write_f64_block(out, basis.eigenvalues->data(), basis.eigenvalues->size());
  }
  if (k0 > 0) {
    write_f64_block(out, basis.preconditioner->u0.data(), basis.preconditioner->u0.size());
    write_f64_block(out, basis.preconditioner->lambda0.data(), k0);
  }
}

SketchedBasis load_basis(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TruncatedFile("cannot open: " + path);
  check_magic(in, "SKLB", path);
  const std::uint32_t version = read_u32(in, path);
  if (version != kBasisVersion) throw BadMagic("unsupported SKLB version in " + path);
  const Index p = Index(read_u64(in, path));
  const Index s = Index(read_u64(in, path));
  const Index k = Index(read_u32(in, path));
  const Index k0 = Index(read_u32(in, path));
  const std::uint64_t lanczos_seed = read_u64(in, path);
  const std::uint64_t sketch_seed = read_u64(in, path);
  const std::string prng_id = read_string(in, path);
  if (prng_id != SplitMix64::kAlgorithmId)
    throw BadMagic("basis " + path + " was written with prng '" + prng_id +
                   "', this build regenerates sketches with '" + SplitMix64::kAlgorithmId + "'");
  const SketchTransform transform = transform_from_id(read_string(in, path));
  const bool has_eigenvalues = read_u32(in, path) != 0;

  SketchedBasis basis;
  basis.sketch = sketch_new(p, s, sketch_seed, transform);
  basis.k = k;
  basis.lanczos_seed = lanczos_seed;
  basis.u_s.resize(basis.sketch.rows(), k);
  read_f64_block(in, basis.u_s.data(), basis.u_s.size(), path);
  if (has_eigenvalues) {
    const Index n_eig = Index(read_u32(in, path));
    Vector eig(n_eig);
    read_f64_block(in, eig.data(), n_eig, path);
    basis.eigenvalues = std::move(eig);
  }
  if (k0 > 0) {
    Preconditioner pre;
    pre.u0.resize(p, k0);
    pre.lambda0.resize(k0);
    read_f64_block(in, pre.u0.data(), pre.u0.size(), path);
    read_f64_block(in, pre.lambda0.data(), k0, path);
    basis.preconditioner = std::move(pre);
  }
  return basis;
}

void write_scores_csv(const std::string& path, const std::string& dataset_id,
                      const std::string& method, const std::vector<double>& scores) {
  std::ofstream out(path);
  if (!out) throw TruncatedFile("cannot open for writing: " + path);
  out << "dataset_id,point_index,method,score\n";
  char buf[40];
  for (std::size_t i = 0; i < scores.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", scores[i]);
    out << dataset_id << ',' << i << ',' << method << ',' << buf << '\n';
  }
}

}  // namespace sklu
