#include "sklu/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "sklu/errors.hpp"
#include "sklu/prng.hpp"

namespace sklu {

void SyntheticFisher::apply(ConstVectorRef x, VectorRef y) const {
  y.noalias() = v * lambdas.cwiseProduct(v.transpose() * x);
}

std::unique_ptr<LinearOperator> SyntheticFisher::as_operator() const {
  return std::make_unique<FunctionOperator>(
      p, [this](ConstVectorRef x, VectorRef y) { apply(x, y); });
}

SyntheticFisher synthetic_fisher(Index p, Index rank, double decay, std::uint64_t seed) {
  if (rank < 1 || rank > p) throw InvalidDimensions("synthetic_fisher: need 1 <= R <= p");
  if (!(decay > 0.0 && decay < 1.0))
    throw InvalidDimensions("synthetic_fisher: decay must be in (0, 1)");
  SyntheticFisher sf;
  sf.p = p;
  sf.rank = rank;
  SplitMix64 rng(seed);
  sf.v.resize(p, rank);
  for (Index j = 0; j < rank; ++j)
    for (Index i = 0; i < p; ++i) sf.v(i, j) = rng.next_gaussian();
  qr_orthonormalize_inplace(sf.v);
  sf.lambdas.resize(rank);
  for (Index i = 0; i < rank; ++i) sf.lambdas[i] = std::pow(decay, double(i));
  return sf;
}

std::vector<Vector> synthetic_test_jacobians(const SyntheticFisher& sf, Index m,
                                             std::uint64_t seed) {
  if (m < 1) throw InvalidDimensions("synthetic_test_jacobians: m must be >= 1");
  std::vector<Vector> out;
  out.reserve(std::size_t(m));
  SplitMix64 rng(seed);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (Index q = 0; q < m; ++q) {
    const Vector g = gaussian_vector(sf.p, rng);
    const Vector coeff = sf.v.transpose() * g;
    const Vector in_span = sf.v * (coeff / coeff.norm());
    Vector resid = g - sf.v * coeff;
    resid /= resid.norm();
    out.push_back(inv_sqrt2 * (in_span + resid));
  }
  return out;
}

namespace {

Dataset gaussian_blobs(Index d, Index n, const std::vector<Vector>& means,
                       SplitMix64& rng, const std::string& name, std::uint64_t seed) {
  Dataset ds;
  ds.name = name;
  ds.seed = seed;
  ds.inputs.resize(d, n);
  ds.labels = std::vector<int>(std::size_t(n));
  const Index classes = Index(means.size());
  for (Index i = 0; i < n; ++i) {
    const Index cls = i % classes;
    (*ds.labels)[std::size_t(i)] = int(cls);
    for (Index j = 0; j < d; ++j) ds.inputs(j, i) = means[std::size_t(cls)][j] + rng.next_gaussian();
  }
  return ds;
}

}  // namespace

TwoGaussianTask two_gaussian_task(Index d, Index n, double shift, std::uint64_t seed) {
  if (d < 2) throw InvalidDimensions("two_gaussian_task: d must be >= 2");
  if (n < 10) throw InvalidDimensions("two_gaussian_task: n must be >= 10");

  Vector mean0 = Vector::Zero(d);
  Vector mean1 = Vector::Zero(d);
  mean0[0] = -2.0;
  mean1[0] = 2.0;
  // The OoD blob sits on top of class 0 at shift = 0 and slides away along
  // the last axis, which neither class mean uses.
  Vector mean_ood = mean0;
  mean_ood[d - 1] += shift;

  SplitMix64 root(seed);
  SplitMix64 rng_train = root.split(1);
  SplitMix64 rng_test = root.split(2);
  SplitMix64 rng_ood = root.split(3);

  TwoGaussianTask task;
  const Index n_test = std::max<Index>(n / 4, 8);
  task.id_train = gaussian_blobs(d, n, {mean0, mean1}, rng_train, "two-gaussian-train", seed);
  task.id_test = gaussian_blobs(d, n_test, {mean0, mean1}, rng_test, "two-gaussian-id-test", seed);
  task.ood_test = gaussian_blobs(d, n_test, {mean_ood}, rng_ood, "two-gaussian-ood-test", seed);
  return task;
}

namespace {

std::uint32_t read_be_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw TruncatedFile("idx file truncated in header: " + path);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

void write_be_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

constexpr std::uint32_t kIdxImageMagic = 0x00000803;  // rank-3 unsigned bytes
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;  // rank-1 unsigned bytes

}  // namespace

Dataset load_idx(const std::string& images_path, const std::optional<std::string>& labels_path) {
  std::ifstream in(images_path, std::ios::binary);
  if (!in) throw TruncatedFile("cannot open idx file: " + images_path);
  const std::uint32_t magic = read_be_u32(in, images_path);
  if (magic != kIdxImageMagic)
    throw BadMagic("bad idx image magic in " + images_path + " (expected 0x00000803)");
  const Index count = Index(read_be_u32(in, images_path));
  const Index rows = Index(read_be_u32(in, images_path));
  const Index cols = Index(read_be_u32(in, images_path));
  const Index d = rows * cols;

  std::vector<unsigned char> bytes(std::size_t(count) * std::size_t(d));
  if (!in.read(reinterpret_cast<char*>(bytes.data()), std::streamsize(bytes.size())))
    throw TruncatedFile("idx image payload truncated: " + images_path);

  Dataset ds;
  ds.name = images_path;
  ds.inputs.resize(d, count);
  for (Index i = 0; i < count; ++i)
    for (Index j = 0; j < d; ++j)
      ds.inputs(j, i) = double(bytes[std::size_t(i) * std::size_t(d) + std::size_t(j)]) / 255.0;

  if (labels_path) {
    std::ifstream lin(*labels_path, std::ios::binary);
    if (!lin) throw TruncatedFile("cannot open idx file: " + *labels_path);
    const std::uint32_t lmagic = read_be_u32(lin, *labels_path);
    if (lmagic != kIdxLabelMagic)
      throw BadMagic("bad idx label magic in " + *labels_path + " (expected 0x00000801)");
    const Index lcount = Index(read_be_u32(lin, *labels_path));
    if (lcount != count)
      throw DimensionMismatch("idx label count " + std::to_string(lcount) +
                              " != image count " + std::to_string(count));
    std::vector<unsigned char> lbytes;
    lbytes.resize(std::size_t(lcount));
    if (!lin.read(reinterpret_cast<char*>(lbytes.data()), std::streamsize(lbytes.size())))
      throw TruncatedFile("idx label payload truncated: " + *labels_path);
    ds.labels = std::vector<int>(lbytes.begin(), lbytes.end());
  }
  return ds;
}

void save_idx(const Dataset& ds, Index side, const std::string& images_path,
              const std::optional<std::string>& labels_path) {
  if (ds.dim() != side * side) throw DimensionMismatch("save_idx: d != side^2");
  std::ofstream out(images_path, std::ios::binary);
  write_be_u32(out, kIdxImageMagic);
  write_be_u32(out, std::uint32_t(ds.size()));
  write_be_u32(out, std::uint32_t(side));
  write_be_u32(out, std::uint32_t(side));
  for (Index i = 0; i < ds.size(); ++i)
    for (Index j = 0; j < ds.dim(); ++j) {
      const double v = std::clamp(ds.inputs(j, i), 0.0, 1.0);
      const unsigned char b = static_cast<unsigned char>(std::lround(v * 255.0));
      out.write(reinterpret_cast<const char*>(&b), 1);
    }
  if (labels_path && ds.labels) {
    std::ofstream lout(*labels_path, std::ios::binary);
    write_be_u32(lout, kIdxLabelMagic);
    write_be_u32(lout, std::uint32_t(ds.size()));
    for (int lab : *ds.labels) {
      const unsigned char b = static_cast<unsigned char>(lab);
      lout.write(reinterpret_cast<const char*>(&b), 1);
    }
  }
}

Dataset rotate_images(const Dataset& ds, double degrees, Index side) {
  if (ds.dim() != side * side) throw DimensionMismatch("rotate_images: d != side^2");
  Dataset out = ds;
  if (degrees == 0.0) return out;  // bit-exact identity

  const double theta = degrees * M_PI / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double mid = double(side - 1) / 2.0;

  for (Index img = 0; img < ds.size(); ++img) {
    for (Index r = 0; r < side; ++r) {
      for (Index col = 0; col < side; ++col) {
        const double u = double(col) - mid;   // x, rightwards
        const double v = double(r) - mid;     // y, downwards
        const double su = u * c - v * s;
        const double sv = u * s + v * c;
        const double src_c = su + mid;
        const double src_r = sv + mid;
        const Index r0 = Index(std::floor(src_r));
        const Index c0 = Index(std::floor(src_c));
        const double fr = src_r - double(r0);
        const double fc = src_c - double(c0);
        auto sample = [&](Index rr, Index cc) -> double {
          if (rr < 0 || rr >= side || cc < 0 || cc >= side) return 0.0;
          return ds.inputs(rr * side + cc, img);
        };
        const double val = (1.0 - fr) * ((1.0 - fc) * sample(r0, c0) + fc * sample(r0, c0 + 1)) +
                           fr * ((1.0 - fc) * sample(r0 + 1, c0) + fc * sample(r0 + 1, c0 + 1));
        out.inputs(r * side + col, img) = val;
      }
    }
  }
  return out;
}

Dataset subsample(const Dataset& ds, Index m, std::uint64_t seed) {
  if (m >= ds.size()) return ds;
  std::vector<Index> perm(std::size_t(ds.size()));
  std::iota(perm.begin(), perm.end(), Index{0});
  SplitMix64 rng(seed);
  for (Index i = 0; i < m; ++i) {
    const Index j = i + Index(rng.next_below(std::uint64_t(ds.size() - i)));
    std::swap(perm[std::size_t(i)], perm[std::size_t(j)]);
  }
  std::sort(perm.begin(), perm.begin() + m);

  Dataset out;
  out.name = ds.name;
  out.seed = seed;
  out.inputs.resize(ds.dim(), m);
  if (ds.labels) out.labels = std::vector<int>(std::size_t(m));
  if (ds.targets) out.targets = Matrix(ds.targets->rows(), m);
  for (Index i = 0; i < m; ++i) {
    const Index src = perm[std::size_t(i)];
    out.inputs.col(i) = ds.inputs.col(src);
    if (ds.labels) (*out.labels)[std::size_t(i)] = (*ds.labels)[std::size_t(src)];
    if (ds.targets) out.targets->col(i) = ds.targets->col(src);
  }
  return out;
}

std::string DatasetManifest::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["kind"] = kind;
  j["images_path"] = images_path;
  j["labels_path"] = labels_path;
  j["seed"] = seed;
  j["d"] = d;
  j["n"] = n;
  j["shift"] = shift;
  j["rotate_degrees"] = rotate_degrees;
  return j.dump(2);
}

DatasetManifest DatasetManifest::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  DatasetManifest m;
  m.name = j.value("name", "");
  m.kind = j.at("kind").get<std::string>();
  m.images_path = j.value("images_path", "");
  m.labels_path = j.value("labels_path", "");
  m.seed = j.value("seed", std::uint64_t{0});
  m.d = j.value("d", Index{0});
  m.n = j.value("n", Index{0});
  m.shift = j.value("shift", 0.0);
  m.rotate_degrees = j.value("rotate_degrees", 0.0);
  return m;
}

}  // namespace sklu
