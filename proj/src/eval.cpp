#include "sklu/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "sklu/lanczos.hpp"
#include "sklu/linalg.hpp"
#include "sklu/prng.hpp"
#include "sklu/sketch.hpp"
#include "sklu/sketched_lanczos.hpp"

namespace sklu {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::string ExperimentReport::to_json() const {
  nlohmann::json j;
  j["config"] = config;
  for (const auto& [name, value] : metrics) j["metrics"][name] = value;
  for (const auto& [name, table] : tables) j["tables"][name] = matrix_to_json(table);
  for (const auto& [name, value] : memory_floats) j["memory_floats"][name] = value;
  return j.dump(2);
}

std::string ExperimentReport::timings_json() const {
  nlohmann::json j;
  for (const auto& [name, value] : timings_s) j[name] = value;
  return j.dump(2);
}

std::string ExperimentReport::config_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [key, value] : config) {
    for (const std::string* s : {&key, &value})
      for (char c : *s) {
        h ^= std::uint64_t(static_cast<unsigned char>(c));
        h *= 0x100000001b3ULL;
      }
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double auroc(const std::vector<double>& id_scores, const std::vector<double>& ood_scores) {
  if (id_scores.empty() || ood_scores.empty())
    throw EmptyInput("auroc: both score arrays must be non-empty");
  std::vector<double> id_sorted = id_scores;
  std::vector<double> ood_sorted = ood_scores;
  std::sort(id_sorted.begin(), id_sorted.end());
  std::sort(ood_sorted.begin(), ood_sorted.end());

  std::int64_t greater = 0;
  std::int64_t ties = 0;
  std::size_t lo = 0, hi = 0;  // #id < o, #id <= o
  for (double o : ood_sorted) {
    while (lo < id_sorted.size() && id_sorted[lo] < o) ++lo;
    if (hi < lo) hi = lo;
    while (hi < id_sorted.size() && id_sorted[hi] <= o) ++hi;
    greater += std::int64_t(lo);
    ties += std::int64_t(hi - lo);
  }

  // Pair count as the exact rational (2*greater + ties) / (2*n*m), emitted in
  // a complement-symmetric form so auroc(a,b) + auroc(b,a) == 1 exactly.
  const std::int64_t num = 2 * greater + ties;
  const std::int64_t den = 2 * std::int64_t(id_sorted.size()) * std::int64_t(ood_sorted.size());
  if (num <= den - num) return double(num) / double(den);
  return 1.0 - double(den - num) / double(den);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw EmptyInput("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * double(values.size() - 1);
  const std::size_t i = std::size_t(std::floor(pos));
  const double frac = pos - double(i);
  if (i + 1 >= values.size()) return values.back();
  return values[i] * (1.0 - frac) + values[i + 1] * frac;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * double(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InvalidDimensions("spearman_rho: need two samples of equal length >= 2");
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

namespace {

void record_quantiles(ExperimentReport& report, std::vector<double>& errors) {
  report.metrics["q50"] = quantile(errors, 0.50);
  report.metrics["q90"] = quantile(errors, 0.90);
  report.metrics["q95"] = quantile(errors, 0.95);
  report.metrics["q99"] = quantile(errors, 0.99);
  report.metrics["mean"] =
      std::accumulate(errors.begin(), errors.end(), 0.0) / double(errors.size());
  Matrix table(Index(errors.size()), 1);
  for (std::size_t i = 0; i < errors.size(); ++i) table(Index(i), 0) = errors[i];
  report.tables["errors"] = std::move(table);
}

void snapshot_grid_config(ExperimentReport& report, const char* check, Index p, Index k, Index s,
                          Index trials, std::uint64_t seed) {
  report.config["check"] = check;
  report.config["p"] = std::to_string(p);
  report.config["k"] = std::to_string(k);
  report.config["s"] = std::to_string(s);
  report.config["trials"] = std::to_string(trials);
  report.config["seed"] = std::to_string(seed);
  report.config["prng"] = SplitMix64::kAlgorithmId;
  report.config["transform"] = transform_id(SketchTransform::Wht);
}

}  // namespace

ExperimentReport lemma1_check(Index p, Index k, Index s, Index trials, std::uint64_t seed) {
  if (p < 1 || k < 1 || s < 1 || trials < 1)
    throw InvalidDimensions("lemma1_check: grid values must be positive");
  ExperimentReport report;
  snapshot_grid_config(report, "lemma1", p, k, s, trials, seed);

  SplitMix64 root(seed);
  std::vector<double> errors;
  errors.reserve(std::size_t(trials));
  for (Index trial = 0; trial < trials; ++trial) {
    SplitMix64 rng = root.split(std::uint64_t(2 * trial));
    Matrix u(p, k);
    for (Index j = 0; j < k; ++j)
      for (Index i = 0; i < p; ++i) u(i, j) = rng.next_gaussian();
    qr_orthonormalize_inplace(u);
    const Vector v = unit_sphere_vector(p, rng);

    const SketchOperator sk = sketch_new(p, s, root.split(std::uint64_t(2 * trial + 1)).next_u64());
    const Matrix su = sketch_apply_columns(sk, u);
    const Vector sv = sketch_apply(sk, v);
    const double sketched = (su.transpose() * sv).norm();
    const double exact = (u.transpose() * v).norm();
    errors.push_back(std::abs(sketched - exact));
  }
  record_quantiles(report, errors);
  return report;
}

ExperimentReport lemma2_check(Index p, Index k, Index s, Index trials, std::uint64_t seed) {
  if (p < 1 || k < 1 || s < 1 || trials < 1)
    throw InvalidDimensions("lemma2_check: grid values must be positive");
  ExperimentReport report;
  snapshot_grid_config(report, "lemma2", p, k, s, trials, seed);

  SplitMix64 root(seed);
  // One fixed low-rank operator; per trial a fresh Lanczos stream and sketch.
  const Index rank = std::max<Index>(2 * k, 32);
  const SyntheticFisher sf = synthetic_fisher(p, rank, 0.9, root.split(0xf00d).next_u64());
  const auto op = sf.as_operator();

  std::vector<double> errors;
  errors.reserve(std::size_t(trials));
  for (Index trial = 0; trial < trials; ++trial) {
    SplitMix64 rng = root.split(std::uint64_t(3 * trial + 1));
    Matrix v_dense(p, k);
    Index col = 0;
    const auto emit = [&](ConstVectorRef vec) { v_dense.col(col++) = vec; };
    const std::uint64_t lanczos_seed = root.split(std::uint64_t(3 * trial + 2)).next_u64();
    LanczosResult lres = lanczos_low_memory(*op, k, lanczos_seed, emit);
    if (lres.k_effective < k) v_dense = Matrix(v_dense.leftCols(lres.k_effective));

    const SketchOperator sk =
        sketch_new(p, s, root.split(std::uint64_t(3 * trial + 3)).next_u64());
    Matrix sv = sketch_apply_columns(sk, v_dense);
    qr_orthonormalize_inplace(v_dense);  // dense U, the reference path
    qr_orthonormalize_inplace(sv);       // sketched U_S

    const Vector probe = unit_sphere_vector(p, rng);
    const double exact = (v_dense.transpose() * probe).norm();
    const double sketched = (sv.transpose() * sketch_apply(sk, probe)).norm();
    errors.push_back(std::abs(sketched - exact));
  }
  record_quantiles(report, errors);
  return report;
}

ExperimentReport ablation_surface(const SyntheticFisher& sf, const std::vector<Index>& k_grid,
                                  const std::vector<Index>& s_grid, Index m_queries,
                                  std::uint64_t seed) {
  if (k_grid.empty() || s_grid.empty())
    throw InvalidDimensions("ablation_surface: grids must be non-empty");
  ExperimentReport report;
  report.config["check"] = "ablation";
  report.config["p"] = std::to_string(sf.p);
  report.config["rank"] = std::to_string(sf.rank);
  report.config["m_queries"] = std::to_string(m_queries);
  report.config["seed"] = std::to_string(seed);
  {
    std::ostringstream ks, ss;
    for (Index k : k_grid) ks << k << " ";
    for (Index s : s_grid) ss << s << " ";
    report.config["k_grid"] = ks.str();
    report.config["s_grid"] = ss.str();
  }

  SplitMix64 root(seed);
  const std::uint64_t lanczos_seed = root.split(1).next_u64();
  const std::vector<Vector> queries =
      synthetic_test_jacobians(sf, m_queries, root.split(2).next_u64());
  std::vector<double> exact_scores(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const double pn = sf.projector_norm(queries[q]);
    exact_scores[q] = squared_norm(queries[q]) - pn * pn;
  }

  const auto op = sf.as_operator();
  Matrix surface(Index(k_grid.size()), Index(s_grid.size()));
  for (std::size_t ki = 0; ki < k_grid.size(); ++ki) {
    const Index k = k_grid[ki];
    for (std::size_t si = 0; si < s_grid.size(); ++si) {
      const Index s = s_grid[si];
      double mean_err = 0.0;
      if (s == kNoSketch) {
        // Dense reference: same streaming Lanczos, post-hoc QR, no sketch.
        Matrix v_dense(sf.p, k);
        Index col = 0;
        const auto emit = [&](ConstVectorRef vec) { v_dense.col(col++) = vec; };
        LanczosResult lres = lanczos_low_memory(*op, k, lanczos_seed, emit);
        if (lres.k_effective < k) v_dense = Matrix(v_dense.leftCols(lres.k_effective));
        qr_orthonormalize_inplace(v_dense);
        for (std::size_t q = 0; q < queries.size(); ++q) {
          const double score =
              squared_norm(queries[q]) - (v_dense.transpose() * queries[q]).squaredNorm();
          mean_err += std::abs(score - exact_scores[q]);
        }
      } else {
        const SketchOperator sk =
            sketch_new(sf.p, s, root.split(0x1000 + 31 * ki + si).next_u64());
        const SketchedBasis basis = sketched_lanczos(*op, k, sk, lanczos_seed, false);
        for (std::size_t q = 0; q < queries.size(); ++q) {
          const double pn = sketched_projection_norm(basis, queries[q]);
          const double score = std::max(0.0, squared_norm(queries[q]) - pn * pn);
          mean_err += std::abs(score - exact_scores[q]);
        }
      }
      surface(Index(ki), Index(si)) = mean_err / double(queries.size());
    }
  }
  report.tables["error_surface"] = surface;

  // Trend statistics: error should fall with s at fixed k and with k at
  // fixed s. The dense column joins the s ordering as the largest value.
  for (std::size_t ki = 0; ki < k_grid.size(); ++ki) {
    std::vector<double> ss, errs;
    for (std::size_t si = 0; si < s_grid.size(); ++si) {
      ss.push_back(s_grid[si] == kNoSketch ? 1e18 : double(s_grid[si]));
      errs.push_back(surface(Index(ki), Index(si)));
    }
    report.metrics["spearman_row_k" + std::to_string(k_grid[ki])] = spearman_rho(ss, errs);
  }
  for (std::size_t si = 0; si < s_grid.size(); ++si) {
    std::vector<double> ks, errs;
    for (std::size_t ki = 0; ki < k_grid.size(); ++ki) {
      ks.push_back(double(k_grid[ki]));
      errs.push_back(surface(Index(ki), Index(si)));
    }
    const std::string tag =
        s_grid[si] == kNoSketch ? std::string("inf") : std::to_string(s_grid[si]);
    report.metrics["spearman_col_s" + tag] = spearman_rho(ks, errs);
  }
  return report;
}

namespace {

// Top principal components of (ritz vectors) * diag(ritz values).
Matrix top_principal_components(const Matrix& weighted, Index top_pc) {
  const Matrix gram = weighted.transpose() * weighted;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);  // ascending eigenvalues
  Matrix pcs(weighted.rows(), top_pc);
  for (Index i = 0; i < top_pc; ++i) {
    const Index src = gram.cols() - 1 - i;
    const double sigma = std::sqrt(std::max(0.0, es.eigenvalues()[src]));
    pcs.col(i) = weighted * es.eigenvectors().col(src) / sigma;
  }
  qr_orthonormalize_inplace(pcs);  // tidy roundoff
  return pcs;
}

}  // namespace

double projector_agreement(const LinearOperator& op, Index k, Index top_pc, std::uint64_t seed) {
  if (top_pc > k) throw InvalidDimensions("projector_agreement: top_pc must not exceed k");
  const Index p = op.dim();

  Matrix v_low(p, k);
  Index col = 0;
  const auto emit = [&](ConstVectorRef vec) { v_low.col(col++) = vec; };
  LanczosResult low = lanczos_low_memory(op, k, seed, emit);
  if (low.k_effective < k) v_low = Matrix(v_low.leftCols(low.k_effective));
  LanczosResult hi = lanczos_hi_memory(op, k, seed);

  const Spectrum spec_low = tridiag_eig(low.t);
  const Spectrum spec_hi = tridiag_eig(hi.t);
  const Matrix weighted_low =
      (v_low * spec_low.eigenvectors) * spec_low.eigenvalues.asDiagonal();
  const Matrix weighted_hi =
      (hi.basis * spec_hi.eigenvectors) * spec_hi.eigenvalues.asDiagonal();

  const Matrix q_low = top_principal_components(weighted_low, top_pc);
  const Matrix q_hi = top_principal_components(weighted_hi, top_pc);

  FunctionOperator diff(p, [&](ConstVectorRef x, VectorRef y) {
    y.noalias() = q_low * (q_low.transpose() * x);
    y.noalias() -= q_hi * (q_hi.transpose() * x);
  });
  return operator_norm(diff, 300, SplitMix64::mix(seed ^ 0x70726f6a));
}

MemoryBudget memory_account(Index p, Index s, Index k, Index k0) {
  MemoryBudget b;
  b.preprocess_floats = 4 * p + s * (k + 1) + k0 * p;
  b.query_floats = p + s * (k + 1) + k0 * p;
  return b;
}

}  // namespace sklu
