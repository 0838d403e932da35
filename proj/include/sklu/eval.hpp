#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sklu/data.hpp"
#include "sklu/operators.hpp"
#include "sklu/types.hpp"

namespace sklu {

/// Self-describing result of a verifier or study run. The config snapshot is
/// everything needed to reproduce the metrics bit-exactly; timings live in
/// their own map so deterministic outputs can exclude them.
struct ExperimentReport {
  std::map<std::string, std::string> config;
  std::map<std::string, double> metrics;
  std::map<std::string, Matrix> tables;
  std::map<std::string, double> timings_s;
  std::map<std::string, double> memory_floats;

  /// Deterministic JSON of config, metrics, tables and memory (no timings).
  std::string to_json() const;
  std::string timings_json() const;
  /// FNV-1a hash of the config snapshot, hex. Embedded in output file names.
  std::string config_hash() const;
};

/// Probability that a random OoD score exceeds a random ID score, ties count
/// half. Rank-based O((n+m) log(n+m)); exact pair semantics.
double auroc(const std::vector<double>& id_scores, const std::vector<double>& ood_scores);

/// Distribution of | ||(SU)^T Sv|| - ||U^T v|| | over fresh sketches and fresh
/// orthonormal U, reported as quantiles {0.5, 0.9, 0.95, 0.99}.
ExperimentReport lemma1_check(Index p, Index k, Index s, Index trials, std::uint64_t seed);

/// Same error statistic, but U comes from post-hoc QR of a low-memory Lanczos
/// stream and U_S from QR of the sketched stream, exercising the
/// sketch-then-orthogonalize path end to end.
ExperimentReport lemma2_check(Index p, Index k, Index s, Index trials, std::uint64_t seed);

/// In s_grid, this value stands for the no-sketch (dense) column.
inline constexpr Index kNoSketch = 0;

/// Mean |sketched score - exact score| over the generator's conditioned test
/// vectors, for every (k, s) cell plus the dense column. Also records the
/// per-row and per-column Spearman rank correlations of the error trends.
ExperimentReport ablation_surface(const SyntheticFisher& sf, const std::vector<Index>& k_grid,
                                  const std::vector<Index>& s_grid, Index m_queries,
                                  std::uint64_t seed);

/// Operator norm of the difference between the top-top_pc principal-component
/// projectors of the low-memory and hi-memory Lanczos eigenpair estimates,
/// both run for k iterations from the same start vector.
double projector_agreement(const LinearOperator& op, Index k, Index top_pc, std::uint64_t seed);

struct MemoryBudget {
  std::int64_t preprocess_floats = 0;
  std::int64_t query_floats = 0;
};

/// Closed-form float budgets: preprocessing 4p + s(k+1) + k0*p and query
/// p + s(k+1) + k0*p.
MemoryBudget memory_account(Index p, Index s, Index k, Index k0);

/// Spearman rank correlation with average ranks on ties.
double spearman_rho(const std::vector<double>& x, const std::vector<double>& y);

/// Interpolated quantile of an unsorted sample (numpy-style, q in [0,1]).
double quantile(std::vector<double> values, double q);

}  // namespace sklu
