#include <doctest.h>

#include <string>
#include <vector>

#include <json.hpp>

#include "sklu/eval.hpp"
#include "sklu/prng.hpp"
#include "sklu/sketch.hpp"
#include "test_oracles.hpp"

using namespace sklu;

TEST_CASE("auroc on hand-countable inputs") {
  CHECK(auroc({0.1, 0.2}, {0.3, 0.4}) == 1.0);
  CHECK(auroc({0.3, 0.4}, {0.1, 0.2}) == 0.0);
  CHECK(auroc({0.5, 0.7, 0.7}, {0.5, 0.7, 0.7}) == 0.5);
  CHECK(auroc({0.1, 0.3}, {0.2, 0.4}) == 0.75);
  CHECK_THROWS_AS(auroc({}, {0.1}), EmptyInput);
  CHECK_THROWS_AS(auroc({0.1}, {}), EmptyInput);
}

TEST_CASE("auroc equals brute-force pair counting with ties") {
  SplitMix64 rng(1);
  for (int inst = 0; inst < 300; ++inst) {
    const std::size_t n = 1 + std::size_t(rng.next_below(40));
    const std::size_t m = 1 + std::size_t(rng.next_below(40));
    std::vector<double> id(n), ood(m);
    // coarse grid provokes plenty of ties
    for (auto& v : id) v = double(rng.next_below(8));
    for (auto& v : ood) v = double(rng.next_below(8)) + (inst % 2 ? 0.5 : 0.0);
    CHECK(auroc(id, ood) == oracles::auroc_bruteforce(id, ood));
  }
}

TEST_CASE("auroc symmetry and monotone invariance") {
  SplitMix64 rng(2);
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t n = 1 + std::size_t(rng.next_below(30));
    const std::size_t m = 1 + std::size_t(rng.next_below(30));
    std::vector<double> id(n), ood(m);
    for (auto& v : id) v = double(rng.next_below(6)) * 0.25;
    for (auto& v : ood) v = double(rng.next_below(6)) * 0.25;
    CHECK(auroc(id, ood) + auroc(ood, id) == 1.0);

    // strictly increasing transform leaves the value unchanged
    auto warp = [](std::vector<double> v) {
      for (auto& x : v) x = std::exp(3.0 * x) + x;
      return v;
    };
    CHECK(auroc(id, ood) == auroc(warp(id), warp(ood)));
  }
}

TEST_CASE("quantile and spearman helpers") {
  std::vector<double> v{1, 2, 3, 4, 5};
  CHECK(quantile(v, 0.5) == 3.0);
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 5.0);
  CHECK(quantile(v, 0.25) == 2.0);

  CHECK(spearman_rho({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman_rho({1, 2, 3, 4}, {9, 7, 5, 3}) == doctest::Approx(-1.0));
  CHECK(std::abs(spearman_rho({1, 2, 3, 4, 5, 6, 7, 8},
                              {1, -1, 2, -2, 3, -3, 4, -4})) < 0.6);
}

TEST_CASE("memory_account closed forms") {
  const MemoryBudget b = memory_account(100, 10, 3, 0);
  CHECK(b.preprocess_floats == 440);
  CHECK(b.query_floats == 140);

  const MemoryBudget with_pre = memory_account(100, 10, 3, 7);
  CHECK(with_pre.preprocess_floats == 440 + 7 * 100);
  CHECK(with_pre.query_floats == 140 + 7 * 100);
}

TEST_CASE("lemma1_check: injective sketch has vanishing error") {
  const ExperimentReport rep = lemma1_check(64, 4, 64, 20, 3);
  CHECK(rep.metrics.at("q99") <= 1e-10);
  CHECK(rep.tables.at("errors").rows() == 20);
}

TEST_CASE("lemma1 single-vector geometry") {
  // k = 1 with the probe equal to the basis vector: the error is the norm
  // distortion of one sketched vector.
  SplitMix64 rng(4);
  const Index p = 512, s = 256;
  std::vector<double> errors;
  for (int trial = 0; trial < 101; ++trial) {
    Vector u = unit_sphere_vector(p, rng);
    const SketchOperator sk = sketch_new(p, s, 1000 + std::uint64_t(trial));
    const Vector su = sketch_apply(sk, u);
    errors.push_back(std::abs(su.squaredNorm() - 1.0));
  }
  CHECK(quantile(errors, 0.5) <= 3.0 / std::sqrt(double(s)));
}

TEST_CASE("lemma1 error shrinks like one over sqrt s") {
  const ExperimentReport lo = lemma1_check(1024, 8, 128, 150, 5);
  const ExperimentReport hi = lemma1_check(1024, 8, 512, 150, 5);
  const double ratio = lo.metrics.at("q50") / hi.metrics.at("q50");
  CHECK(ratio > 1.3);  // ideal is 2 for a 4x sketch growth
  CHECK(ratio < 3.0);
}

TEST_CASE("lemma2_check: injective sketch and degenerate operator") {
  const ExperimentReport rep = lemma2_check(128, 8, 128, 10, 6);
  CHECK(rep.metrics.at("q99") <= 1e-8);

  // identity-like degenerate case reduces to single-column geometry
  const ExperimentReport deg = lemma2_check(32, 1, 32, 5, 7);
  CHECK(deg.metrics.at("q99") <= 1e-8);
}

TEST_CASE("reports are reproducible from their config snapshot") {
  const ExperimentReport a = lemma1_check(256, 4, 64, 25, 11);
  const nlohmann::json j = nlohmann::json::parse(a.to_json());
  const ExperimentReport b = lemma1_check(
      Index(std::stoll(j["config"]["p"].get<std::string>())),
      Index(std::stoll(j["config"]["k"].get<std::string>())),
      Index(std::stoll(j["config"]["s"].get<std::string>())),
      Index(std::stoll(j["config"]["trials"].get<std::string>())),
      std::uint64_t(std::stoull(j["config"]["seed"].get<std::string>())));
  CHECK(a.to_json() == b.to_json());
  CHECK(a.config_hash() == b.config_hash());
  for (const auto& [name, value] : a.metrics) CHECK(std::isfinite(value));
}

TEST_CASE("ablation surface smoke run") {
  const SyntheticFisher sf = synthetic_fisher(512, 32, 0.9, 12);
  const ExperimentReport rep =
      ablation_surface(sf, {4, 8, 32}, {64, 256, kNoSketch}, 10, 13);
  const Matrix& surface = rep.tables.at("error_surface");
  REQUIRE(surface.rows() == 3);
  REQUIRE(surface.cols() == 3);
  // dense column at k = rank recovers the span: error at Lanczos level
  CHECK(surface(2, 2) <= 1e-6);
  // more sketch budget handily dominates less at modest rank
  CHECK(surface(0, 1) <= surface(0, 0) + 0.05);
  CHECK(rep.metrics.count("spearman_row_k4") == 1);
  CHECK(rep.metrics.count("spearman_col_sinf") == 1);
}

TEST_CASE("projector_agreement on exact small cases") {
  Vector d = Vector::Zero(32);
  for (Index i = 0; i < 32; ++i) d[i] = 4.0 * std::pow(0.5, double(i));
  const DiagonalOperator op(d);
  CHECK(projector_agreement(op, 10, 4, 15) <= 1e-6);
  CHECK_THROWS_AS(projector_agreement(op, 4, 5, 15), InvalidDimensions);
}

TEST_CASE("projector_agreement is small on a decaying 500-dim operator") {
  const SyntheticFisher sf = synthetic_fisher(500, 500, 0.9, 16);
  const auto op = sf.as_operator();
  CHECK(projector_agreement(*op, 40, 10, 17) <= 0.05);
}
