#pragma once

#include <string>
#include <vector>

#include "sklu/model.hpp"
#include "sklu/sketched_lanczos.hpp"

namespace sklu {

// Checkpoint format "MLPC": header (magic, version, activation id, layer
// dims), then the parameters as little-endian float32. Loading promotes the
// payload back to f64.
void save_checkpoint(const MlpModel& m, const std::string& path);
MlpModel load_checkpoint(const std::string& path);

// Basis format "SKLB": header (magic, version, p, s, k, k0, seeds, prng and
// transform identifiers), then little-endian f64 payloads for U_S, optional
// Ritz values, optional preconditioner (U0, Lambda0). The sketch itself is
// regenerated from its persisted seed on load.
void save_basis(const SketchedBasis& basis, const std::string& path);
SketchedBasis load_basis(const std::string& path);

/// One row per score: dataset_id, point_index, method, score with 17
/// significant digits.
void write_scores_csv(const std::string& path, const std::string& dataset_id,
                      const std::string& method, const std::vector<double>& scores);

}  // namespace sklu
