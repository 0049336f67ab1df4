#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace retro {

/// Dense per-node feature vector. schema_id names the layout (e.g. "maze-v1")
/// so models refuse inputs from the wrong environment.
struct FeatureVector {
  std::vector<double> values;
  std::string schema_id;

  std::size_t dim() const { return values.size(); }
};

/// Per-feature [min, max] over one query batch (one frontier at one decision
/// point). Scores are only comparable within a batch, so normalization is
/// recomputed per decision rather than from global statistics.
struct NormalizationContext {
  std::vector<double> min;
  std::vector<double> max;

  std::size_t dim() const { return min.size(); }
};

/// Context over a batch of same-schema vectors. Throws std::invalid_argument
/// on an empty batch or mismatched dimensions.
NormalizationContext make_normalization_context(const std::vector<const FeatureVector*>& batch);

/// Affine map of each feature to [-1, +1] under the batch context.
/// Zero-range features map to 0.
FeatureVector normalize(const FeatureVector& raw, const NormalizationContext& ctx);

/// Convenience over a whole batch: returns normalized copies plus the context.
std::pair<std::vector<FeatureVector>, NormalizationContext> normalize_query(
    const std::vector<FeatureVector>& batch);

}  // namespace retro
