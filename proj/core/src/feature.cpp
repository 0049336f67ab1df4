#include "retrosearch/feature.hpp"

#include <cmath>
#include <stdexcept>

namespace retro {

NormalizationContext make_normalization_context(const std::vector<const FeatureVector*>& batch) {
  if (batch.empty()) {
    throw std::invalid_argument("make_normalization_context: empty batch");
  }
  const std::size_t dim = batch.front()->dim();
  NormalizationContext ctx;
  ctx.min.assign(dim, 0.0);
  ctx.max.assign(dim, 0.0);
  for (std::size_t k = 0; k < dim; ++k) {
    ctx.min[k] = ctx.max[k] = batch.front()->values[k];
  }
  for (std::size_t i = 1; i < batch.size(); ++i) {
    const FeatureVector& f = *batch[i];
    if (f.dim() != dim) {
      throw std::invalid_argument("make_normalization_context: dimension mismatch in batch");
    }
    for (std::size_t k = 0; k < dim; ++k) {
      if (f.values[k] < ctx.min[k]) ctx.min[k] = f.values[k];
      if (f.values[k] > ctx.max[k]) ctx.max[k] = f.values[k];
    }
  }
  return ctx;
}

FeatureVector normalize(const FeatureVector& raw, const NormalizationContext& ctx) {
  if (raw.dim() != ctx.dim()) {
    throw std::invalid_argument("normalize: feature/context dimension mismatch");
  }
  FeatureVector out;
  out.schema_id = raw.schema_id;
  out.values.resize(raw.dim());
  for (std::size_t k = 0; k < raw.dim(); ++k) {
    const double range = ctx.max[k] - ctx.min[k];
    out.values[k] = range > 0.0 ? 2.0 * (raw.values[k] - ctx.min[k]) / range - 1.0 : 0.0;
  }
  return out;
}

std::pair<std::vector<FeatureVector>, NormalizationContext> normalize_query(
    const std::vector<FeatureVector>& batch) {
  std::vector<const FeatureVector*> ptrs;
  ptrs.reserve(batch.size());
  for (const FeatureVector& f : batch) ptrs.push_back(&f);
  NormalizationContext ctx = make_normalization_context(ptrs);
  std::vector<FeatureVector> out;
  out.reserve(batch.size());
  for (const FeatureVector& f : batch) out.push_back(normalize(f, ctx));
  return {std::move(out), std::move(ctx)};
}

}  // namespace retro
