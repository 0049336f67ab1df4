#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "retrosearch/feature.hpp"
#include "retrosearch/rng.hpp"

namespace retro {

/// Node-selection interface used by the search loop. Policies receive the raw
/// cached features plus the normalization context of the current query batch;
/// learned policies normalize, hand-written heuristics (Manhattan expert,
/// best-bound) read raw values directly.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual double score(const FeatureVector& raw, const NormalizationContext& ctx) const = 0;

  /// Pop-time pruning hook: true means "do not branch on this node".
  virtual bool prune(const FeatureVector& raw, const NormalizationContext& ctx) const {
    (void)raw;
    (void)ctx;
    return false;
  }

  /// Lets the search loop skip building a normalization context per pop when
  /// no pruner is attached.
  virtual bool has_pruner() const { return false; }

  virtual std::string tag() const = 0;
};

/// Two-layer feedforward ranker (LeakyReLU, slope 0.01):
///   score(x) = w2 . leaky(W1 x + b1) + b2
struct RankerParams {
  int input_dim = 0;
  int hidden_dim = 0;
  std::vector<double> w1;  // hidden_dim x input_dim, row-major
  std::vector<double> b1;  // hidden_dim
  std::vector<double> w2;  // hidden_dim
  double b2 = 0.0;
  std::string schema_id;

  std::size_t parameter_count() const { return w1.size() + b1.size() + w2.size() + 1; }
};

/// One-layer logistic keep/prune classifier. keep_weight is the loss weight
/// on keep-labeled examples (mistakenly pruning an optimal node costs more
/// than keeping a useless one).
struct PrunerParams {
  int input_dim = 0;
  std::vector<double> w;
  double b = 0.0;
  double keep_weight = 5.0;
  std::string schema_id;
};

struct LeakyRelu {
  static constexpr double kSlope = 0.01;
  static double f(double x) { return x > 0.0 ? x : kSlope * x; }
  static double df(double x) { return x > 0.0 ? 1.0 : kSlope; }
};

double ranker_score(const RankerParams& p, const std::vector<double>& x);

/// Numerically stable pairwise ranking loss log(1 + exp(-(s_pref - s_neg))).
double pairwise_loss(double score_pref, double score_neg);

/// Accumulates d(loss)/d(params) for one (preferred, negative) pair into
/// grad (same layout as RankerParams: w1, b1, w2, b2 flattened). Returns the
/// pair loss. Gradients are hand-derived; tests check them against central
/// finite differences.
double pairwise_loss_grad(const RankerParams& p, const std::vector<double>& x_pref,
                          const std::vector<double>& x_neg, std::vector<double>& grad);

/// Keep-probability of the pruner, sigma(w.x + b).
double pruner_keep_probability(const PrunerParams& p, const std::vector<double>& x);

/// Weighted logistic loss for one example (keep = positive class); gradient
/// accumulated into grad (layout: w then b).
double pruner_loss_grad(const PrunerParams& p, const std::vector<double>& x, bool keep,
                        std::vector<double>& grad);

RankerParams init_ranker(int input_dim, int hidden_dim, const std::string& schema_id,
                         std::uint64_t seed);
PrunerParams init_pruner(int input_dim, const std::string& schema_id, double keep_weight);

/// Ranker weights plus optional pruner: the unit that training produces.
struct LearnedPolicy {
  RankerParams ranker;
  std::optional<PrunerParams> pruner;
};

/// Policy adapter over a LearnedPolicy. Normalizes inputs per query batch,
/// checks the schema, and answers pop-time prune queries when a pruner is
/// attached (tie probability 0.5 keeps the node).
class RankerPolicy final : public Policy {
 public:
  explicit RankerPolicy(LearnedPolicy learned);

  double score(const FeatureVector& raw, const NormalizationContext& ctx) const override;
  bool prune(const FeatureVector& raw, const NormalizationContext& ctx) const override;
  bool has_pruner() const override { return learned_.pruner.has_value(); }
  std::string tag() const override;

  const LearnedPolicy& learned() const { return learned_; }

 private:
  LearnedPolicy learned_;
};

/// SMILe-style stochastic mixture: one component is sampled per roll-out
/// (coherent traces), never per decision.
struct MixturePolicy {
  std::vector<LearnedPolicy> components;
  std::vector<double> weights;

  /// Component index for a uniform draw in [0, 1).
  std::size_t pick(double u01) const;
};

// --- model files ------------------------------------------------------------
// Versioned text format; doubles are written with 17 significant digits so a
// save/load round trip reproduces bit-identical scores.

enum class PolicyKind { ranker, mixture, maze_expert, bnb_best_bound };

struct PolicyArtifact {
  PolicyKind kind = PolicyKind::ranker;
  LearnedPolicy learned;    // kind == ranker
  MixturePolicy mixture;    // kind == mixture
};

std::string write_policy_text(const PolicyArtifact& artifact);
PolicyArtifact parse_policy_text(const std::string& text);
void save_policy(const std::string& path, const PolicyArtifact& artifact);
PolicyArtifact load_policy(const std::string& path);

}  // namespace retro
