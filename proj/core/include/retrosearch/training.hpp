#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "retrosearch/errors.hpp"
#include "retrosearch/parallel.hpp"
#include "retrosearch/policy.hpp"
#include "retrosearch/retrospective.hpp"
#include "retrosearch/search.hpp"

namespace retro {

struct LearnerConfig {
  double learning_rate = 0.01;
  int epochs = 30;
  int batch_size = 64;
  std::uint64_t seed = 0;
};

struct TrainReport {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> epoch_loss;  // mean loss after each epoch
  int best_epoch = 0;              // 0 = untrained initial parameters
  std::size_t pair_count = 0;
};

/// Plain SGD over all (preferred, negative) pairs of the dataset, shuffled
/// per epoch from the learner seed. Returns the end-of-epoch snapshot with
/// the lowest mean training loss (epoch 0 = the initial parameters), which
/// makes "final loss <= initial loss" hold by construction. Deterministic
/// given the seed. Throws on an example-free dataset or non-finite loss.
RankerParams train_ranker(const RankerParams& init, const Dataset& dataset,
                          const LearnerConfig& cfg, TrainReport* report = nullptr);

/// Same loop over the keep/prune records with the weighted logistic loss.
PrunerParams train_pruner(const PrunerParams& init, const Dataset& dataset,
                          const LearnerConfig& cfg, TrainReport* report = nullptr);

enum class PolicyClass { select_only, select_and_prune };

struct TrainConfig {
  int iterations = 3;       // N in the outer data-aggregation loop
  double mixing_alpha = 0.5;  // roll-out uses the bare policy w.p. alpha, else explores
  ExplorationConfig exploration;
  LearnerConfig learner;
  PolicyClass policy_class = PolicyClass::select_only;
  int hidden_dim = 32;
  double pruner_keep_weight = 5.0;
  SearchBudget rollout_budget;
  SearchBudget eval_budget;
  std::uint64_t seed = 0;
  int jobs = 1;
};

inline void validate_train_config(const TrainConfig& cfg) {
  if (cfg.iterations < 1) throw std::invalid_argument("TrainConfig: iterations must be >= 1");
  if (cfg.mixing_alpha < 0.0 || cfg.mixing_alpha > 1.0) {
    throw std::invalid_argument("TrainConfig: mixing_alpha must lie in [0, 1]");
  }
  validate_budget(cfg.rollout_budget);
  validate_budget(cfg.eval_budget);
}

/// An instance plus the bookkeeping the harness carries around with it.
/// `optimum` is the true objective when the generator could compute one
/// (B&B); NaN otherwise.
template <class Inst>
struct InstanceRecord {
  Inst instance;
  std::string id;
  double optimum = std::numeric_limits<double>::quiet_NaN();
};

struct IterationMetrics {
  int iteration = 0;  // 0 = the incoming policy, before any new data
  std::size_t dataset_size = 0;
  double validation_metric = 0.0;
  double error_rate = 0.0;
  bool skipped = false;  // no instance produced a terminal this iteration
};

struct DaggerResult {
  LearnedPolicy best_policy;
  int best_iteration = 0;
  std::vector<IterationMetrics> metrics;
  Dataset aggregated;  // final D, carried to the next curriculum size
};

struct SmileResult {
  MixturePolicy mixture;
  std::vector<IterationMetrics> metrics;
};

namespace detail {

/// Mean of an environment-specific per-trace metric over pure-policy
/// roll-outs (exploration off), instance-indexed seeds.
template <SearchEnvironment Env>
double mean_validation_metric(
    const Env& env, const std::vector<InstanceRecord<typename Env::Instance>>& records,
    const Policy& policy, const SearchBudget& budget, std::uint64_t seed, int jobs,
    const std::function<double(const InstanceRecord<typename Env::Instance>&,
                               const Trace<typename Env::State>&)>& metric,
    ErrorRateReport* error_report = nullptr) {
  std::vector<double> vals(records.size(), 0.0);
  std::vector<Trace<typename Env::State>> traces(records.size());
  parallel_for(jobs, records.size(), [&](std::size_t i) {
    traces[i] = run_search(env, records[i].instance, policy, budget, ExplorationConfig{},
                           derive_seed(seed, 0x76616cULL, i), records[i].id);
    vals[i] = metric(records[i], traces[i]);
  });
  double sum = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    sum += vals[i];
    if (error_report) accumulate_error_rate(traces[i], *error_report);
  }
  return records.empty() ? 0.0 : sum / static_cast<double>(records.size());
}

inline LearnedPolicy retrain(const Dataset& data, const std::string& schema, int input_dim,
                             const TrainConfig& cfg, std::uint64_t seed) {
  LearnedPolicy lp;
  LearnerConfig learner = cfg.learner;
  learner.seed = derive_seed(seed, 0x747261696eULL);
  lp.ranker = train_ranker(init_ranker(input_dim, cfg.hidden_dim, schema, learner.seed), data,
                           learner);
  if (cfg.policy_class == PolicyClass::select_and_prune && !data.prune_examples.empty()) {
    LearnerConfig plearner = cfg.learner;
    plearner.seed = derive_seed(seed, 0x7072756e65ULL);
    lp.pruner = train_pruner(init_pruner(input_dim, schema, cfg.pruner_keep_weight), data, plearner);
  }
  return lp;
}

}  // namespace detail

/// Data-aggregation imitation loop with retrospective relabeling.
///
/// Per iteration i = 1..N: roll the current policy out on every training
/// instance (with probability 1-alpha the roll-out explores), relabel each
/// terminal-bearing trace against its retro path, add the examples to D,
/// retrain from scratch on D, and score the new iterate on the validation
/// set. Returns the iterate with the best (lowest) validation metric,
/// including the incoming policy as iterate 0.
///
/// Iterations where no instance reaches a terminal are recorded as skipped;
/// if every iteration starves, throws TrainingStarved.
template <SearchEnvironment Env>
DaggerResult retro_dagger(
    const Env& env, const std::vector<InstanceRecord<typename Env::Instance>>& train_set,
    const std::vector<InstanceRecord<typename Env::Instance>>& validation_set,
    const LearnedPolicy& initial, Dataset aggregated, const TrainConfig& cfg,
    const std::function<double(const InstanceRecord<typename Env::Instance>&,
                               const Trace<typename Env::State>&)>& metric,
    std::vector<Dataset>* new_data_log = nullptr) {
  validate_train_config(cfg);
  using State = typename Env::State;

  DaggerResult result;
  std::vector<LearnedPolicy> iterates{initial};

  auto evaluate = [&](const LearnedPolicy& lp, int iteration, std::size_t dataset_size,
                      bool skipped) {
    RankerPolicy pol(lp);
    ErrorRateReport err;
    const double metric_mean =
        detail::mean_validation_metric(env, validation_set, pol, cfg.eval_budget,
                                       derive_seed(cfg.seed, 0x6576616cULL, iteration), cfg.jobs,
                                       metric, &err);
    result.metrics.push_back(
        IterationMetrics{iteration, dataset_size, metric_mean, err.pooled(), skipped});
  };

  evaluate(initial, 0, aggregated.examples.size(), false);

  SearchBudget rollout_budget = cfg.rollout_budget;
  if (cfg.exploration.multi_terminal) rollout_budget.stop_mode = StopMode::exhaust_budget;

  bool any_terminal_ever = false;
  for (int i = 1; i <= cfg.iterations; ++i) {
    const LearnedPolicy& current = iterates.back();
    RankerPolicy policy(current);
    std::vector<Trace<State>> traces(train_set.size());
    parallel_for(cfg.jobs, train_set.size(), [&](std::size_t j) {
      const std::uint64_t rollout_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i), j);
      ExplorationConfig explore = cfg.exploration;
      // Alg. 1 line 9 as a per-roll-out gate: bare policy w.p. alpha.
      Rng gate(derive_seed(rollout_seed, 0x67617465ULL));
      if (gate.uniform01() < cfg.mixing_alpha) explore = ExplorationConfig{};
      explore.multi_terminal = cfg.exploration.multi_terminal;
      traces[j] = run_search(env, train_set[j].instance, policy, rollout_budget, explore,
                             rollout_seed, train_set[j].id);
    });

    Dataset fresh;
    bool any_terminal = false;
    for (auto& trace : traces) {
      if (trace.tree.terminals().empty()) continue;
      any_terminal = true;
      const RetroTrace retro = retrospective_oracle(trace, select_target_terminal(trace));
      DatasetOptions opts;
      opts.pruner_labels = cfg.policy_class == PolicyClass::select_and_prune;
      opts.iteration = i;
      fresh.merge(make_dataset(trace, retro, opts));
    }
    if (new_data_log) new_data_log->push_back(fresh);

    if (!any_terminal) {
      result.metrics.push_back(IterationMetrics{i, aggregated.examples.size(),
                                                result.metrics.back().validation_metric,
                                                result.metrics.back().error_rate, true});
      iterates.push_back(current);
      continue;
    }
    any_terminal_ever = true;
    aggregated.merge(std::move(fresh));

    LearnedPolicy next = current;
    if (!aggregated.examples.empty()) {
      next = detail::retrain(aggregated, aggregated.schema_id,
                             static_cast<int>(aggregated.examples.front().context.dim()), cfg,
                             derive_seed(cfg.seed, 0x6974657261ULL, i));
    }
    iterates.push_back(next);
    evaluate(next, i, aggregated.examples.size(), false);
  }

  if (!any_terminal_ever) {
    throw TrainingStarved("retro_dagger: no training instance reached a terminal in any iteration");
  }

  std::size_t best = 0;
  for (std::size_t m = 1; m < result.metrics.size(); ++m) {
    if (result.metrics[m].skipped) continue;
    if (result.metrics[m].validation_metric < result.metrics[best].validation_metric) best = m;
  }
  result.best_iteration = result.metrics[best].iteration;
  result.best_policy = iterates[static_cast<std::size_t>(result.best_iteration)];
  result.aggregated = std::move(aggregated);
  return result;
}

/// Stochastic mixing variant: iteration i trains a fresh component on data
/// collected by the current mixture (one component sampled per roll-out) and
/// re-weights to
///   pi_{i+1} = (1-a)^i pi_1 + a * sum_{j=1..i} (1-a)^{j-1} pihat_j.
/// pi_1 may itself be a mixture (the previous curriculum size's result); its
/// components keep their relative weights inside the (1-a)^i share. Returns
/// the final mixture (weights sum to 1), not a validation argmin.
template <SearchEnvironment Env>
SmileResult retro_smile(
    const Env& env, const std::vector<InstanceRecord<typename Env::Instance>>& train_set,
    const std::vector<InstanceRecord<typename Env::Instance>>& validation_set,
    const MixturePolicy& initial, const TrainConfig& cfg,
    const std::function<double(const InstanceRecord<typename Env::Instance>&,
                               const Trace<typename Env::State>&)>& metric) {
  validate_train_config(cfg);
  using State = typename Env::State;
  const double alpha = cfg.mixing_alpha;

  SmileResult result;
  result.mixture = initial;
  const std::size_t base_count = initial.components.size();
  const std::vector<double> base_weights = initial.weights;

  auto evaluate_mixture = [&](int iteration, std::size_t dataset_size, bool skipped) {
    std::vector<double> vals(validation_set.size(), 0.0);
    std::vector<Trace<State>> traces(validation_set.size());
    parallel_for(cfg.jobs, validation_set.size(), [&](std::size_t j) {
      const std::uint64_t s = derive_seed(cfg.seed, 0x736d76616cULL + iteration, j);
      const std::size_t c = result.mixture.pick(Rng(derive_seed(s, 0x636f6d70ULL)).uniform01());
      RankerPolicy pol(result.mixture.components[c]);
      traces[j] = run_search(env, validation_set[j].instance, pol, cfg.eval_budget,
                             ExplorationConfig{}, s, validation_set[j].id);
      vals[j] = metric(validation_set[j], traces[j]);
    });
    ErrorRateReport err;
    double sum = 0.0;
    for (std::size_t j = 0; j < vals.size(); ++j) {
      sum += vals[j];
      accumulate_error_rate(traces[j], err);
    }
    result.metrics.push_back(IterationMetrics{
        iteration, dataset_size,
        validation_set.empty() ? 0.0 : sum / static_cast<double>(validation_set.size()),
        err.pooled(), skipped});
  };

  evaluate_mixture(0, 0, false);

  SearchBudget rollout_budget = cfg.rollout_budget;
  if (cfg.exploration.multi_terminal) rollout_budget.stop_mode = StopMode::exhaust_budget;

  bool any_terminal_ever = false;
  for (int i = 1; i <= cfg.iterations; ++i) {
    std::vector<Trace<State>> traces(train_set.size());
    parallel_for(cfg.jobs, train_set.size(), [&](std::size_t j) {
      const std::uint64_t rollout_seed = derive_seed(cfg.seed, 0x736d696cULL + i, j);
      const std::size_t c =
          result.mixture.pick(Rng(derive_seed(rollout_seed, 0x636f6d70ULL)).uniform01());
      RankerPolicy pol(result.mixture.components[c]);
      traces[j] = run_search(env, train_set[j].instance, pol, rollout_budget, cfg.exploration,
                             rollout_seed, train_set[j].id);
    });

    Dataset fresh;  // SMILe trains each component on this iteration's data only
    bool any_terminal = false;
    for (auto& trace : traces) {
      if (trace.tree.terminals().empty()) continue;
      any_terminal = true;
      const RetroTrace retro = retrospective_oracle(trace, select_target_terminal(trace));
      DatasetOptions opts;
      opts.pruner_labels = cfg.policy_class == PolicyClass::select_and_prune;
      opts.iteration = i;
      fresh.merge(make_dataset(trace, retro, opts));
    }

    if (!any_terminal || fresh.examples.empty()) {
      result.metrics.push_back(IterationMetrics{i, 0, result.metrics.back().validation_metric,
                                                result.metrics.back().error_rate, true});
      if (any_terminal) any_terminal_ever = true;
      continue;
    }
    any_terminal_ever = true;

    const LearnedPolicy component =
        detail::retrain(fresh, fresh.schema_id,
                        static_cast<int>(fresh.examples.front().context.dim()), cfg,
                        derive_seed(cfg.seed, 0x736d696c74ULL, i));
    result.mixture.components.push_back(component);
    const int trained = static_cast<int>(result.mixture.components.size() - base_count);
    result.mixture.weights.assign(result.mixture.components.size(), 0.0);
    const double base_share = std::pow(1.0 - alpha, trained);
    for (std::size_t k = 0; k < base_count; ++k) {
      result.mixture.weights[k] = base_weights[k] * base_share;
    }
    for (int j = 1; j <= trained; ++j) {
      result.mixture.weights[base_count + static_cast<std::size_t>(j) - 1] =
          alpha * std::pow(1.0 - alpha, j - 1);
    }
    evaluate_mixture(i, fresh.examples.size(), false);
  }

  if (!any_terminal_ever) {
    throw TrainingStarved("retro_smile: no training instance reached a terminal in any iteration");
  }
  return result;
}

/// One curriculum stage: instances of one problem size.
template <class Inst>
struct CurriculumStage {
  int size = 0;
  std::vector<InstanceRecord<Inst>> train;
  std::vector<InstanceRecord<Inst>> validation;
};

enum class ScaleMode { dagger, smile };

struct StageArtifact {
  int size = 0;
  PolicyArtifact policy;
  std::vector<IterationMetrics> metrics;
};

struct ScaleUpResult {
  std::vector<StageArtifact> stages;
  Dataset aggregated;
};

/// Curriculum driver: the previous size's policy seeds the roll-outs at the
/// next size, so no expert data is needed beyond whatever trained the base
/// policy. The dagger variant also carries the aggregated dataset forward.
template <SearchEnvironment Env>
ScaleUpResult scale_up(
    const Env& env, const std::vector<CurriculumStage<typename Env::Instance>>& stages,
    const PolicyArtifact& base, Dataset base_data, const TrainConfig& base_cfg, ScaleMode mode,
    const std::function<double(const InstanceRecord<typename Env::Instance>&,
                               const Trace<typename Env::State>&)>& metric) {
  ScaleUpResult result;
  PolicyArtifact current = base;
  Dataset aggregated = std::move(base_data);
  for (std::size_t s = 0; s < stages.size(); ++s) {
    TrainConfig cfg = base_cfg;
    cfg.seed = derive_seed(base_cfg.seed, 0x7363616c65ULL, static_cast<std::uint64_t>(stages[s].size));
    StageArtifact artifact;
    artifact.size = stages[s].size;
    if (mode == ScaleMode::dagger) {
      if (current.kind != PolicyKind::ranker) {
        throw std::invalid_argument("scale_up: dagger mode needs a ranker policy");
      }
      DaggerResult r = retro_dagger(env, stages[s].train, stages[s].validation, current.learned,
                                    std::move(aggregated), cfg, metric);
      aggregated = std::move(r.aggregated);
      current.learned = r.best_policy;
      artifact.policy = current;
      artifact.metrics = std::move(r.metrics);
    } else {
      MixturePolicy initial;
      if (current.kind == PolicyKind::mixture) {
        initial = current.mixture;
      } else if (current.kind == PolicyKind::ranker) {
        initial.components = {current.learned};
        initial.weights = {1.0};
      } else {
        throw std::invalid_argument("scale_up: smile mode needs a learned policy");
      }
      SmileResult r = retro_smile(env, stages[s].train, stages[s].validation, initial, cfg, metric);
      current.kind = PolicyKind::mixture;
      current.mixture = r.mixture;
      artifact.policy = current;
      artifact.metrics = std::move(r.metrics);
    }
    result.stages.push_back(std::move(artifact));
  }
  result.aggregated = std::move(aggregated);
  return result;
}

}  // namespace retro
