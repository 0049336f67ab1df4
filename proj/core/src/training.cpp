#include "retrosearch/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace retro {

namespace {

// A (preferred, negative) pair, by pointer into the dataset.
struct RankPair {
  const std::vector<double>* pref;
  const std::vector<double>* neg;
};

std::vector<RankPair> collect_pairs(const Dataset& dataset) {
  std::vector<RankPair> pairs;
  for (const LabeledExample& ex : dataset.examples) {
    for (const FeatureVector& neg : ex.negatives) {
      pairs.push_back(RankPair{&ex.context.values, &neg.values});
    }
  }
  return pairs;
}

double mean_pair_loss(const RankerParams& p, const std::vector<RankPair>& pairs) {
  double sum = 0.0;
  for (const RankPair& pr : pairs) {
    sum += pairwise_loss(ranker_score(p, *pr.pref), ranker_score(p, *pr.neg));
  }
  return sum / static_cast<double>(pairs.size());
}

void check_finite(double loss, const char* fn, int epoch) {
  if (std::isfinite(loss)) return;
  char msg[128];
  std::snprintf(msg, sizeof msg, "%s: loss became %g at epoch %d (diverged)", fn, loss, epoch);
  throw std::runtime_error(msg);
}

void step_ranker(RankerParams& p, const std::vector<double>& grad, double scale) {
  std::size_t k = 0;
  for (double& v : p.w1) v -= scale * grad[k++];
  for (double& v : p.b1) v -= scale * grad[k++];
  for (double& v : p.w2) v -= scale * grad[k++];
  p.b2 -= scale * grad[k];
}

std::size_t clamp_batch(int batch_size) {
  return batch_size < 1 ? 1 : static_cast<std::size_t>(batch_size);
}

}  // namespace

RankerParams train_ranker(const RankerParams& init, const Dataset& dataset,
                          const LearnerConfig& cfg, TrainReport* report) {
  if (dataset.examples.empty()) {
    throw std::invalid_argument("train_ranker: dataset has no ranking examples");
  }
  if (!dataset.schema_id.empty() && dataset.schema_id != init.schema_id) {
    throw std::invalid_argument("train_ranker: dataset schema '" + dataset.schema_id +
                                "' does not match model schema '" + init.schema_id + "'");
  }
  const std::vector<RankPair> pairs = collect_pairs(dataset);
  if (pairs.empty()) {
    throw std::invalid_argument("train_ranker: every example has an empty negative set");
  }

  RankerParams current = init;
  RankerParams best = init;
  double best_loss = mean_pair_loss(current, pairs);
  check_finite(best_loss, "train_ranker", 0);
  int best_epoch = 0;
  if (report) {
    *report = TrainReport{};
    report->initial_loss = best_loss;
    report->pair_count = pairs.size();
  }

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(current.parameter_count());
  const std::size_t batch = clamp_batch(cfg.batch_size);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t at = 0; at < order.size(); at += batch) {
      const std::size_t end = std::min(order.size(), at + batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = at; k < end; ++k) {
        const RankPair& pr = pairs[order[k]];
        pairwise_loss_grad(current, *pr.pref, *pr.neg, grad);
      }
      step_ranker(current, grad, cfg.learning_rate / static_cast<double>(end - at));
    }
    const double loss = mean_pair_loss(current, pairs);
    check_finite(loss, "train_ranker", epoch);
    if (report) report->epoch_loss.push_back(loss);
    if (loss < best_loss) {
      best_loss = loss;
      best = current;
      best_epoch = epoch;
    }
  }

  if (report) {
    report->final_loss = best_loss;
    report->best_epoch = best_epoch;
  }
  return best;
}

PrunerParams train_pruner(const PrunerParams& init, const Dataset& dataset,
                          const LearnerConfig& cfg, TrainReport* report) {
  const std::vector<PruneExample>& examples = dataset.prune_examples;
  if (examples.empty()) {
    throw std::invalid_argument("train_pruner: dataset has no keep/prune records");
  }
  if (!dataset.schema_id.empty() && dataset.schema_id != init.schema_id) {
    throw std::invalid_argument("train_pruner: dataset schema '" + dataset.schema_id +
                                "' does not match model schema '" + init.schema_id + "'");
  }

  // pruner_loss_grad is the single source of the loss value; the evaluation
  // pass just discards the gradient.
  std::vector<double> scratch(static_cast<std::size_t>(init.input_dim) + 1);
  auto mean_loss = [&](const PrunerParams& p) {
    double sum = 0.0;
    for (const PruneExample& ex : examples) {
      sum += pruner_loss_grad(p, ex.features.values, ex.keep, scratch);
    }
    return sum / static_cast<double>(examples.size());
  };

  PrunerParams current = init;
  PrunerParams best = init;
  double best_loss = mean_loss(current);
  check_finite(best_loss, "train_pruner", 0);
  int best_epoch = 0;
  if (report) {
    *report = TrainReport{};
    report->initial_loss = best_loss;
    report->pair_count = examples.size();
  }

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(static_cast<std::size_t>(init.input_dim) + 1);
  const std::size_t batch = clamp_batch(cfg.batch_size);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t at = 0; at < order.size(); at += batch) {
      const std::size_t end = std::min(order.size(), at + batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = at; k < end; ++k) {
        const PruneExample& ex = examples[order[k]];
        pruner_loss_grad(current, ex.features.values, ex.keep, grad);
      }
      const double scale = cfg.learning_rate / static_cast<double>(end - at);
      for (int d = 0; d < current.input_dim; ++d) {
        current.w[static_cast<std::size_t>(d)] -= scale * grad[static_cast<std::size_t>(d)];
      }
      current.b -= scale * grad[static_cast<std::size_t>(current.input_dim)];
    }
    const double loss = mean_loss(current);
    check_finite(loss, "train_pruner", epoch);
    if (report) report->epoch_loss.push_back(loss);
    if (loss < best_loss) {
      best_loss = loss;
      best = current;
      best_epoch = epoch;
    }
  }

  if (report) {
    report->final_loss = best_loss;
    report->best_epoch = best_epoch;
  }
  return best;
}

}  // namespace retro
