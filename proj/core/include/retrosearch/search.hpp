#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "retrosearch/feature.hpp"
#include "retrosearch/policy.hpp"
#include "retrosearch/rng.hpp"
#include "retrosearch/search_tree.hpp"

namespace retro {

/// What an environment must provide to be searchable. Environments are
/// immutable: all run state (incumbent, frontier, counts) is derived from the
/// tree, which keeps roll-outs trivially parallel and replay deterministic.
template <class E>
concept SearchEnvironment =
    requires(const E& env, const typename E::Instance& inst, const typename E::State& state,
             const SearchTree<typename E::State>& tree, const SearchNode<typename E::State>& node) {
      { env.root_state(inst) } -> std::same_as<typename E::State>;
      { env.children(inst, state, tree) } -> std::same_as<std::vector<typename E::State>>;
      { env.is_terminal(inst, state) } -> std::same_as<bool>;
      { env.terminal_objective(inst, state) } -> std::same_as<std::optional<double>>;
      { env.features(inst, node, tree) } -> std::same_as<FeatureVector>;
      { env.schema() } -> std::same_as<std::string>;
    };

struct ExplorationConfig {
  /// Probability of popping a uniformly random open node instead of the best.
  double epsilon = 0.0;
  /// Variance of Gaussian noise added to scores at insertion.
  double noise_variance = 0.0;
  /// Keep searching after the first terminal (used by B&B training roll-outs,
  /// where later solutions can be better learning targets).
  bool multi_terminal = false;

  bool active() const { return epsilon > 0.0 || noise_variance > 0.0; }
};

/// Index into `open` of the pop winner: highest frozen score, ties to the
/// smallest insertion ordinal. open must be non-empty.
template <class State>
std::size_t pop_best_index(const SearchTree<State>& tree) {
  const auto& open = tree.open();
  if (open.empty()) throw std::invalid_argument("pop_best: empty frontier");
  std::size_t best = 0;
  for (std::size_t i = 1; i < open.size(); ++i) {
    // open is in insertion order, so a strict improvement is required and id
    // ties resolve to the earlier entry automatically.
    if (tree.node(open[i]).score_at_insertion > tree.node(open[best]).score_at_insertion) {
      best = i;
    }
  }
  return best;
}

template <class State>
NodeId pop_best(const SearchTree<State>& tree) {
  return tree.open()[pop_best_index(tree)];
}

namespace detail {

inline bool stop_satisfied(std::size_t terminal_count, const SearchBudget& budget) {
  switch (budget.stop_mode) {
    case StopMode::first_terminal: return terminal_count >= 1;
    case StopMode::k_terminals: return terminal_count >= budget.k;
    case StopMode::exhaust_budget: return false;
  }
  return false;
}

/// Creates the node, checks terminality, caches features. Shared by the live
/// search and by event replay so both produce identical trees.
template <SearchEnvironment Env>
NodeId insert_node(const Env& env, const typename Env::Instance& inst,
                   SearchTree<typename Env::State>& tree, std::optional<NodeId> parent,
                   typename Env::State state) {
  const bool terminal = env.is_terminal(inst, state);
  std::optional<double> objective;
  if (terminal) {
    objective = env.terminal_objective(inst, state);
    if (!objective) throw std::logic_error("environment: terminal state without objective");
  }
  NodeId id = parent ? tree.add_child(*parent, std::move(state), terminal, objective)
                     : tree.add_root(std::move(state), terminal, objective);
  auto& node = tree.node(id);
  node.features = env.features(inst, node, tree);
  return id;
}

template <class State>
NormalizationContext frontier_context(const SearchTree<State>& tree) {
  std::vector<const FeatureVector*> batch;
  batch.reserve(tree.open().size());
  for (NodeId id : tree.open()) batch.push_back(&tree.node(id).features);
  return make_normalization_context(batch);
}

}  // namespace detail

inline void validate_budget(const SearchBudget& budget) {
  if (budget.max_expansions < 1) {
    throw std::invalid_argument("SearchBudget: max_expansions must be >= 1");
  }
  if (budget.stop_mode == StopMode::k_terminals && budget.k < 1) {
    throw std::invalid_argument("SearchBudget: k must be >= 1");
  }
}

/// Best-first search under a fixed policy. Every output is a pure function of
/// (instance, policy, seed): exploration draws come from a generator seeded
/// here and nowhere else.
///
/// Each loop iteration pops one node (epsilon-greedy or score argmax), asks
/// the policy's pruner whether to branch, inserts the surviving children, and
/// scores the new children once against the current open frontier
/// (query-normalized). Scores are never revisited afterwards.
template <SearchEnvironment Env>
Trace<typename Env::State> run_search(const Env& env, const typename Env::Instance& inst,
                                      const Policy& policy, const SearchBudget& budget,
                                      const ExplorationConfig& explore, std::uint64_t seed,
                                      std::string instance_id = {}) {
  validate_budget(budget);
  Rng rng(seed);
  const double noise_sd = explore.noise_variance > 0.0 ? std::sqrt(explore.noise_variance) : 0.0;

  Trace<typename Env::State> trace;
  trace.instance_id = std::move(instance_id);
  trace.seed = seed;
  trace.policy_tag = policy.tag();
  auto& tree = trace.tree;

  detail::insert_node(env, inst, tree, std::nullopt, env.root_state(inst));
  bool stopped = detail::stop_satisfied(tree.terminals().size(), budget);
  if (!stopped && !tree.open().empty()) {
    const NormalizationContext ctx = detail::frontier_context(tree);
    auto& root = tree.node(0);
    root.score_at_insertion = policy.score(root.features, ctx);
    if (noise_sd > 0.0) root.score_at_insertion += rng.normal(0.0, noise_sd);
  }

  while (!stopped && !tree.open().empty() && tree.expansions() < budget.max_expansions) {
    std::size_t pick;
    if (explore.epsilon > 0.0 && rng.uniform01() < explore.epsilon) {
      pick = rng.uniform_index(tree.open().size());
    } else {
      pick = pop_best_index(tree);
    }
    const NodeId popped = tree.open()[pick];

    bool branch = true;
    if (policy.has_pruner()) {
      const NormalizationContext ctx = detail::frontier_context(tree);
      branch = !policy.prune(tree.node(popped).features, ctx);
    }

    tree.pop(popped);
    TraceEvent ev;
    ev.step = tree.expansions() - 1;
    ev.popped = popped;

    std::vector<NodeId> fresh;
    if (branch) {
      auto candidates = env.children(inst, tree.node(popped).state, tree);
      for (auto& child_state : candidates) {
        const NodeId cid = detail::insert_node(env, inst, tree, popped, std::move(child_state));
        ev.children.push_back(cid);
        if (!tree.node(cid).is_terminal) fresh.push_back(cid);
        if (detail::stop_satisfied(tree.terminals().size(), budget)) {
          stopped = true;
          break;
        }
      }
    }
    if (!fresh.empty() && !stopped) {
      const NormalizationContext ctx = detail::frontier_context(tree);
      for (NodeId id : fresh) {
        auto& node = tree.node(id);
        node.score_at_insertion = policy.score(node.features, ctx);
        if (noise_sd > 0.0) node.score_at_insertion += rng.normal(0.0, noise_sd);
      }
    }
    trace.events.push_back(std::move(ev));
  }
  return trace;
}

/// Rebuilds the tree a trace's event log describes. The environment resolves
/// child states (events only store ids, and children are always a prefix of
/// the candidate list in candidate order), so the reconstruction is exact:
/// describe_tree of the result matches the original byte for byte.
template <SearchEnvironment Env>
Trace<typename Env::State> replay(const Env& env, const typename Env::Instance& inst,
                                  const std::vector<TraceEvent>& events, std::string instance_id,
                                  std::uint64_t seed, std::string policy_tag) {
  Trace<typename Env::State> trace;
  trace.instance_id = std::move(instance_id);
  trace.seed = seed;
  trace.policy_tag = std::move(policy_tag);
  trace.events = events;
  auto& tree = trace.tree;

  detail::insert_node(env, inst, tree, std::nullopt, env.root_state(inst));
  for (const TraceEvent& ev : events) {
    if (ev.popped >= tree.nodes().size()) {
      throw std::invalid_argument("replay: event pops unknown node " + std::to_string(ev.popped));
    }
    tree.pop(ev.popped);
    if (ev.children.empty()) continue;
    auto candidates = env.children(inst, tree.node(ev.popped).state, tree);
    if (candidates.size() < ev.children.size()) {
      throw std::invalid_argument("replay: event lists more children than the environment yields");
    }
    for (std::size_t i = 0; i < ev.children.size(); ++i) {
      const NodeId cid = detail::insert_node(env, inst, tree, ev.popped, std::move(candidates[i]));
      if (cid != ev.children[i]) {
        throw std::invalid_argument("replay: child id mismatch at step " + std::to_string(ev.step));
      }
    }
  }
  return trace;
}

}  // namespace retro
