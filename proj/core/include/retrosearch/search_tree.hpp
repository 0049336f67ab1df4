#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "retrosearch/feature.hpp"

namespace retro {

/// Dense node ordinal: the root is 0 and ids are assigned in insertion order,
/// so a node's id doubles as its index and as the tie-break key.
using NodeId = std::uint64_t;

enum class StopMode { first_terminal, exhaust_budget, k_terminals };

struct SearchBudget {
  std::uint64_t max_expansions = 1;
  StopMode stop_mode = StopMode::first_terminal;
  std::uint64_t k = 1;  // used when stop_mode == k_terminals
};

template <class State>
struct SearchNode {
  NodeId id = 0;
  std::optional<NodeId> parent;
  std::uint32_t depth = 0;
  State state{};
  bool is_terminal = false;
  std::optional<double> objective;
  /// Raw features cached at insertion; replay and dataset labeling reuse them
  /// so a node is described by the tree exactly as the policy saw it.
  FeatureVector features;
  /// Frozen at insertion (stale-score queue): nodes are never rescored.
  double score_at_insertion = 0.0;
};

/// One pop-and-expand step: which node was popped and which children were
/// inserted, in insertion order. Steps are numbered from 0.
struct TraceEvent {
  std::uint64_t step = 0;
  NodeId popped = 0;
  std::vector<NodeId> children;
};

template <class State>
class SearchTree {
 public:
  const std::vector<SearchNode<State>>& nodes() const { return nodes_; }
  const SearchNode<State>& node(NodeId id) const { return nodes_.at(id); }
  SearchNode<State>& node(NodeId id) { return nodes_.at(id); }

  /// Open (inserted, not yet popped, non-terminal) node ids in insertion order.
  const std::vector<NodeId>& open() const { return open_; }
  const std::vector<NodeId>& terminals() const { return terminals_; }
  std::uint64_t expansions() const { return expansions_; }
  std::optional<double> best_objective() const { return best_objective_; }
  bool empty() const { return nodes_.empty(); }

  NodeId add_root(State state, bool is_terminal, std::optional<double> objective) {
    if (!nodes_.empty()) throw std::logic_error("SearchTree: root already present");
    return append(std::nullopt, 0, std::move(state), is_terminal, objective);
  }

  /// Parent must already be expanded; the search loop only ever inserts
  /// children of the node it just popped.
  NodeId add_child(NodeId parent, State state, bool is_terminal, std::optional<double> objective) {
    if (parent >= nodes_.size()) throw std::logic_error("SearchTree: unknown parent");
    if (!expanded_[parent]) throw std::logic_error("SearchTree: parent not yet expanded");
    return append(parent, nodes_[parent].depth + 1, std::move(state), is_terminal, objective);
  }

  /// Removes id from the open list and counts one expansion step. The root is
  /// popped like any other node.
  void pop(NodeId id) {
    for (std::size_t i = 0; i < open_.size(); ++i) {
      if (open_[i] == id) {
        open_.erase(open_.begin() + static_cast<std::ptrdiff_t>(i));
        expanded_[id] = true;
        ++expansions_;
        return;
      }
    }
    throw std::logic_error("SearchTree: pop of a node that is not open");
  }

  bool was_expanded(NodeId id) const { return expanded_.at(id); }

 private:
  NodeId append(std::optional<NodeId> parent, std::uint32_t depth, State state, bool is_terminal,
                std::optional<double> objective) {
    if (is_terminal && !objective) {
      throw std::logic_error("SearchTree: terminal node without objective");
    }
    if (!is_terminal && objective) {
      throw std::logic_error("SearchTree: objective on a non-terminal node");
    }
    SearchNode<State> n;
    n.id = static_cast<NodeId>(nodes_.size());
    n.parent = parent;
    n.depth = depth;
    n.state = std::move(state);
    n.is_terminal = is_terminal;
    n.objective = objective;
    nodes_.push_back(std::move(n));
    expanded_.push_back(false);
    if (is_terminal) {
      terminals_.push_back(nodes_.back().id);
      if (!best_objective_ || *objective < *best_objective_) best_objective_ = objective;
    } else {
      open_.push_back(nodes_.back().id);
    }
    return nodes_.back().id;
  }

  std::vector<SearchNode<State>> nodes_;
  std::vector<char> expanded_;
  std::vector<NodeId> open_;
  std::vector<NodeId> terminals_;
  std::uint64_t expansions_ = 0;
  std::optional<double> best_objective_;
};

/// A completed roll-out: the final tree plus the event log that rebuilds it.
template <class State>
struct Trace {
  SearchTree<State> tree;
  std::vector<TraceEvent> events;
  std::string instance_id;
  std::uint64_t seed = 0;
  std::string policy_tag;

  bool no_terminal_found() const { return tree.terminals().empty(); }
};

/// Structural dump used by the replay-determinism checks and for debugging.
/// Scores and features are search-time ephemera and are deliberately absent:
/// replay without the policy must reproduce these bytes exactly.
template <class State>
std::string describe_tree(const SearchTree<State>& tree) {
  std::string out;
  out += "nodes " + std::to_string(tree.nodes().size());
  out += " expansions " + std::to_string(tree.expansions());
  out += "\n";
  char buf[64];
  for (const auto& n : tree.nodes()) {
    out += std::to_string(n.id);
    out += n.parent ? " p" + std::to_string(*n.parent) : " root";
    out += " d" + std::to_string(n.depth);
    if (n.is_terminal) {
      std::snprintf(buf, sizeof buf, " terminal %.17g", *n.objective);
      out += buf;
    }
    out += "\n";
  }
  out += "open";
  for (NodeId id : tree.open()) out += " " + std::to_string(id);
  out += "\nterminals";
  for (NodeId id : tree.terminals()) out += " " + std::to_string(id);
  out += "\n";
  return out;
}

}  // namespace retro
