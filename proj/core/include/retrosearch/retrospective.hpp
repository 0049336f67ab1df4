#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "retrosearch/feature.hpp"
#include "retrosearch/search.hpp"
#include "retrosearch/search_tree.hpp"

namespace retro {

/// Shortest-in-hindsight root-to-terminal path recovered from a finished
/// trace by walking parent pointers. In a tree this is the unique path to the
/// chosen terminal; "optimal in hindsight" means no shorter route to that
/// terminal existed within the explored tree.
struct RetroTrace {
  std::vector<NodeId> path;  // path.front() == 0 (root), path.back() == terminal
  NodeId terminal = 0;
  std::string source_instance_id;
};

/// One ranking query: the retro-optimal node at a decision step, preferred
/// over every other node that was open at that step. Features are stored
/// already query-normalized over that step's frontier.
struct LabeledExample {
  FeatureVector context;                 // the preferred node
  std::vector<FeatureVector> negatives;  // the rest of the frontier
  std::string instance_id;
  std::uint64_t decision_step = 0;
};

/// Pop-time keep/prune label: nodes on the retro path are worth branching on,
/// expanded off-path nodes were wasted work.
struct PruneExample {
  FeatureVector features;  // normalized over the decision step's frontier
  bool keep = false;
  std::string instance_id;
  std::uint64_t decision_step = 0;
};

struct Dataset {
  std::vector<LabeledExample> examples;
  std::vector<PruneExample> prune_examples;
  std::string schema_id;
  int iteration = 0;
  int problem_size = 0;

  bool empty() const { return examples.empty() && prune_examples.empty(); }

  void merge(Dataset&& other) {
    if (schema_id.empty()) schema_id = other.schema_id;
    std::move(other.examples.begin(), other.examples.end(), std::back_inserter(examples));
    std::move(other.prune_examples.begin(), other.prune_examples.end(),
              std::back_inserter(prune_examples));
  }
};

/// Walks parent pointers from `terminal` back to the root (Algorithm: the
/// retrospective oracle). Throws std::invalid_argument("unknown_terminal")
/// if the node is not one of the trace's terminals.
template <class State>
RetroTrace retrospective_oracle(const Trace<State>& trace, NodeId terminal) {
  const auto& terms = trace.tree.terminals();
  if (std::find(terms.begin(), terms.end(), terminal) == terms.end()) {
    throw std::invalid_argument("unknown_terminal");
  }
  RetroTrace retro;
  retro.terminal = terminal;
  retro.source_instance_id = trace.instance_id;
  NodeId cur = terminal;
  while (true) {
    retro.path.push_back(cur);
    const auto& parent = trace.tree.node(cur).parent;
    if (!parent) break;
    cur = *parent;
  }
  std::reverse(retro.path.begin(), retro.path.end());
  return retro;
}

/// Best terminal of a trace: smallest objective, ties to the smallest id.
/// Throws std::invalid_argument("no_terminal") on a terminal-free trace.
template <class State>
NodeId select_target_terminal(const Trace<State>& trace) {
  const auto& terms = trace.tree.terminals();
  if (terms.empty()) throw std::invalid_argument("no_terminal");
  NodeId best = terms.front();
  for (NodeId id : terms) {
    if (*trace.tree.node(id).objective < *trace.tree.node(best).objective) best = id;
  }
  return best;
}

namespace detail {

/// Chronological frontier reconstruction from the event log. Calls visit(
/// step, open_ids_before_pop, event) for every step. Uses only node flags
/// already in the tree, so no environment is needed.
template <class State, class Visit>
void scan_frontiers(const Trace<State>& trace, Visit&& visit) {
  std::vector<NodeId> open;
  if (trace.tree.empty()) return;
  if (!trace.tree.node(0).is_terminal) open.push_back(0);
  for (const TraceEvent& ev : trace.events) {
    visit(ev.step, open, ev);
    const auto it = std::find(open.begin(), open.end(), ev.popped);
    if (it == open.end()) throw std::logic_error("trace events pop a node that is not open");
    open.erase(it);
    for (NodeId cid : ev.children) {
      if (!trace.tree.node(cid).is_terminal) open.push_back(cid);
    }
  }
}

}  // namespace detail

struct DatasetOptions {
  bool pruner_labels = true;
  int iteration = 0;
  int problem_size = 0;
};

/// Relabels a finished trace against its retro path (DAgger-style: every
/// decision step at which the next retro node sat in the frontier yields one
/// example preferring it over the rest of the frontier, regardless of what
/// the roll-out actually popped). Features are normalized per step over that
/// step's frontier; pop-time keep/prune labels share the same batches.
template <class State>
Dataset make_dataset(const Trace<State>& trace, const RetroTrace& retro,
                     const DatasetOptions& opts = {}) {
  Dataset ds;
  ds.iteration = opts.iteration;
  ds.problem_size = opts.problem_size;
  if (!trace.tree.empty()) ds.schema_id = trace.tree.node(0).features.schema_id;

  std::vector<char> on_path(trace.tree.nodes().size(), 0);
  for (NodeId id : retro.path) on_path[id] = 1;

  std::size_t next_retro = 1;  // retro.path[0] is the root
  detail::scan_frontiers(trace, [&](std::uint64_t step, const std::vector<NodeId>& open,
                                    const TraceEvent& ev) {
    if (open.empty()) return;
    std::vector<const FeatureVector*> batch;
    batch.reserve(open.size());
    for (NodeId id : open) batch.push_back(&trace.tree.node(id).features);

    const bool want_rank = next_retro < retro.path.size() &&
                           !trace.tree.node(retro.path[next_retro]).is_terminal &&
                           std::find(open.begin(), open.end(), retro.path[next_retro]) != open.end() &&
                           open.size() >= 2;
    if (want_rank || opts.pruner_labels) {
      const NormalizationContext ctx = make_normalization_context(batch);
      if (want_rank) {
        LabeledExample ex;
        ex.instance_id = trace.instance_id;
        ex.decision_step = step;
        const NodeId target = retro.path[next_retro];
        ex.context = normalize(trace.tree.node(target).features, ctx);
        for (NodeId id : open) {
          if (id != target) ex.negatives.push_back(normalize(trace.tree.node(id).features, ctx));
        }
        ds.examples.push_back(std::move(ex));
      }
      if (opts.pruner_labels) {
        PruneExample pe;
        pe.instance_id = trace.instance_id;
        pe.decision_step = step;
        pe.keep = on_path[ev.popped] != 0;
        pe.features = normalize(trace.tree.node(ev.popped).features, ctx);
        ds.prune_examples.push_back(std::move(pe));
      }
    }
    if (next_retro < retro.path.size() && ev.popped == retro.path[next_retro]) ++next_retro;
  });
  return ds;
}

/// Fraction of retro decision points at which the policy's roll-out did not
/// take the retro-optimal action. Denominator per instance: path edges
/// (terminal depth). A path edge counts as a miss when the retro node's pop
/// did not immediately follow its parent's pop, i.e. the roll-out had the
/// node in hand and chose something else at least once. The root pop is
/// forced and the terminal edge is automatic (terminals are recorded during
/// the parent's expansion), so neither can miss.
struct ErrorRateReport {
  std::uint64_t disagreements = 0;
  std::uint64_t retro_actions = 0;
  std::size_t instances_measured = 0;
  std::size_t instances_excluded = 0;  // no terminal within budget
  std::vector<double> per_instance;

  double pooled() const {
    return retro_actions == 0 ? 0.0
                              : static_cast<double>(disagreements) / static_cast<double>(retro_actions);
  }
};

template <class State>
void accumulate_error_rate(const Trace<State>& trace, ErrorRateReport& report) {
  if (trace.tree.terminals().empty()) {
    ++report.instances_excluded;
    return;
  }
  const RetroTrace retro = retrospective_oracle(trace, select_target_terminal(trace));
  const std::size_t d = retro.path.size() - 1;
  std::unordered_map<NodeId, std::uint64_t> pop_step;
  pop_step.reserve(trace.events.size());
  for (const TraceEvent& ev : trace.events) pop_step[ev.popped] = ev.step;

  std::uint64_t miss = 0;
  for (std::size_t j = 1; j + 1 <= d; ++j) {
    if (trace.tree.node(retro.path[j]).is_terminal) break;
    const std::uint64_t t_prev = pop_step.at(retro.path[j - 1]);
    const std::uint64_t t_cur = pop_step.at(retro.path[j]);
    if (t_cur != t_prev + 1) ++miss;
  }
  report.disagreements += miss;
  report.retro_actions += d;
  report.per_instance.push_back(d == 0 ? 0.0 : static_cast<double>(miss) / static_cast<double>(d));
  ++report.instances_measured;
}

/// Rolls the policy out (no exploration) on each instance and pools the
/// disagreement counts. Instances that fail to reach a terminal within the
/// budget are excluded and counted.
template <SearchEnvironment Env>
ErrorRateReport measure_error_rate(const Env& env,
                                   const std::vector<typename Env::Instance>& instances,
                                   const std::vector<std::string>& ids, const Policy& policy,
                                   const SearchBudget& budget, std::uint64_t seed) {
  ErrorRateReport report;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto trace = run_search(env, instances[i], policy, budget, ExplorationConfig{},
                                  derive_seed(seed, 0x6572726f72ULL, i),
                                  i < ids.size() ? ids[i] : std::string{});
    accumulate_error_rate(trace, report);
  }
  return report;
}

/// Text dataset format: header (schema, dimension, provenance, counts), then
/// one line per record ("E ..." ranking example, "P ..." prune example),
/// doubles with 17 significant digits. Round-trips exactly.
std::string write_dataset_text(const Dataset& ds);
Dataset parse_dataset_text(const std::string& text);
void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

}  // namespace retro
