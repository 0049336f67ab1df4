#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "retrosearch/policy.hpp"
#include "retrosearch/search_tree.hpp"
#include "retrosearch/simplex.hpp"

namespace retro {

/// Simple undirected graph; edges normalized to u < v, no self-loops or
/// duplicates.
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
};

/// Each pair independently with probability p, deterministic per seed.
Graph erdos_renyi(int n, double p, std::uint64_t seed);

/// Minimum vertex cover as a binary program: minimize sum x_v subject to
/// x_u + x_v >= 1 per edge.
IlpInstance mvc_ilp(const Graph& graph);

/// Graph, its ILP compilation, and adjacency lists (used by the zero-fix
/// propagation in branching). Immutable once built.
struct BnbInstance {
  Graph graph;
  IlpInstance ilp;
  std::vector<std::vector<int>> adj;
};

BnbInstance make_bnb_instance(Graph graph);

/// A branch-and-bound node: a partial assignment plus its LP relaxation.
/// Only feasible assignments become states; infeasible children are never
/// created (a conflict in propagation or an infeasible LP drops the child).
struct BnbState {
  std::vector<std::int8_t> fixed;  // -1 free, else the pinned value
  std::vector<double> x;           // LP-relaxation solution (full length)
  double lp_value = 0.0;
  bool integral = false;
  int branch_var = -1;  // most-fractional variable; -1 when integral
};

inline constexpr const char* kBnbSchema = "bnb-v1";
/// LP bound, objective estimate, depth, integrality gap, solutions found,
/// global lower bound, global upper bound, frontier size.
inline constexpr int kBnbFeatureDim = 8;

class BnbEnv {
 public:
  using Instance = BnbInstance;
  using State = BnbState;

  State root_state(const Instance& inst) const;

  /// 0 or up to 2 children. Branches the most-fractional variable (ties to
  /// the lowest index) to 0 then 1. Fixing a vertex out of the cover forces
  /// every neighbor in (an uncovered edge otherwise); a forced conflict or an
  /// infeasible child LP drops that child. Non-terminal children whose
  /// integer-rounded bound cannot beat the incumbent are bound-pruned.
  std::vector<State> children(const Instance& inst, const State& state,
                              const SearchTree<State>& tree) const;

  bool is_terminal(const Instance& inst, const State& state) const;
  std::optional<double> terminal_objective(const Instance& inst, const State& state) const;
  FeatureVector features(const Instance& inst, const SearchNode<State>& node,
                         const SearchTree<State>& tree) const;
  std::string schema() const { return kBnbSchema; }
};

/// Classic best-bound node selection: pop the open node with the smallest LP
/// relaxation value. The unlearned baseline and the base-size expert.
class BestBoundPolicy final : public Policy {
 public:
  double score(const FeatureVector& raw, const NormalizationContext& ctx) const override;
  std::string tag() const override { return "bnb_best_bound"; }
};

/// Aggregates §"global" run statistics from a finished (or running) tree.
struct BnbTreeStats {
  std::optional<double> incumbent;    // best terminal objective
  std::optional<double> lower_bound;  // min LP bound over the open frontier
  std::size_t solutions_found = 0;
  /// incumbent - lower_bound when both exist, else NaN.
  double integrality_gap = 0.0;
};

BnbTreeStats bnb_stats(const SearchTree<BnbState>& tree);

/// Exhaustive subset scan with popcount pruning; throws for n > 26.
int brute_force_mvc(const Graph& graph);

/// Exact minimum vertex cover via branching with degree-1 reduction and a
/// matching lower bound. Handles the generator's sparse graphs well past the
/// subset-scan limit; cross-checked against brute_force_mvc in tests.
int exact_mvc(const Graph& graph);

/// 100 * (found - optimum) / optimum; no feasible solution found -> exactly
/// 300. Requires optimum > 0.
double optimality_gap(std::optional<double> found, double optimum);

// Graph file: first line "n m", then one "u v" line per edge.
std::string write_graph_text(const Graph& graph);
Graph parse_graph_text(const std::string& text);
void save_graph(const std::string& path, const Graph& graph);
Graph load_graph(const std::string& path);

}  // namespace retro
