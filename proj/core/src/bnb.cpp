#include "retrosearch/bnb.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "retrosearch/errors.hpp"
#include "retrosearch/rng.hpp"

namespace retro {

Graph erdos_renyi(int n, double p, std::uint64_t seed) {
  if (n < 1 || p < 0.0 || p > 1.0) {
    throw std::invalid_argument("erdos_renyi: need n >= 1 and p in [0,1]");
  }
  Graph g;
  g.n = n;
  Rng rng(seed);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (rng.uniform01() < p) g.edges.emplace_back(u, v);
    }
  }
  return g;
}

IlpInstance mvc_ilp(const Graph& graph) {
  IlpInstance ilp;
  ilp.num_vars = graph.n;
  ilp.objective.assign(static_cast<std::size_t>(graph.n), 1.0);
  ilp.rows.reserve(graph.edges.size());
  for (const auto& [u, v] : graph.edges) {
    IlpRow row;
    row.coeffs = {{u, 1.0}, {v, 1.0}};
    row.rhs = 1.0;
    ilp.rows.push_back(std::move(row));
  }
  return ilp;
}

BnbInstance make_bnb_instance(Graph graph) {
  BnbInstance inst;
  inst.ilp = mvc_ilp(graph);
  inst.adj.assign(static_cast<std::size_t>(graph.n), {});
  for (const auto& [u, v] : graph.edges) {
    inst.adj[static_cast<std::size_t>(u)].push_back(v);
    inst.adj[static_cast<std::size_t>(v)].push_back(u);
  }
  inst.graph = std::move(graph);
  return inst;
}

namespace {

/// Solves the restricted LP and finishes the node: most-fractional branch
/// variable (ties to the lowest index) and the integrality flag. Empty when
/// the LP is infeasible.
std::optional<BnbState> make_node(const BnbInstance& inst, std::vector<std::int8_t> fixed) {
  LpSolution lp = simplex_solve(inst.ilp, fixed);
  if (lp.status != LpStatus::optimal) return std::nullopt;
  BnbState s;
  s.fixed = std::move(fixed);
  s.x = std::move(lp.x);
  s.lp_value = lp.value;
  s.branch_var = -1;
  double best_dist = 1.0;
  for (int v = 0; v < inst.ilp.num_vars; ++v) {
    const double xv = s.x[static_cast<std::size_t>(v)];
    if (std::abs(xv - std::round(xv)) <= kLpTol) continue;
    const double dist = std::abs(xv - 0.5);
    if (dist < best_dist) {
      best_dist = dist;
      s.branch_var = v;
    }
  }
  s.integral = s.branch_var < 0;
  return s;
}

}  // namespace

BnbEnv::State BnbEnv::root_state(const Instance& inst) const {
  auto s = make_node(inst, std::vector<std::int8_t>(static_cast<std::size_t>(inst.ilp.num_vars), -1));
  if (!s) throw std::invalid_argument("BnbEnv: root LP infeasible");
  return std::move(*s);
}

std::vector<BnbEnv::State> BnbEnv::children(const Instance& inst, const State& state,
                                            const SearchTree<State>& tree) const {
  std::vector<State> out;
  if (state.integral) return out;
  const std::optional<double> incumbent = tree.best_objective();

  for (int value = 0; value <= 1; ++value) {
    std::vector<std::int8_t> fixed = state.fixed;
    fixed[static_cast<std::size_t>(state.branch_var)] = static_cast<std::int8_t>(value);
    if (value == 0) {
      // A vertex out of the cover leaves each incident edge to its other
      // endpoint; two excluded endpoints would strand an edge.
      bool conflict = false;
      for (int w : inst.adj[static_cast<std::size_t>(state.branch_var)]) {
        if (fixed[static_cast<std::size_t>(w)] == 0) {
          conflict = true;
          break;
        }
        fixed[static_cast<std::size_t>(w)] = 1;
      }
      if (conflict) continue;
    }
    std::optional<State> child = make_node(inst, std::move(fixed));
    if (!child) continue;
    if (!child->integral && incumbent &&
        std::ceil(child->lp_value - kLpTol) >= *incumbent) {
      continue;
    }
    out.push_back(std::move(*child));
  }
  return out;
}

bool BnbEnv::is_terminal(const Instance& inst, const State& state) const {
  (void)inst;
  return state.integral;
}

std::optional<double> BnbEnv::terminal_objective(const Instance& inst, const State& state) const {
  (void)inst;
  return std::round(state.lp_value);
}

FeatureVector BnbEnv::features(const Instance& inst, const SearchNode<State>& node,
                               const SearchTree<State>& tree) const {
  FeatureVector fv;
  fv.schema_id = kBnbSchema;
  fv.values.reserve(kBnbFeatureDim);

  double lower = node.state.lp_value;
  for (NodeId id : tree.open()) lower = std::min(lower, tree.node(id).state.lp_value);
  // All vertices always cover, so n bounds the incumbent before one exists.
  const double upper =
      tree.best_objective() ? *tree.best_objective() : static_cast<double>(inst.graph.n);

  fv.values.push_back(node.state.lp_value);
  fv.values.push_back(node.state.lp_value);  // objective estimate: the LP objective itself
  fv.values.push_back(static_cast<double>(node.depth));
  fv.values.push_back(upper - lower);
  fv.values.push_back(static_cast<double>(tree.terminals().size()));
  fv.values.push_back(lower);
  fv.values.push_back(upper);
  fv.values.push_back(static_cast<double>(tree.open().size()));
  return fv;
}

double BestBoundPolicy::score(const FeatureVector& raw, const NormalizationContext& ctx) const {
  (void)ctx;
  return -raw.values[0];
}

BnbTreeStats bnb_stats(const SearchTree<BnbState>& tree) {
  BnbTreeStats stats;
  stats.incumbent = tree.best_objective();
  stats.solutions_found = tree.terminals().size();
  for (NodeId id : tree.open()) {
    const double b = tree.node(id).state.lp_value;
    if (!stats.lower_bound || b < *stats.lower_bound) stats.lower_bound = b;
  }
  stats.integrality_gap = stats.incumbent && stats.lower_bound
                              ? *stats.incumbent - *stats.lower_bound
                              : std::numeric_limits<double>::quiet_NaN();
  return stats;
}

int brute_force_mvc(const Graph& graph) {
  if (graph.n > 26) throw std::invalid_argument("brute_force_mvc: n > 26");
  std::vector<std::uint32_t> edge_masks;
  edge_masks.reserve(graph.edges.size());
  for (const auto& [u, v] : graph.edges) {
    edge_masks.push_back((1u << u) | (1u << v));
  }
  int best = graph.n;
  const std::uint32_t limit = (1u << graph.n) - 1u;
  for (std::uint32_t mask = 0; mask <= limit; ++mask) {
    if (std::popcount(mask) >= best) continue;
    bool covers = true;
    for (std::uint32_t em : edge_masks) {
      if ((mask & em) == 0) {
        covers = false;
        break;
      }
    }
    if (covers) best = std::popcount(mask);
  }
  return best;
}

namespace {

int greedy_matching(const std::vector<std::set<int>>& adj) {
  std::vector<char> used(adj.size(), 0);
  int matching = 0;
  for (std::size_t u = 0; u < adj.size(); ++u) {
    if (used[u]) continue;
    for (int v : adj[u]) {
      if (!used[static_cast<std::size_t>(v)]) {
        used[u] = used[static_cast<std::size_t>(v)] = 1;
        ++matching;
        break;
      }
    }
  }
  return matching;
}

void remove_vertex(std::vector<std::set<int>>& adj, int v) {
  for (int w : adj[static_cast<std::size_t>(v)]) adj[static_cast<std::size_t>(w)].erase(v);
  adj[static_cast<std::size_t>(v)].clear();
}

void mvc_branch(std::vector<std::set<int>> adj, int count, int& best) {
  // Degree-1 reduction: taking the pendant's neighbor is never worse.
  bool reduced = true;
  while (reduced) {
    reduced = false;
    for (std::size_t u = 0; u < adj.size(); ++u) {
      if (adj[u].size() == 1) {
        remove_vertex(adj, *adj[u].begin());
        ++count;
        reduced = true;
      }
    }
  }

  int max_deg = 0;
  int pick = -1;
  for (std::size_t u = 0; u < adj.size(); ++u) {
    if (static_cast<int>(adj[u].size()) > max_deg) {
      max_deg = static_cast<int>(adj[u].size());
      pick = static_cast<int>(u);
    }
  }
  if (pick < 0) {  // edge-free
    best = std::min(best, count);
    return;
  }
  if (count >= best || count + greedy_matching(adj) >= best) return;

  // Either pick joins the cover, or it stays out and all neighbors must.
  {
    auto branch = adj;
    remove_vertex(branch, pick);
    mvc_branch(std::move(branch), count + 1, best);
  }
  {
    const std::vector<int> nbrs(adj[static_cast<std::size_t>(pick)].begin(),
                                adj[static_cast<std::size_t>(pick)].end());
    for (int w : nbrs) remove_vertex(adj, w);
    mvc_branch(std::move(adj), count + static_cast<int>(nbrs.size()), best);
  }
}

}  // namespace

int exact_mvc(const Graph& graph) {
  std::vector<std::set<int>> adj(static_cast<std::size_t>(graph.n));
  for (const auto& [u, v] : graph.edges) {
    adj[static_cast<std::size_t>(u)].insert(v);
    adj[static_cast<std::size_t>(v)].insert(u);
  }
  int best = graph.n;
  mvc_branch(std::move(adj), 0, best);
  return best;
}

double optimality_gap(std::optional<double> found, double optimum) {
  if (optimum <= 0.0) throw std::invalid_argument("optimality_gap: optimum must be positive");
  if (!found) return 300.0;
  return 100.0 * (*found - optimum) / optimum;
}

std::string write_graph_text(const Graph& graph) {
  std::string out =
      std::to_string(graph.n) + " " + std::to_string(graph.edges.size()) + "\n";
  for (const auto& [u, v] : graph.edges) {
    out += std::to_string(u) + " " + std::to_string(v) + "\n";
  }
  return out;
}

Graph parse_graph_text(const std::string& text) {
  std::istringstream in(text);
  Graph g;
  std::size_t m = 0;
  if (!(in >> g.n >> m)) throw IoError("graph text: bad header, expected 'n m'");
  if (g.n < 1) throw IoError("graph text: n must be >= 1");
  std::set<std::pair<int, int>> seen;
  for (std::size_t i = 0; i < m; ++i) {
    int u = 0, v = 0;
    if (!(in >> u >> v)) throw IoError("graph text: fewer edges than the header claims");
    if (u == v || u < 0 || v < 0 || u >= g.n || v >= g.n) {
      throw IoError("graph text: invalid edge " + std::to_string(u) + " " + std::to_string(v));
    }
    if (u > v) std::swap(u, v);
    if (!seen.emplace(u, v).second) throw IoError("graph text: duplicate edge");
    g.edges.emplace_back(u, v);
  }
  int extra = 0;
  if (in >> extra) throw IoError("graph text: more edges than the header claims");
  return g;
}

void save_graph(const std::string& path, const Graph& graph) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << write_graph_text(graph);
  if (!out) throw IoError("write failed: " + path);
}

Graph load_graph(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_graph_text(buf.str());
}

}  // namespace retro
