#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "retrosearch/policy.hpp"
#include "retrosearch/search_tree.hpp"

namespace retro {

/// Odd-sized grid maze. Rooms sit at odd coordinate pairs; the cells between
/// them are walls until generation carves passages. Perfect by construction:
/// the passable-cell graph is a tree, so there is exactly one simple path
/// between any two passable cells.
struct MazeInstance {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> walls;  // row-major, 1 = wall
  int start_row = 1, start_col = 1;
  int goal_row = 1, goal_col = 1;

  /// Out-of-bounds coordinates count as walls, so movement never needs a
  /// border check.
  bool wall(int r, int c) const {
    if (r < 0 || c < 0 || r >= height || c >= width) return true;
    return walls[static_cast<std::size_t>(r) * static_cast<std::size_t>(width) +
                 static_cast<std::size_t>(c)] != 0;
  }

  std::size_t passable_cells() const;
};

/// Randomized Kruskal over the room lattice: shuffle the candidate walls
/// between adjacent rooms, carve each one that joins two different components.
/// Start is the upper-left room (1,1), goal the lower-right (size-2, size-2).
/// Throws std::invalid_argument unless size is odd and >= 5.
MazeInstance kruskal_generate(int size, std::uint64_t seed);

/// Validates the perfect-maze invariants: start and goal distinct and
/// passable, passable graph connected and acyclic. Throws
/// std::invalid_argument with the violated property.
void validate_maze(const MazeInstance& maze);

struct MazeState {
  int row = 0;
  int col = 0;
  /// Cell this state was entered from; the root points at itself. Excluding
  /// it from the children is equivalent to "not yet enqueued" here: a second
  /// approach to any cell would close a cycle, and perfect mazes have none.
  int prev_row = 0;
  int prev_col = 0;
  int path_len = 0;
};

inline constexpr const char* kMazeSchema = "maze-v1";
/// Manhattan distance to goal, path length, 5x5 passability window, and the
/// straight-line progress made by the step that reached the cell.
inline constexpr int kMazeFeatureDim = 28;

class MazeEnv {
 public:
  using Instance = MazeInstance;
  using State = MazeState;

  State root_state(const Instance& inst) const;
  std::vector<State> children(const Instance& inst, const State& state,
                              const SearchTree<State>& tree) const;
  bool is_terminal(const Instance& inst, const State& state) const;
  std::optional<double> terminal_objective(const Instance& inst, const State& state) const;
  FeatureVector features(const Instance& inst, const SearchNode<State>& node,
                         const SearchTree<State>& tree) const;
  std::string schema() const { return kMazeSchema; }
};

/// A* with the Manhattan heuristic: score = -(path length + distance to
/// goal), so the best-first pop order is ascending f = g + h. Reads the raw
/// features; normalization does not apply to it.
class ManhattanExpertPolicy final : public Policy {
 public:
  double score(const FeatureVector& raw, const NormalizationContext& ctx) const override;
  std::string tag() const override { return "maze_expert"; }
};

/// Distinct cells the search committed work to: every expanded cell plus the
/// goal when it was reached (terminals are recorded without being popped).
std::size_t explored_squares(const Trace<MazeState>& trace);

// Text grid, one row per line: '#' wall, '.' passage, 'S' start, 'G' goal.
// parse validates the perfect-maze invariants and round-trips exactly.
std::string write_maze_text(const MazeInstance& maze);
MazeInstance parse_maze_text(const std::string& text);
void save_maze(const std::string& path, const MazeInstance& maze);
MazeInstance load_maze(const std::string& path);

}  // namespace retro
