#include "retrosearch/maze.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "retrosearch/errors.hpp"
#include "retrosearch/rng.hpp"

namespace retro {

namespace {

struct UnionFind {
  std::vector<int> parent;
  std::vector<int> size;

  explicit UnionFind(int n) : parent(n), size(n, 1) {
    for (int i = 0; i < n; ++i) parent[i] = i;
  }

  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }

  /// False when x and y were already connected.
  bool unite(int x, int y) {
    int rx = find(x), ry = find(y);
    if (rx == ry) return false;
    if (size[rx] < size[ry]) std::swap(rx, ry);
    parent[ry] = rx;
    size[rx] += size[ry];
    return true;
  }
};

std::size_t cell_index(const MazeInstance& maze, int r, int c) {
  return static_cast<std::size_t>(r) * static_cast<std::size_t>(maze.width) +
         static_cast<std::size_t>(c);
}

}  // namespace

std::size_t MazeInstance::passable_cells() const {
  std::size_t n = 0;
  for (std::uint8_t w : walls) n += w == 0;
  return n;
}

MazeInstance kruskal_generate(int size, std::uint64_t seed) {
  if (size < 5 || size % 2 == 0) {
    throw std::invalid_argument("kruskal_generate: size must be odd and >= 5");
  }
  MazeInstance maze;
  maze.width = size;
  maze.height = size;
  maze.walls.assign(static_cast<std::size_t>(size) * static_cast<std::size_t>(size), 1);
  maze.start_row = maze.start_col = 1;
  maze.goal_row = maze.goal_col = size - 2;

  for (int r = 1; r < size; r += 2) {
    for (int c = 1; c < size; c += 2) maze.walls[cell_index(maze, r, c)] = 0;
  }

  // Candidate walls between horizontally and vertically adjacent rooms,
  // stored as their midpoints.
  struct Edge {
    int wall_r, wall_c;
    int room_a, room_b;
  };
  const int rooms_per_side = (size - 1) / 2;
  auto room_id = [rooms_per_side](int r, int c) {
    return ((r - 1) / 2) * rooms_per_side + (c - 1) / 2;
  };
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(2 * rooms_per_side * (rooms_per_side - 1)));
  for (int r = 1; r < size; r += 2) {
    for (int c = 1; c < size; c += 2) {
      if (c + 2 < size) edges.push_back(Edge{r, c + 1, room_id(r, c), room_id(r, c + 2)});
      if (r + 2 < size) edges.push_back(Edge{r + 1, c, room_id(r, c), room_id(r + 2, c)});
    }
  }

  Rng rng(seed);
  rng.shuffle(edges);
  UnionFind uf(rooms_per_side * rooms_per_side);
  for (const Edge& e : edges) {
    if (uf.unite(e.room_a, e.room_b)) maze.walls[cell_index(maze, e.wall_r, e.wall_c)] = 0;
  }
  return maze;
}

void validate_maze(const MazeInstance& maze) {
  if (maze.width < 3 || maze.height < 3 || maze.width % 2 == 0 || maze.height % 2 == 0) {
    throw std::invalid_argument("maze: dimensions must be odd and >= 3");
  }
  if (maze.walls.size() !=
      static_cast<std::size_t>(maze.width) * static_cast<std::size_t>(maze.height)) {
    throw std::invalid_argument("maze: wall grid does not match dimensions");
  }
  if (maze.start_row == maze.goal_row && maze.start_col == maze.goal_col) {
    throw std::invalid_argument("maze: start equals goal");
  }
  if (maze.wall(maze.start_row, maze.start_col)) {
    throw std::invalid_argument("maze: start is not passable");
  }
  if (maze.wall(maze.goal_row, maze.goal_col)) {
    throw std::invalid_argument("maze: goal is not passable");
  }

  // Perfectness: the passable graph is connected and acyclic. Each passable
  // cell unions with its right and down passable neighbors; a rejected union
  // is a cycle, and at the end every cell must share the start's root.
  const int n = maze.width * maze.height;
  UnionFind uf(n);
  for (int r = 0; r < maze.height; ++r) {
    for (int c = 0; c < maze.width; ++c) {
      if (maze.wall(r, c)) continue;
      if (!maze.wall(r, c + 1) && !uf.unite(r * maze.width + c, r * maze.width + c + 1)) {
        throw std::invalid_argument("maze: passage graph has a cycle");
      }
      if (!maze.wall(r + 1, c) && !uf.unite(r * maze.width + c, (r + 1) * maze.width + c)) {
        throw std::invalid_argument("maze: passage graph has a cycle");
      }
    }
  }
  const int start_root = uf.find(maze.start_row * maze.width + maze.start_col);
  for (int r = 0; r < maze.height; ++r) {
    for (int c = 0; c < maze.width; ++c) {
      if (!maze.wall(r, c) && uf.find(r * maze.width + c) != start_root) {
        throw std::invalid_argument("maze: passage graph is disconnected");
      }
    }
  }
}

MazeEnv::State MazeEnv::root_state(const Instance& inst) const {
  return MazeState{inst.start_row, inst.start_col, inst.start_row, inst.start_col, 0};
}

std::vector<MazeEnv::State> MazeEnv::children(const Instance& inst, const State& state,
                                              const SearchTree<State>& tree) const {
  (void)tree;
  static constexpr int kDirs[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  std::vector<State> out;
  for (const auto& d : kDirs) {
    const int nr = state.row + d[0];
    const int nc = state.col + d[1];
    if (inst.wall(nr, nc)) continue;
    if (nr == state.prev_row && nc == state.prev_col) continue;
    out.push_back(MazeState{nr, nc, state.row, state.col, state.path_len + 1});
  }
  return out;
}

bool MazeEnv::is_terminal(const Instance& inst, const State& state) const {
  return state.row == inst.goal_row && state.col == inst.goal_col;
}

std::optional<double> MazeEnv::terminal_objective(const Instance& inst, const State& state) const {
  (void)inst;
  return static_cast<double>(state.path_len);
}

FeatureVector MazeEnv::features(const Instance& inst, const SearchNode<State>& node,
                                const SearchTree<State>& tree) const {
  (void)tree;
  const MazeState& s = node.state;
  FeatureVector fv;
  fv.schema_id = kMazeSchema;
  fv.values.reserve(kMazeFeatureDim);
  fv.values.push_back(static_cast<double>(std::abs(s.row - inst.goal_row) +
                                          std::abs(s.col - inst.goal_col)));
  fv.values.push_back(static_cast<double>(s.path_len));
  for (int dr = -2; dr <= 2; ++dr) {
    for (int dc = -2; dc <= 2; ++dc) {
      fv.values.push_back(inst.wall(s.row + dr, s.col + dc) ? 1.0 : 0.0);
    }
  }
  const double d_here = std::hypot(s.row - inst.goal_row, s.col - inst.goal_col);
  const double d_prev = std::hypot(s.prev_row - inst.goal_row, s.prev_col - inst.goal_col);
  fv.values.push_back(d_prev - d_here);
  return fv;
}

double ManhattanExpertPolicy::score(const FeatureVector& raw,
                                    const NormalizationContext& ctx) const {
  (void)ctx;
  return -(raw.values[0] + raw.values[1]);
}

std::size_t explored_squares(const Trace<MazeState>& trace) {
  std::unordered_set<std::uint64_t> cells;
  for (const auto& n : trace.tree.nodes()) {
    if (!trace.tree.was_expanded(n.id) && !n.is_terminal) continue;
    cells.insert((static_cast<std::uint64_t>(static_cast<std::uint32_t>(n.state.row)) << 32) |
                 static_cast<std::uint32_t>(n.state.col));
  }
  return cells.size();
}

std::string write_maze_text(const MazeInstance& maze) {
  std::string out;
  out.reserve(static_cast<std::size_t>(maze.height) * (static_cast<std::size_t>(maze.width) + 1));
  for (int r = 0; r < maze.height; ++r) {
    for (int c = 0; c < maze.width; ++c) {
      char ch = maze.wall(r, c) ? '#' : '.';
      if (r == maze.start_row && c == maze.start_col) ch = 'S';
      if (r == maze.goal_row && c == maze.goal_col) ch = 'G';
      out += ch;
    }
    out += '\n';
  }
  return out;
}

MazeInstance parse_maze_text(const std::string& text) {
  std::vector<std::string> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) rows.push_back(line);
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  if (rows.empty()) throw IoError("maze text: empty grid");

  MazeInstance maze;
  maze.height = static_cast<int>(rows.size());
  maze.width = static_cast<int>(rows.front().size());
  maze.walls.assign(static_cast<std::size_t>(maze.width) * static_cast<std::size_t>(maze.height),
                    1);
  int starts = 0, goals = 0;
  for (int r = 0; r < maze.height; ++r) {
    if (static_cast<int>(rows[static_cast<std::size_t>(r)].size()) != maze.width) {
      throw IoError("maze text: rows have unequal lengths");
    }
    for (int c = 0; c < maze.width; ++c) {
      switch (rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]) {
        case '#': break;
        case '.': maze.walls[cell_index(maze, r, c)] = 0; break;
        case 'S':
          maze.walls[cell_index(maze, r, c)] = 0;
          maze.start_row = r;
          maze.start_col = c;
          ++starts;
          break;
        case 'G':
          maze.walls[cell_index(maze, r, c)] = 0;
          maze.goal_row = r;
          maze.goal_col = c;
          ++goals;
          break;
        default: throw IoError("maze text: unexpected character");
      }
    }
  }
  if (starts != 1 || goals != 1) throw IoError("maze text: need exactly one S and one G");
  try {
    validate_maze(maze);
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("maze text: ") + e.what());
  }
  return maze;
}

void save_maze(const std::string& path, const MazeInstance& maze) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << write_maze_text(maze);
  if (!out) throw IoError("write failed: " + path);
}

MazeInstance load_maze(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_maze_text(buf.str());
}

}  // namespace retro
