#include "lomap/maze.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "lomap/error.hpp"

namespace lomap {

namespace {

const char* kCorridor =
    "############\n"
    "#..........#\n"
    "############";

const char* kFourRoom =
    "#############\n"
    "#.....#.....#\n"
    "#.....#.....#\n"
    "#...........#\n"
    "#.....#.....#\n"
    "#.....#.....#\n"
    "###.#####.###\n"
    "#.....#.....#\n"
    "#.....#.....#\n"
    "#...........#\n"
    "#.....#.....#\n"
    "#.....#.....#\n"
    "#############";

}  // namespace

int MazeSpec::free_count() const {
  return static_cast<int>(std::count(cells.begin(), cells.end(), '.'));
}

std::vector<std::pair<int, int>> MazeSpec::free_cells() const {
  std::vector<std::pair<int, int>> out;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!wall(r, c)) out.emplace_back(r, c);
    }
  }
  return out;
}

std::vector<std::pair<int, int>> MazeSpec::start_region() const {
  return start_cells.empty() ? free_cells() : start_cells;
}

std::vector<std::pair<int, int>> MazeSpec::goal_region() const {
  return goal_cells.empty() ? free_cells() : goal_cells;
}

MazeSpec MazeSpec::parse(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  require_data(!lines.empty(), "maze text is empty");

  MazeSpec m;
  m.rows = static_cast<int>(lines.size());
  m.cols = static_cast<int>(lines[0].size());
  require_data(m.cols >= 1, "maze rows must be non-empty");
  m.cells.reserve(static_cast<std::size_t>(m.rows) * m.cols);
  for (int r = 0; r < m.rows; ++r) {
    const std::string& line = lines[static_cast<std::size_t>(r)];
    require_data(static_cast<int>(line.size()) == m.cols,
                 "maze rows differ in length");
    for (int c = 0; c < m.cols; ++c) {
      const char ch = line[static_cast<std::size_t>(c)];
      require_data(ch == '#' || ch == '.' || ch == 'S' || ch == 'G',
                   std::string("maze contains an unknown character: ") + ch);
      if (ch == 'S') m.start_cells.emplace_back(r, c);
      if (ch == 'G') m.goal_cells.emplace_back(r, c);
      m.cells.push_back(ch == '#' ? '#' : '.');
    }
  }
  require_data(m.free_count() >= 1, "maze has no free cells");

  // Flood fill from the first free cell; every free cell must be reachable.
  std::vector<char> seen(m.cells.size(), 0);
  std::deque<std::pair<int, int>> queue;
  const auto free_list = m.free_cells();
  queue.push_back(free_list[0]);
  seen[static_cast<std::size_t>(free_list[0].first) * m.cols +
       free_list[0].second] = 1;
  int reached = 0;
  while (!queue.empty()) {
    const auto [r, c] = queue.front();
    queue.pop_front();
    ++reached;
    const int dr[4] = {-1, 1, 0, 0};
    const int dc[4] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      const int nr = r + dr[k], nc = c + dc[k];
      if (m.wall(nr, nc)) continue;
      auto& mark = seen[static_cast<std::size_t>(nr) * m.cols + nc];
      if (!mark) {
        mark = 1;
        queue.emplace_back(nr, nc);
      }
    }
  }
  require_data(reached == m.free_count(), "maze free space is disconnected");

  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) m.text.push_back('\n');
    m.text += lines[i];
  }
  return m;
}

MazeSpec MazeSpec::builtin(const std::string& name) {
  if (name == "corridor") return parse(kCorridor);
  if (name == "four_room") return parse(kFourRoom);
  fail_param("unknown builtin maze: " + name);
}

bool segment_hits_wall(const MazeSpec& maze, const Eigen::Vector2d& w0,
                       const Eigen::Vector2d& w1) {
  require_param(w0.allFinite() && w1.allFinite(),
                "segment endpoints must be finite");
  const Eigen::Vector2d p0 = w0 / maze.cell_size;
  const Eigen::Vector2d p1 = w1 / maze.cell_size;
  int cx = static_cast<int>(std::floor(p0.x()));
  int cy = static_cast<int>(std::floor(p0.y()));
  const int tx = static_cast<int>(std::floor(p1.x()));
  const int ty = static_cast<int>(std::floor(p1.y()));
  if (maze.wall(cy, cx)) return true;

  const double dx = p1.x() - p0.x();
  const double dy = p1.y() - p0.y();
  const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  const double inf = std::numeric_limits<double>::infinity();
  double t_max_x = inf, t_delta_x = inf;
  double t_max_y = inf, t_delta_y = inf;
  if (step_x != 0) {
    const double face = step_x > 0 ? cx + 1.0 : static_cast<double>(cx);
    t_max_x = (face - p0.x()) / dx;
    t_delta_x = step_x / dx;
  }
  if (step_y != 0) {
    const double face = step_y > 0 ? cy + 1.0 : static_cast<double>(cy);
    t_max_y = (face - p0.y()) / dy;
    t_delta_y = step_y / dy;
  }

  const int budget = std::abs(tx - cx) + std::abs(ty - cy) + 4;
  for (int it = 0; it < budget; ++it) {
    if (cx == tx && cy == ty) return false;
    if (t_max_x <= t_max_y) {
      // Ties advance across the X face first; the companion Y crossing
      // happens on the next iteration.
      cx += step_x;
      t_max_x += t_delta_x;
    } else {
      cy += step_y;
      t_max_y += t_delta_y;
    }
    if (maze.wall(cy, cx)) return true;
  }
  return false;
}

bool trajectory_hits_wall(const MazeSpec& maze, const Trajectory& traj) {
  require_param(traj.state_dim >= 2, "states must carry (x, y)");
  require_param(traj.horizon >= 1, "empty trajectory");
  Eigen::Vector2d prev = traj.state(0).head<2>();
  if (maze.wall_at(prev.x(), prev.y())) return true;
  for (int t = 1; t < traj.horizon; ++t) {
    const Eigen::Vector2d cur = traj.state(t).head<2>();
    if (segment_hits_wall(maze, prev, cur)) return true;
    prev = cur;
  }
  return false;
}

namespace {

// Clips motion along one axis at the first blocking cell run. `fixed` is the
// other coordinate; `axis` 0 moves x across columns, 1 moves y across rows.
double axis_move(const MazeSpec& maze, double from, double fixed, double target,
                 int axis, double* vel) {
  constexpr double kSkin = 1e-9;
  const double cs = maze.cell_size;
  const int lane = static_cast<int>(std::floor(fixed / cs));
  const int c0 = static_cast<int>(std::floor(from / cs));
  const int c1 = static_cast<int>(std::floor(target / cs));
  auto blocked = [&](int cell) {
    return axis == 0 ? maze.wall(lane, cell) : maze.wall(cell, lane);
  };
  if (target > from) {
    for (int c = c0 + 1; c <= c1; ++c) {
      if (blocked(c)) {
        *vel = 0;
        return c * cs - kSkin;
      }
    }
  } else if (target < from) {
    for (int c = c0 - 1; c >= c1; --c) {
      if (blocked(c)) {
        *vel = 0;
        return (c + 1) * cs + kSkin;
      }
    }
  }
  return target;
}

}  // namespace

Eigen::Vector4d PointMassEnv::step(const Eigen::Vector4d& state,
                                   const Eigen::Vector2d& action) const {
  require_param(state.allFinite() && action.allFinite(),
                "environment inputs must be finite");
  Eigen::Vector2d a = action;
  const double an = a.norm();
  if (an > p_.amax) a *= p_.amax / an;

  double vx = state[2] + p_.dt * (a.x() - p_.damping * state[2]);
  double vy = state[3] + p_.dt * (a.y() - p_.damping * state[3]);

  const double x = axis_move(maze_, state[0], state[1],
                             state[0] + p_.dt * vx, 0, &vx);
  const double y = axis_move(maze_, state[1], x, state[1] + p_.dt * vy, 1, &vy);
  return {x, y, vx, vy};
}

double dynamic_mse(const PointMassEnv& env, const Trajectory& traj) {
  require_param(traj.state_dim == 4 && traj.action_dim == 2,
                "point-mass trajectories carry 4 state and 2 action dims");
  require_param(traj.horizon >= 2, "need at least one transition");
  double acc = 0;
  for (int t = 0; t + 1 < traj.horizon; ++t) {
    const Eigen::Vector4d pred =
        env.step(traj.state(t), traj.action(t));
    acc += (pred - Eigen::Vector4d(traj.state(t + 1))).squaredNorm();
  }
  return acc / ((traj.horizon - 1) * 4.0);
}

}  // namespace lomap
