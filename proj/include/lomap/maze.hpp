#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "lomap/trajectory.hpp"

namespace lomap {

// Occupancy grid. Cell (r, c) covers [c, c+1) x [r, r+1) in grid units and
// cell_size world units per grid unit; everything outside the grid counts as
// wall, so the boundary is solid without a mandatory '#' border. 'S' and 'G'
// cells are free cells that additionally mark the start and goal regions;
// when a region is empty it means "any free cell".
struct MazeSpec {
  int rows = 0;
  int cols = 0;
  std::vector<char> cells;  // row-major, '#' or '.'
  std::string text;         // normalized source, lines joined by '\n'
  double cell_size = 1.0;
  double goal_radius = 0.5;                       // world units
  std::vector<std::pair<int, int>> start_cells;   // (r, c), may be empty
  std::vector<std::pair<int, int>> goal_cells;    // (r, c), may be empty

  bool wall(int r, int c) const {
    if (r < 0 || r >= rows || c < 0 || c >= cols) return true;
    return cells[static_cast<std::size_t>(r) * cols + c] == '#';
  }
  bool wall_at(double x, double y) const {
    return wall(static_cast<int>(std::floor(y / cell_size)),
                static_cast<int>(std::floor(x / cell_size)));
  }
  int free_count() const;
  std::vector<std::pair<int, int>> free_cells() const;
  std::vector<std::pair<int, int>> start_region() const;  // fallback: all free
  std::vector<std::pair<int, int>> goal_region() const;   // fallback: all free

  Eigen::Vector2d center(int r, int c) const {
    return {(c + 0.5) * cell_size, (r + 0.5) * cell_size};
  }

  static MazeSpec parse(const std::string& text);
  static MazeSpec builtin(const std::string& name);  // corridor | four_room
};

// Exact straight-segment wall test: walks every cell the segment passes
// through. An exact corner crossing steps across the X face first, then the
// Y face, so the two cells adjacent to the corner in that order are the ones
// visited. Endpoints in walls (or outside the grid) count as hits.
bool segment_hits_wall(const MazeSpec& maze, const Eigen::Vector2d& p0,
                       const Eigen::Vector2d& p1);

// Any consecutive planned state pair whose straight segment is blocked, or a
// first state inside a wall, makes the trajectory colliding. States must
// carry (x, y) in their first two slots.
bool trajectory_hits_wall(const MazeSpec& maze, const Trajectory& traj);

struct EnvParams {
  double dt = 0.2;
  double damping = 0.15;
  double amax = 1.5;
};

// Point mass with linear drag and per-axis wall sliding: each step clamps
// the acceleration to length amax, integrates velocity, then moves along x
// and then y, clipping at the first wall face on each axis and zeroing that
// velocity component. Axis moves scan whole cell runs, so high speeds cannot
// tunnel through walls.
class PointMassEnv {
 public:
  PointMassEnv(MazeSpec maze, EnvParams params)
      : maze_(std::move(maze)), p_(params) {}

  Eigen::Vector4d step(const Eigen::Vector4d& state,
                       const Eigen::Vector2d& action) const;

  const MazeSpec& maze() const { return maze_; }
  const EnvParams& params() const { return p_; }

 private:
  MazeSpec maze_;
  EnvParams p_;
};

// Mean squared one-step prediction error of the recorded transitions under
// the environment dynamics. Data produced by rolling the environment forward
// scores exactly zero.
double dynamic_mse(const PointMassEnv& env, const Trajectory& traj);

}  // namespace lomap
