#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lomap/denoisers.hpp"
#include "lomap/maze.hpp"
#include "lomap/trajectory.hpp"

namespace lomap {

// Rows hold whole episodes, one flattened trajectory per row, already passed
// through float32 so that in-memory values match a save/load round trip
// exactly. returns holds one scalar per row (zeros for synthetic sets).
struct Dataset {
  int horizon = 0;
  int state_dim = 0;
  int action_dim = 0;
  Eigen::MatrixXd rows;
  Eigen::VectorXd returns;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;

  Eigen::Index n() const { return rows.rows(); }
  int row_dim() const { return horizon * (state_dim + action_dim); }
  Trajectory trajectory(Eigen::Index i) const;
};

Trajectory trajectory_from_row(const Eigen::VectorXd& row, int horizon,
                               int state_dim, int action_dim);

double quantize_f32(double v);
void quantize_f32_in_place(Eigen::MatrixXd& m);
void quantize_f32_in_place(Eigen::VectorXd& v);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

// Shortest 4-connected path between free cells, including both endpoints;
// empty when unreachable. Deterministic tie-breaking.
std::vector<std::pair<int, int>> astar_path(const MazeSpec& maze,
                                            std::pair<int, int> start,
                                            std::pair<int, int> goal);

struct DataGenOptions {
  int episodes = 500;
  int horizon = 48;
  double max_path_len = 12.0;  // A* length cap in cells; 0 = unlimited
  double action_noise = 0.15;
  double goal_radius = 0.5;
  double waypoint_radius = 0.35;
  double kp = 3.0;
  double kd = 1.0;
  double gamma = 0.99;
  int max_attempts = 50;
  EnvParams env;
};

// Expert-ish episodes: random free start/goal pair, A* waypoints, noisy
// proportional controller rolled through the environment. Acceptance checks
// run on the float32-quantized episode that gets stored: it must be
// collision-free under the straight-segment test and end within one cell of
// the goal, so recorded rows score zero artifacts by construction and their
// dynamics error sits at float32 rounding scale.
Dataset generate_offline_dataset(const MazeSpec& maze,
                                 const DataGenOptions& opt, std::uint64_t seed,
                                 std::uint64_t config_hash);

Eigen::MatrixXd sample_gmm_rows(const GmmSpec& gmm, long n, std::uint64_t seed);

struct SubspaceSample {
  Eigen::MatrixXd rows;
  Eigen::VectorXd mean;
  Eigen::MatrixXd basis;  // dim x rank, orthonormal
};

// Points exactly on a random affine subspace, with anisotropic coefficient
// scales so principal directions are well separated.
SubspaceSample sample_subspace_rows(long n, int dim, int rank,
                                    std::uint64_t seed);

// Fraction of trajectories that collide with walls.
double artifact_ratio(const MazeSpec& maze,
                      const std::vector<Trajectory>& plans);

// Start/goal pair for conditioned planning as (start state, goal position).
struct EvalPair {
  Eigen::Vector4d start;
  Eigen::Vector2d goal;
};

// Distinct free-cell centers drawn from the maze start and goal regions;
// velocities start at zero.
std::vector<EvalPair> sample_eval_pairs(const MazeSpec& maze, int count,
                                        std::uint64_t seed);

// Density-coverage score: each reference row gets a radius equal to the
// distance to its k_nn-th nearest other reference row, and a sample scores
// max over rows of radius / distance(sample, row). Scores above 1 mean the
// sample sits inside at least one reference hypersphere; higher is more
// realistic. Scores (and the zero-distance case) clamp at 1e6. A reference
// set whose rows are all duplicates has no usable radii and is rejected.
Eigen::VectorXd realism_scores(const Eigen::MatrixXd& samples,
                               const Eigen::MatrixXd& refs, int k_nn);

// Sum of gamma^{t-1} over post-initial states within radius of the goal.
double discounted_goal_return(const Eigen::MatrixXd& states,
                              const Eigen::Vector2d& goal, double gamma,
                              double radius);

// Episode windows of `len` consecutive (state, action) pairs, taken at
// offsets 0, stride, 2*stride, ... within each episode.
Eigen::MatrixXd window_rows(const Dataset& ds, int len, int stride);

// State-only rows for coarse planning: `points` states sampled every
// `stride` pairs, starting at t = 0. Requires (points-1)*stride < horizon.
Eigen::MatrixXd highlevel_rows(const Dataset& ds, int stride, int points);

}  // namespace lomap
