#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "lomap/ann.hpp"
#include "lomap/diffusion.hpp"
#include "lomap/guidance.hpp"
#include "lomap/maze.hpp"
#include "lomap/normalizer.hpp"
#include "lomap/projection.hpp"

namespace lomap {

// A block of row coordinates pinned to a world-space value. The planner
// rewrites these slots after the initial draw and after every reverse step,
// and copies the given values verbatim into the returned rows, so
// conditioned blocks survive guidance shifts and projection bit for bit.
struct ConditionSlot {
  Eigen::Index offset = 0;
  Eigen::VectorXd value;
};

// Reverse-diffusion sampler over flattened trajectory rows. Works in the
// normalizer's coordinates internally; inputs and outputs are world units.
// Candidates are seeded individually: the reverse-noise stream for candidate
// c depends only on (seed, c), so two planner configurations sharing a seed
// consume identical base noise, while projection draws come from a separate
// stream and cannot desynchronize the comparison.
class TrajectoryPlanner {
 public:
  TrajectoryPlanner(const Denoiser* denoiser, const NoiseSchedule* sched,
                    const Normalizer* norm, int row_dim);

  // Neighbor rows must live in the same normalized coordinates the denoiser
  // was trained in.
  void attach_index(const AnnIndex* index, ProjectionSchedule cfg);

  // A positive omega without a guide is a configuration error.
  Eigen::MatrixXd sample_rows(const std::vector<ConditionSlot>& conds,
                              int count, std::uint64_t seed,
                              const Guide* guide, double omega,
                              bool use_lomap) const;

  // Candidate ranking: index of the row with the highest guide value at the
  // lowest noise step, or 0 when there is no guide.
  int rank_best(const Eigen::MatrixXd& world_rows, const Guide* guide) const;

  int row_dim() const { return row_dim_; }
  const NoiseSchedule& schedule() const { return *sched_; }
  const ProjectionSchedule& projection() const { return lomap_; }

 private:
  const Denoiser* den_;
  const NoiseSchedule* sched_;
  const Normalizer* norm_;
  int row_dim_;
  const AnnIndex* index_ = nullptr;
  ProjectionSchedule lomap_;
};

std::vector<ConditionSlot> maze_plan_conditions(const Eigen::Vector4d& start,
                                                const Eigen::Vector2d& goal,
                                                int horizon, int state_dim,
                                                int action_dim,
                                                bool condition_final);

// Open-loop execution of a planned action sequence; returns all visited
// states, one more row than there are actions.
Eigen::MatrixXd rollout_actions(const PointMassEnv& env,
                                const Eigen::Vector4d& start,
                                const Eigen::MatrixXd& actions);

Eigen::MatrixXd actions_of_row(const Eigen::VectorXd& row, int horizon,
                               int state_dim, int action_dim);

struct EpisodeOptions {
  int horizon = 48;     // planned trajectory length per replan
  int candidates = 4;
  double omega = 0.0;
  const Guide* guide = nullptr;
  bool use_lomap = false;
  bool condition_final = true;
  double gamma = 0.99;
  int episode_cap = 96;  // max executed actions
};

struct EpisodeResult {
  Eigen::MatrixXd states;   // executed states, steps + 1 rows
  Eigen::MatrixXd actions;  // executed actions, steps rows
  Eigen::VectorXd first_plan;  // chosen plan of the first replan; may be empty
  bool success = false;
  double ret = 0;           // discounted goal-indicator return
  bool plan_collision = false;  // any chosen plan crossed a wall
  int steps = 0;
};

// Receding-horizon control: every environment step replans a fresh batch of
// candidates from the current state, ranks them, and executes only the first
// action of the winner. Terminates on reaching the goal (within the maze
// goal radius) or on the step cap. Starting inside the goal radius succeeds
// immediately with zero executed actions.
EpisodeResult plan_episode(const PointMassEnv& env,
                           const TrajectoryPlanner& planner,
                           const Eigen::Vector4d& start,
                           const Eigen::Vector2d& goal, std::uint64_t seed,
                           const EpisodeOptions& opt);

// Coarse-to-fine planning: a state-only planner proposes `points` subgoal
// states spaced `stride` pairs apart, then a short-window planner fills each
// gap conditioned on the flanking subgoals. Windows overlap by one pair and
// stitch to stride * (points - 1) + 1 pairs.
class HierarchicalPlanner {
 public:
  HierarchicalPlanner(const TrajectoryPlanner* high, const TrajectoryPlanner* low,
                      int stride, int points, int state_dim, int action_dim);

  Eigen::VectorXd plan(const Eigen::Vector4d& start, const Eigen::Vector2d& goal,
                       std::uint64_t seed, bool lomap_high, bool lomap_low) const;

  int stitched_horizon() const { return stride_ * (points_ - 1) + 1; }

 private:
  const TrajectoryPlanner* high_;
  const TrajectoryPlanner* low_;
  int stride_;
  int points_;
  int state_dim_;
  int action_dim_;
};

}  // namespace lomap
