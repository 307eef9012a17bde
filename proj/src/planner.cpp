#include "lomap/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lomap/dataset.hpp"
#include "lomap/error.hpp"

namespace lomap {

TrajectoryPlanner::TrajectoryPlanner(const Denoiser* denoiser,
                                     const NoiseSchedule* sched,
                                     const Normalizer* norm, int row_dim)
    : den_(denoiser), sched_(sched), norm_(norm), row_dim_(row_dim) {
  require_param(denoiser && sched && norm, "planner needs all three parts");
  require_param(row_dim >= 1, "row dimension must be positive");
  require_param(norm->dim() == row_dim, "normalizer width mismatch");
  lomap_ = ProjectionSchedule::defaults(sched->steps);
}

void TrajectoryPlanner::attach_index(const AnnIndex* index,
                                     ProjectionSchedule cfg) {
  require_param(index != nullptr, "no index given");
  require_param(index->dim() == row_dim_, "index width mismatch");
  cfg.validate(sched_->steps);
  index_ = index;
  lomap_ = cfg;
}

Eigen::MatrixXd TrajectoryPlanner::sample_rows(
    const std::vector<ConditionSlot>& conds, int count, std::uint64_t seed,
    const Guide* guide, double omega, bool use_lomap) const {
  require_param(count >= 1, "candidate count must be positive");
  require_param(std::isfinite(omega) && omega >= 0,
                "guidance strength must be finite and non-negative");
  require_param(omega == 0.0 || guide != nullptr,
                "positive guidance strength needs a guide");
  if (use_lomap) {
    require_param(index_ != nullptr, "projection requested without an index");
  }
  for (const ConditionSlot& c : conds) {
    require_param(
        c.offset >= 0 &&
            c.offset + c.value.size() <= static_cast<Eigen::Index>(row_dim_),
        "conditioning slot out of range");
    require_param(c.value.allFinite(), "conditioning values must be finite");
  }

  std::vector<Eigen::VectorXd> pinned;
  pinned.reserve(conds.size());
  for (const ConditionSlot& c : conds) {
    pinned.push_back(norm_->normalize_segment(c.value, c.offset));
  }
  const auto impose = [&](Eigen::MatrixXd& rows) {
    for (std::size_t s = 0; s < conds.size(); ++s) {
      for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        rows.row(r).segment(conds[s].offset, pinned[s].size()) =
            pinned[s].transpose();
      }
    }
  };

  // Reverse noise and projection noise come from per-candidate streams so
  // that toggling projection never shifts the shared base draws.
  std::vector<Rng> noise_rng;
  std::vector<Rng> aux_rng;
  noise_rng.reserve(static_cast<std::size_t>(count));
  aux_rng.reserve(static_cast<std::size_t>(count));
  for (int c = 0; c < count; ++c) {
    const std::uint64_t cand = mix_seed(seed, static_cast<std::uint64_t>(c));
    noise_rng.emplace_back(mix_seed(cand, 0x01));
    aux_rng.emplace_back(mix_seed(cand, 0x02));
  }

  const int M = sched_->steps;
  Eigen::MatrixXd tau(count, row_dim_);
  for (int c = 0; c < count; ++c) {
    for (int j = 0; j < row_dim_; ++j) tau(c, j) = noise_rng[c].gaussian();
  }
  impose(tau);

  for (int i = M; i >= 1; --i) {
    const double b = sched_->beta[static_cast<std::size_t>(i)];
    const double ab = sched_->alpha_bar[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd eps = den_->predict_noise_rows(tau, i);
    require_numeric(eps.allFinite(), "denoiser produced non-finite noise");

    const double mean_scale = 1.0 / std::sqrt(1.0 - b);
    const double eps_scale = b / std::sqrt(1.0 - ab);
    Eigen::MatrixXd mu = mean_scale * (tau - eps_scale * eps);
    if (guide && omega != 0.0) {
      const Eigen::MatrixXd g = guide->gradient_rows(mu, i);
      require_numeric(g.allFinite(), "guide gradient is non-finite");
      mu += omega * sched_->posterior_var[static_cast<std::size_t>(i)] * g;
    }

    const double sd =
        std::sqrt(sched_->posterior_var[static_cast<std::size_t>(i)]);
    for (int c = 0; c < count; ++c) {
      for (int j = 0; j < row_dim_; ++j) {
        tau(c, j) = mu(c, j) + sd * noise_rng[c].gaussian();
      }
    }

    if (use_lomap && lomap_.contains(i - 1)) {
      for (int c = 0; c < count; ++c) {
        tau.row(c) = lomap_project(tau.row(c).transpose(), i - 1, *index_,
                                   *den_, *sched_, lomap_, aux_rng[c])
                         .transpose();
      }
    }
    impose(tau);
  }

  Eigen::MatrixXd out(count, row_dim_);
  for (int c = 0; c < count; ++c) {
    out.row(c) = norm_->denormalize(tau.row(c).transpose()).transpose();
  }
  // Conditioned blocks carry the caller's values verbatim, not a
  // normalize/denormalize round trip.
  for (const ConditionSlot& c : conds) {
    for (int r = 0; r < count; ++r) {
      out.row(r).segment(c.offset, c.value.size()) = c.value.transpose();
    }
  }
  return out;
}

int TrajectoryPlanner::rank_best(const Eigen::MatrixXd& world_rows,
                                 const Guide* guide) const {
  require_param(world_rows.rows() >= 1 && world_rows.cols() == row_dim_,
                "candidate matrix shape mismatch");
  if (!guide) return 0;
  int best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < world_rows.rows(); ++c) {
    const Eigen::VectorXd z = norm_->normalize(world_rows.row(c).transpose());
    const double v = guide->value(z, 1);
    require_numeric(std::isfinite(v), "guide value is non-finite");
    if (v > best_v) {
      best_v = v;
      best = static_cast<int>(c);
    }
  }
  return best;
}

std::vector<ConditionSlot> maze_plan_conditions(const Eigen::Vector4d& start,
                                                const Eigen::Vector2d& goal,
                                                int horizon, int state_dim,
                                                int action_dim,
                                                bool condition_final) {
  require_param(state_dim >= 4, "maze states carry (x, y, vx, vy)");
  require_param(horizon >= 2, "horizon too short to condition both ends");
  std::vector<ConditionSlot> out;
  ConditionSlot first;
  first.offset = 0;
  first.value = start;
  out.push_back(first);
  if (condition_final) {
    ConditionSlot last;
    last.offset =
        static_cast<Eigen::Index>(horizon - 1) * (state_dim + action_dim);
    last.value = Eigen::Vector4d(goal.x(), goal.y(), 0.0, 0.0);
    out.push_back(last);
  }
  return out;
}

Eigen::MatrixXd rollout_actions(const PointMassEnv& env,
                                const Eigen::Vector4d& start,
                                const Eigen::MatrixXd& actions) {
  require_param(actions.cols() == 2, "actions carry (ax, ay)");
  Eigen::MatrixXd states(actions.rows() + 1, 4);
  Eigen::Vector4d s = start;
  states.row(0) = s.transpose();
  for (Eigen::Index t = 0; t < actions.rows(); ++t) {
    s = env.step(s, actions.row(t).transpose());
    states.row(t + 1) = s.transpose();
  }
  return states;
}

Eigen::MatrixXd actions_of_row(const Eigen::VectorXd& row, int horizon,
                               int state_dim, int action_dim) {
  require_param(action_dim >= 1, "row has no actions");
  require_param(row.size() ==
                    static_cast<Eigen::Index>(horizon) * (state_dim + action_dim),
                "row length does not match trajectory shape");
  Eigen::MatrixXd out(horizon, action_dim);
  for (int t = 0; t < horizon; ++t) {
    out.row(t) = row.segment(
        static_cast<Eigen::Index>(t) * (state_dim + action_dim) + state_dim,
        action_dim);
  }
  return out;
}

EpisodeResult plan_episode(const PointMassEnv& env,
                           const TrajectoryPlanner& planner,
                           const Eigen::Vector4d& start,
                           const Eigen::Vector2d& goal, std::uint64_t seed,
                           const EpisodeOptions& opt) {
  require_param(opt.horizon >= 2 && opt.candidates >= 1 &&
                    opt.episode_cap >= 0,
                "bad episode options");
  require_param(opt.gamma > 0 && opt.gamma <= 1, "discount must be in (0, 1]");
  require_param(planner.row_dim() == opt.horizon * 6,
                "planner width does not match the episode horizon");
  const MazeSpec& maze = env.maze();

  std::vector<Eigen::Vector4d> visited{start};
  std::vector<Eigen::Vector2d> executed;
  EpisodeResult out;

  Eigen::Vector4d s = start;
  for (int t = 0; t < opt.episode_cap; ++t) {
    if ((Eigen::Vector2d(s.head<2>()) - goal).norm() <= maze.goal_radius) break;
    const auto conds = maze_plan_conditions(s, goal, opt.horizon, 4, 2,
                                            opt.condition_final);
    const Eigen::MatrixXd rows = planner.sample_rows(
        conds, opt.candidates, mix_seed(seed, static_cast<std::uint64_t>(t)),
        opt.guide, opt.omega, opt.use_lomap);
    const int pick = planner.rank_best(rows, opt.guide);
    const Trajectory plan = trajectory_from_row(rows.row(pick).transpose(),
                                                opt.horizon, 4, 2);
    if (out.first_plan.size() == 0) out.first_plan = plan.flat;
    out.plan_collision = out.plan_collision || trajectory_hits_wall(maze, plan);
    const Eigen::Vector2d a = plan.action(0);
    s = env.step(s, a);
    visited.push_back(s);
    executed.push_back(a);
  }

  out.steps = static_cast<int>(executed.size());
  out.states.resize(out.steps + 1, 4);
  for (int t = 0; t <= out.steps; ++t) {
    out.states.row(t) = visited[static_cast<std::size_t>(t)].transpose();
  }
  out.actions.resize(out.steps, 2);
  for (int t = 0; t < out.steps; ++t) {
    out.actions.row(t) = executed[static_cast<std::size_t>(t)].transpose();
  }
  const Eigen::Vector2d final_pos = s.head<2>();
  out.success = (final_pos - goal).norm() <= maze.goal_radius;
  out.ret = out.steps == 0
                ? (out.success ? 1.0 : 0.0)
                : discounted_goal_return(out.states, goal, opt.gamma,
                                         maze.goal_radius);
  return out;
}

HierarchicalPlanner::HierarchicalPlanner(const TrajectoryPlanner* high,
                                         const TrajectoryPlanner* low,
                                         int stride, int points, int state_dim,
                                         int action_dim)
    : high_(high),
      low_(low),
      stride_(stride),
      points_(points),
      state_dim_(state_dim),
      action_dim_(action_dim) {
  require_param(high && low, "hierarchical planner needs both levels");
  require_param(stride >= 1 && points >= 2, "bad coarse shape");
  require_param(high->row_dim() == points * state_dim,
                "coarse planner width mismatch");
  require_param(low->row_dim() == (stride + 1) * (state_dim + action_dim),
                "fine planner width mismatch");
}

Eigen::VectorXd HierarchicalPlanner::plan(const Eigen::Vector4d& start,
                                          const Eigen::Vector2d& goal,
                                          std::uint64_t seed, bool lomap_high,
                                          bool lomap_low) const {
  // Coarse pass: pin the first subgoal to the start and the last to the
  // goal at rest.
  std::vector<ConditionSlot> hc;
  ConditionSlot first;
  first.offset = 0;
  first.value = start;
  hc.push_back(first);
  ConditionSlot last;
  last.offset = static_cast<Eigen::Index>(points_ - 1) * state_dim_;
  last.value = Eigen::Vector4d(goal.x(), goal.y(), 0.0, 0.0);
  hc.push_back(last);
  const Eigen::MatrixXd coarse = high_->sample_rows(
      hc, 1, mix_seed(seed, 0x42AA), nullptr, 0.0, lomap_high);

  const int pair_dim = state_dim_ + action_dim_;
  Eigen::VectorXd stitched(
      static_cast<Eigen::Index>(stitched_horizon()) * pair_dim);
  for (int seg = 0; seg + 1 < points_; ++seg) {
    const Eigen::VectorXd a =
        coarse.row(0).segment(static_cast<Eigen::Index>(seg) * state_dim_,
                              state_dim_);
    const Eigen::VectorXd b = coarse.row(0).segment(
        static_cast<Eigen::Index>(seg + 1) * state_dim_, state_dim_);
    std::vector<ConditionSlot> lc;
    ConditionSlot s0;
    s0.offset = 0;
    s0.value = a;
    lc.push_back(s0);
    ConditionSlot s1;
    s1.offset = static_cast<Eigen::Index>(stride_) * pair_dim;
    s1.value = b;
    lc.push_back(s1);
    const Eigen::MatrixXd fine = low_->sample_rows(
        lc, 1, mix_seed(seed, 0x9100 + static_cast<std::uint64_t>(seg)),
        nullptr, 0.0, lomap_low);
    // Segments overlap by one pair; every segment contributes its first
    // `stride` pairs and the final segment also lands the closing pair.
    const Eigen::Index dst = static_cast<Eigen::Index>(seg) * stride_ * pair_dim;
    const Eigen::Index len = (seg + 2 == points_)
                                 ? static_cast<Eigen::Index>(stride_ + 1) * pair_dim
                                 : static_cast<Eigen::Index>(stride_) * pair_dim;
    stitched.segment(dst, len) = fine.row(0).head(len);
  }
  return stitched;
}

}  // namespace lomap
