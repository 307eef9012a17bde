#pragma once

#include <Eigen/Dense>

#include "lomap/error.hpp"

namespace lomap {

// Flattened planning trajectory. Layout is timestep-major:
// (s_0, a_0, s_1, a_1, ..., s_{T-1}, a_{T-1}); action_dim may be 0 for
// state-only (subgoal) sequences.
struct Trajectory {
  int horizon = 0;
  int state_dim = 0;
  int action_dim = 0;
  Eigen::VectorXd flat;

  Trajectory() = default;
  Trajectory(int T, int sd, int ad)
      : horizon(T), state_dim(sd), action_dim(ad) {
    require_param(T >= 1 && sd >= 1 && ad >= 0, "bad trajectory shape");
    flat = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(T) * (sd + ad));
  }

  int step_dim() const { return state_dim + action_dim; }
  int dim() const { return horizon * step_dim(); }

  Eigen::VectorBlock<Eigen::VectorXd> state(int t) {
    return flat.segment(static_cast<Eigen::Index>(t) * step_dim(), state_dim);
  }
  Eigen::VectorBlock<const Eigen::VectorXd> state(int t) const {
    return flat.segment(static_cast<Eigen::Index>(t) * step_dim(), state_dim);
  }
  Eigen::VectorBlock<Eigen::VectorXd> action(int t) {
    return flat.segment(static_cast<Eigen::Index>(t) * step_dim() + state_dim,
                        action_dim);
  }
  Eigen::VectorBlock<const Eigen::VectorXd> action(int t) const {
    return flat.segment(static_cast<Eigen::Index>(t) * step_dim() + state_dim,
                        action_dim);
  }
};

}  // namespace lomap
