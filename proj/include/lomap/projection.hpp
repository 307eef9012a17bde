#pragma once

#include <Eigen/Dense>

#include "lomap/ann.hpp"
#include "lomap/diffusion.hpp"
#include "lomap/rng.hpp"

namespace lomap {

enum class ProjectionStyle { affine = 0, literal = 1 };

// Local linear chart fit to a neighbor set: orthonormal directions that
// capture at least a target fraction of the neighbors' variance (affine,
// about their mean) or squared norm (literal, about the origin). Rank 0 is
// valid and collapses projection onto the anchor point.
struct LocalBasis {
  Eigen::VectorXd mean;   // zero vector for the literal style
  Eigen::MatrixXd basis;  // dim x rank, orthonormal columns
  int rank = 0;
  double retained = 1.0;  // achieved fraction
};

// The affine style centers on the neighbor mean, so it needs at least two
// rows to carry any directional information.
LocalBasis local_basis(const Eigen::MatrixXd& neighbors, double lambda,
                       ProjectionStyle style);

Eigen::VectorXd project_onto(const LocalBasis& basis, const Eigen::VectorXd& x);

// Which reverse steps get projected and how. Steps whose output index falls
// inside [lo, hi] are the low-noise end where off-manifold drift compounds;
// late, high-noise steps are left alone. zero_noise re-noises neighbors with
// the forward mean only, making the projection deterministic.
struct ProjectionSchedule {
  int lo = 1;
  int hi = 1;
  int k = 20;              // neighbors per projection, at least 2
  double lambda = 0.99;    // variance fraction to retain
  ProjectionStyle style = ProjectionStyle::affine;
  int n_probe = 0;         // 0 = index default
  bool zero_noise = false;

  bool contains(int i) const { return i >= lo && i <= hi; }
  void validate(int steps) const;
  static ProjectionSchedule defaults(int steps);
};

// One projection of a candidate tau^{i_prev}: denoise the candidate at its
// own step, look up neighbors of the estimate among the indexed clean rows,
// re-noise them to step i_prev, fit a local basis there, and project the
// candidate onto it. Steps outside the active range (including i_prev = 0)
// pass through untouched.
Eigen::VectorXd lomap_project(const Eigen::VectorXd& tau_prev, int i_prev,
                              const AnnIndex& index, const Denoiser& denoiser,
                              const NoiseSchedule& sched,
                              const ProjectionSchedule& proj, Rng& rng);

}  // namespace lomap
