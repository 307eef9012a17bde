#include "lomap/projection.hpp"

#include <algorithm>
#include <cmath>

#include "lomap/error.hpp"

namespace lomap {

LocalBasis local_basis(const Eigen::MatrixXd& neighbors, double lambda,
                       ProjectionStyle style) {
  const Eigen::Index k = neighbors.rows();
  const Eigen::Index d = neighbors.cols();
  require_param(k >= 1 && d >= 1, "basis needs a non-empty neighbor set");
  require_param(style != ProjectionStyle::affine || k >= 2,
                "affine basis needs at least two neighbors");
  require_param(neighbors.allFinite(), "neighbors must be finite");
  require_param(lambda > 0 && lambda <= 1, "retained fraction must be in (0, 1]");

  LocalBasis out;
  Eigen::MatrixXd centered;
  if (style == ProjectionStyle::affine) {
    out.mean = neighbors.colwise().mean().transpose();
    centered = neighbors.rowwise() - out.mean.transpose();
  } else {
    out.mean = Eigen::VectorXd::Zero(d);
    centered = neighbors;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double total = sv.squaredNorm();
  if (total <= 0) {
    out.rank = 0;
    out.basis.resize(d, 0);
    out.retained = 1.0;
    return out;
  }
  double acc = 0;
  Eigen::Index rank = 0;
  while (rank < sv.size() && acc / total < lambda) {
    acc += sv[rank] * sv[rank];
    ++rank;
  }
  // Directions with exactly zero variance never help; trim them in case
  // lambda = 1 walked past the numerical rank.
  while (rank > 0 && sv[rank - 1] == 0) --rank;
  out.rank = static_cast<int>(rank);
  out.basis = svd.matrixV().leftCols(rank);
  out.retained = acc / total;
  return out;
}

Eigen::VectorXd project_onto(const LocalBasis& basis, const Eigen::VectorXd& x) {
  require_param(x.size() == basis.mean.size(), "projection dimension mismatch");
  if (basis.rank == 0) return basis.mean;
  return basis.mean + basis.basis * (basis.basis.transpose() * (x - basis.mean));
}

void ProjectionSchedule::validate(int steps) const {
  require_param(lo >= 1 && lo <= hi && hi <= steps,
                "active range must satisfy 1 <= lo <= hi <= steps");
  require_param(k >= 2, "neighbor count must be at least 2");
  require_param(lambda > 0 && lambda <= 1,
                "retained fraction must be in (0, 1]");
  require_param(n_probe >= 0, "probe count must be non-negative");
}

ProjectionSchedule ProjectionSchedule::defaults(int steps) {
  ProjectionSchedule s;
  s.lo = 1;
  s.hi = static_cast<int>(std::ceil(0.6 * steps));
  return s;
}

Eigen::VectorXd lomap_project(const Eigen::VectorXd& tau_prev, int i_prev,
                              const AnnIndex& index, const Denoiser& denoiser,
                              const NoiseSchedule& sched,
                              const ProjectionSchedule& proj, Rng& rng) {
  require_param(i_prev >= 0 && i_prev < sched.steps,
                "projection step out of range");
  proj.validate(sched.steps);
  if (i_prev == 0 || !proj.contains(i_prev)) return tau_prev;
  require_param(tau_prev.size() == index.dim(), "projection dimension mismatch");

  const Eigen::VectorXd hat0 = tweedie_denoise(tau_prev, i_prev, denoiser, sched);
  const int k = std::min(proj.k, index.n_rows());
  const auto hits = index.knn(hat0, k, proj.n_probe);
  require_data(static_cast<int>(hits.size()) >= 2 ||
                   proj.style == ProjectionStyle::literal,
               "too few neighbors for an affine basis");
  Eigen::MatrixXd nb = index.gather(hits);
  const double root_ab = std::sqrt(sched.alpha_bar[i_prev]);
  if (proj.zero_noise) {
    nb *= root_ab;
  } else {
    for (Eigen::Index r = 0; r < nb.rows(); ++r) {
      Eigen::VectorXd row = nb.row(r).transpose();
      nb.row(r) = forward_diffuse(row, i_prev, sched, rng).transpose();
    }
  }
  const LocalBasis basis = local_basis(nb, proj.lambda, proj.style);
  return project_onto(basis, tau_prev);
}

}  // namespace lomap
