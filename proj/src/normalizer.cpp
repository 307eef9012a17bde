#include "lomap/normalizer.hpp"

#include "lomap/error.hpp"

namespace lomap {

Normalizer Normalizer::fit(const Eigen::MatrixXd& rows) {
  require_param(rows.rows() >= 1, "cannot fit a normalizer on empty data");
  Normalizer n;
  Eigen::VectorXd lo = rows.colwise().minCoeff().transpose();
  Eigen::VectorXd hi = rows.colwise().maxCoeff().transpose();
  n.mid = 0.5 * (lo + hi);
  n.half = (0.5 * (hi - lo)).cwiseMax(1e-8);
  return n;
}

Normalizer Normalizer::identity(int dim) {
  Normalizer n;
  n.mid = Eigen::VectorXd::Zero(dim);
  n.half = Eigen::VectorXd::Ones(dim);
  return n;
}

Eigen::MatrixXd Normalizer::normalize_rows(const Eigen::MatrixXd& rows) const {
  Eigen::MatrixXd out = rows;
  out.rowwise() -= mid.transpose();
  out.array().rowwise() /= half.transpose().array();
  return out;
}

Eigen::MatrixXd Normalizer::denormalize_rows(const Eigen::MatrixXd& rows) const {
  Eigen::MatrixXd out = rows;
  out.array().rowwise() *= half.transpose().array();
  out.rowwise() += mid.transpose();
  return out;
}

}  // namespace lomap
