#pragma once

#include <Eigen/Dense>

namespace lomap {

// Per-dimension affine map used to put trajectory data into roughly [-1, 1]
// before diffusion. x_norm = (x - mid) / half. Dimensions with no spread map
// to 0 (half floored at 1e-8).
struct Normalizer {
  Eigen::VectorXd mid;
  Eigen::VectorXd half;

  static Normalizer fit(const Eigen::MatrixXd& rows);
  static Normalizer identity(int dim);

  int dim() const { return static_cast<int>(mid.size()); }

  Eigen::VectorXd normalize(const Eigen::VectorXd& x) const {
    return (x - mid).cwiseQuotient(half);
  }
  Eigen::VectorXd denormalize(const Eigen::VectorXd& z) const {
    return z.cwiseProduct(half) + mid;
  }
  Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& rows) const;
  Eigen::MatrixXd denormalize_rows(const Eigen::MatrixXd& rows) const;

  // normalize a contiguous slice [offset, offset+len) of the flat layout
  Eigen::VectorXd normalize_segment(const Eigen::VectorXd& v, int offset) const {
    return (v - mid.segment(offset, v.size()))
        .cwiseQuotient(half.segment(offset, v.size()));
  }
  Eigen::VectorXd denormalize_segment(const Eigen::VectorXd& v,
                                      int offset) const {
    return v.cwiseProduct(half.segment(offset, v.size())) +
           mid.segment(offset, v.size());
  }
};

}  // namespace lomap
