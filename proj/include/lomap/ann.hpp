#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "lomap/rng.hpp"

namespace lomap {

// Inverted-file nearest-neighbor index over row vectors. Lists are formed by
// spherical k-means; queries score candidates by cosine similarity, with a
// Euclidean fallback when the query has zero norm. Probing every list is
// exactly a linear scan: candidate scores use one shared expression, and the
// ordering (score desc, row id asc) is a total order, so results match a
// brute-force scan bit for bit.
class AnnIndex {
 public:
  AnnIndex() = default;

  // n_list = 0 picks clamp(round(sqrt(N)), 1, N).
  static AnnIndex build(const Eigen::MatrixXd& rows, int n_list,
                        std::uint64_t seed);

  // Up to k (row id, similarity) pairs, best first. 1 <= n_probe <=
  // n_list(); n_probe = 0 uses the default ceil(n_list / 4).
  std::vector<std::pair<int, double>> knn(const Eigen::VectorXd& query, int k,
                                          int n_probe) const;

  Eigen::MatrixXd gather(const std::vector<std::pair<int, double>>& hits) const;

  int n_rows() const { return static_cast<int>(rows_.rows()); }
  int dim() const { return static_cast<int>(rows_.cols()); }
  int n_list() const { return static_cast<int>(centroids_.rows()); }
  int default_probe() const { return (n_list() + 3) / 4; }
  const Eigen::MatrixXd& rows() const { return rows_; }

  // The file stores list structure and centroids, not the rows; load
  // reattaches the same row matrix and rejects any other via a fingerprint
  // of the float32-quantized data.
  void save(const std::string& path, std::uint64_t config_hash,
            std::uint64_t seed) const;
  static AnnIndex load(const std::string& path, const Eigen::MatrixXd& rows);

  static std::uint64_t fingerprint(const Eigen::MatrixXd& rows);

 private:
  Eigen::MatrixXd rows_;
  Eigen::VectorXd row_norms_;
  Eigen::MatrixXd centroids_;            // n_list x dim, unit rows when possible
  std::vector<std::vector<int>> lists_;  // ascending row ids per centroid
  std::uint64_t build_seed_ = 0;
};

}  // namespace lomap
