#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "lomap/ann.hpp"
#include "lomap/dataset.hpp"
#include "lomap/denoisers.hpp"
#include "lomap/error.hpp"
#include "lomap/io.hpp"
#include "lomap/rng.hpp"

using namespace lomap;

namespace {

template <typename Fn>
int error_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return static_cast<int>(e.kind());
  }
  return 0;
}

// Brute-force oracle using the same score expression as the index, so a
// full-probe query must reproduce it bit for bit.
std::vector<std::pair<int, double>> scan_knn(const Eigen::MatrixXd& rows,
                                             const Eigen::VectorXd& query,
                                             int k) {
  const double qn = query.norm();
  std::vector<std::pair<double, int>> cand;
  cand.reserve(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    double s;
    if (qn > 0) {
      const double rn = rows.row(i).norm();
      s = rn > 0 ? query.dot(rows.row(i)) / (qn * rn)
                 : -std::numeric_limits<double>::infinity();
    } else {
      s = -(query - rows.row(i).transpose()).norm();
    }
    cand.emplace_back(s, static_cast<int>(i));
  }
  std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::pair<int, double>> out;
  const std::size_t take =
      std::min<std::size_t>(cand.size(), static_cast<std::size_t>(k));
  for (std::size_t t = 0; t < take; ++t) {
    out.emplace_back(cand[t].second, cand[t].first);
  }
  return out;
}

Eigen::MatrixXd clustered_rows(long n, int dim, int comps, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0xC1));
  Eigen::MatrixXd means(comps, dim);
  for (int c = 0; c < comps; ++c) {
    for (int j = 0; j < dim; ++j) means(c, j) = 6.0 * rng.gaussian();
  }
  const GmmSpec gmm =
      GmmSpec::make(means, Eigen::VectorXd::Ones(comps), 0.04);
  return sample_gmm_rows(gmm, n, seed);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("probing every list reproduces the linear scan bit for bit") {
  const Eigen::MatrixXd rows = clustered_rows(2000, 16, 12, 41);
  const AnnIndex idx = AnnIndex::build(rows, 24, 7);
  REQUIRE(idx.n_list() == 24);
  Rng rng(55);
  int exact_matches = 0;
  for (int q = 0; q < 300; ++q) {
    Eigen::VectorXd query(16);
    for (int j = 0; j < 16; ++j) query[j] = 8.0 * rng.gaussian();
    const auto got = idx.knn(query, 10, idx.n_list());
    const auto want = scan_knn(rows, query, 10);
    REQUIRE(got.size() == want.size());
    bool same = true;
    for (std::size_t t = 0; t < got.size(); ++t) {
      same = same && got[t].first == want[t].first &&
             got[t].second == want[t].second;
    }
    exact_matches += same ? 1 : 0;
  }
  CHECK(exact_matches == 300);
}

TEST_CASE("equal scores break ties toward lower row ids") {
  Eigen::MatrixXd rows(5, 3);
  rows << 1, 0, 0,
      0, 1, 0,
      1, 0, 0,  // duplicate of row 0
      1, 0, 0,  // duplicate of row 0
      0, 0, 1;
  const AnnIndex idx = AnnIndex::build(rows, 1, 3);
  Eigen::VectorXd q(3);
  q << 2, 0, 0;
  const auto hits = idx.knn(q, 3, 1);
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].first == 0);
  CHECK(hits[1].first == 2);
  CHECK(hits[2].first == 3);
  CHECK(hits[0].second == hits[2].second);
}

TEST_CASE("zero-norm queries fall back to euclidean distance") {
  Eigen::MatrixXd rows(3, 2);
  rows << 1, 0,
      3, 0,
      0.5, 0;
  const AnnIndex idx = AnnIndex::build(rows, 1, 3);
  const auto hits = idx.knn(Eigen::VectorXd::Zero(2), 3, 1);
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].first == 2);
  CHECK(hits[1].first == 0);
  CHECK(hits[2].first == 1);
  CHECK(hits[0].second == -0.5);

  // zero-norm rows rank last under a direction query
  Eigen::MatrixXd rows2(2, 2);
  rows2 << 0, 0,
      1, 0;
  const AnnIndex idx2 = AnnIndex::build(rows2, 1, 3);
  Eigen::VectorXd q(2);
  q << 1, 0;
  const auto h2 = idx2.knn(q, 2, 1);
  CHECK(h2[0].first == 1);
  CHECK(h2[1].first == 0);
}

TEST_CASE("partial probes keep high recall on clustered data") {
  const Eigen::MatrixXd rows = clustered_rows(4000, 16, 20, 91);
  const AnnIndex idx = AnnIndex::build(rows, 0, 13);
  CHECK(idx.n_list() == 63);  // round(sqrt(4000))
  CHECK(idx.default_probe() == 16);
  Rng rng(7);
  int hit = 0, total = 0;
  for (int q = 0; q < 200; ++q) {
    // queries near the data manifold: a perturbed dataset row
    Eigen::VectorXd query = rows.row(rng.uniform_index(rows.rows())).transpose();
    for (int j = 0; j < 16; ++j) query[j] += 0.1 * rng.gaussian();
    const auto approx = idx.knn(query, 10, 0);
    const auto exact = scan_knn(rows, query, 10);
    std::set<int> truth;
    for (const auto& e : exact) truth.insert(e.first);
    for (const auto& a : approx) hit += truth.count(a.first) ? 1 : 0;
    total += static_cast<int>(exact.size());
  }
  const double recall = static_cast<double>(hit) / total;
  CHECK(recall >= 0.9);
}

TEST_CASE("gather returns the referenced rows in hit order") {
  Eigen::MatrixXd rows(3, 2);
  rows << 1, 2,
      3, 4,
      5, 6;
  const AnnIndex idx = AnnIndex::build(rows, 1, 1);
  const Eigen::MatrixXd got = idx.gather({{2, 0.0}, {0, 0.0}});
  REQUIRE(got.rows() == 2);
  CHECK(got.row(0) == rows.row(2));
  CHECK(got.row(1) == rows.row(0));
  CHECK(error_code([&] { idx.gather({}); }) == 2);
  CHECK(error_code([&] { idx.gather({{3, 0.0}}); }) == 2);
}

TEST_CASE("build and query validate their inputs") {
  Eigen::MatrixXd rows(4, 2);
  rows << 1, 0, 0, 1, -1, 0, 0, -1;
  CHECK(error_code([&] { AnnIndex::build(Eigen::MatrixXd(), 1, 1); }) == 2);
  CHECK(error_code([&] { AnnIndex::build(rows, 5, 1); }) == 2);
  Eigen::MatrixXd nan_rows = rows;
  nan_rows(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK(error_code([&] { AnnIndex::build(nan_rows, 1, 1); }) == 2);

  const AnnIndex idx = AnnIndex::build(rows, 2, 1);
  Eigen::VectorXd q(2);
  q << 1, 1;
  CHECK(error_code([&] { idx.knn(q, 0, 1); }) == 2);
  CHECK(error_code([&] { idx.knn(q, 1, 3); }) == 2);
  CHECK(error_code([&] { idx.knn(Eigen::VectorXd::Zero(3), 1, 1); }) == 2);
  // k beyond the row count truncates instead of failing
  CHECK(idx.knn(q, 10, 2).size() == 4);
}

TEST_CASE("saved indexes reattach only to their own rows") {
  const Eigen::MatrixXd rows = clustered_rows(500, 8, 6, 3);
  const AnnIndex idx = AnnIndex::build(rows, 10, 17);
  const std::string path = "/tmp/lomap_ann_rt.bin";
  idx.save(path, 0xBEEF, 17);
  const AnnIndex back = AnnIndex::load(path, rows);
  CHECK(back.n_rows() == idx.n_rows());
  CHECK(back.n_list() == idx.n_list());

  Rng rng(71);
  for (int q = 0; q < 50; ++q) {
    Eigen::VectorXd query(8);
    for (int j = 0; j < 8; ++j) query[j] = rng.gaussian();
    const auto a = idx.knn(query, 5, 4);
    const auto b = back.knn(query, 5, 4);
    REQUIRE(a.size() == b.size());
    for (std::size_t t = 0; t < a.size(); ++t) {
      CHECK(a[t].first == b[t].first);
      CHECK(a[t].second == b[t].second);
    }
  }

  Eigen::MatrixXd other = rows;
  other(0, 0) += 1.0;
  CHECK(error_code([&] { AnnIndex::load(path, other); }) == 3);
  CHECK(error_code([&] { AnnIndex::load(path, rows.topRows(10)); }) == 3);

  std::string bytes = slurp(path);
  bytes[bytes.size() / 3] ^= 0x10;
  io::write_text_file(path, bytes);
  CHECK(error_code([&] { AnnIndex::load(path, rows); }) == 3);
}

TEST_CASE("fingerprints track float32 content") {
  Eigen::MatrixXd rows(2, 2);
  rows << 0.1, 0.2, 0.3, 0.4;
  Eigen::MatrixXd quant = rows;
  quantize_f32_in_place(quant);
  CHECK(AnnIndex::fingerprint(rows) == AnnIndex::fingerprint(quant));
  Eigen::MatrixXd other = rows;
  other(1, 1) = 0.5;
  CHECK(AnnIndex::fingerprint(rows) != AnnIndex::fingerprint(other));
}
