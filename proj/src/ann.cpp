#include "lomap/ann.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "lomap/error.hpp"
#include "lomap/io.hpp"

namespace lomap {

namespace {

constexpr std::uint32_t kIndexVersion = 1;

// Row-major float32 view of the data; matches how datasets quantize on disk,
// so an index built from a saved dataset reattaches to the reloaded matrix.
std::uint64_t hash_rows_f32(const Eigen::MatrixXd& rows) {
  std::uint64_t h = io::kFnvOffset;
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      const float f = static_cast<float>(rows(r, c));
      unsigned char bytes[sizeof(float)];
      std::memcpy(bytes, &f, sizeof(float));
      for (unsigned char b : bytes) {
        h ^= b;
        h *= io::kFnvPrime;
      }
    }
  }
  return h;
}

Eigen::MatrixXd unit_rows(const Eigen::MatrixXd& rows) {
  Eigen::MatrixXd out = rows;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double n = out.row(r).norm();
    if (n > 0) out.row(r) /= n;
  }
  return out;
}

}  // namespace

std::uint64_t AnnIndex::fingerprint(const Eigen::MatrixXd& rows) {
  return hash_rows_f32(rows);
}

AnnIndex AnnIndex::build(const Eigen::MatrixXd& rows, int n_list,
                         std::uint64_t seed) {
  const Eigen::Index N = rows.rows();
  const Eigen::Index d = rows.cols();
  require_param(N >= 1 && d >= 1, "index needs a non-empty row matrix");
  require_param(rows.allFinite(), "index rows must be finite");
  if (n_list == 0) {
    n_list = static_cast<int>(std::lround(std::sqrt(static_cast<double>(N))));
    n_list = std::max(1, std::min<int>(n_list, static_cast<int>(N)));
  }
  require_param(n_list >= 1 && n_list <= N,
                "list count must be in [1, n_rows]");

  AnnIndex idx;
  idx.rows_ = rows;
  idx.row_norms_.resize(N);
  for (Eigen::Index r = 0; r < N; ++r) idx.row_norms_[r] = rows.row(r).norm();
  idx.build_seed_ = seed;

  const Eigen::MatrixXd xn = unit_rows(rows);

  // Seeded init: a partial Fisher-Yates draws n_list distinct rows.
  Rng rng(mix_seed(seed, 0xA11C));
  std::vector<int> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), 0);
  for (int t = 0; t < n_list; ++t) {
    const std::uint64_t span = static_cast<std::uint64_t>(N - t);
    const std::size_t pick =
        static_cast<std::size_t>(t) + static_cast<std::size_t>(rng.uniform_index(span));
    std::swap(order[static_cast<std::size_t>(t)], order[pick]);
  }
  idx.centroids_.resize(n_list, d);
  for (int l = 0; l < n_list; ++l) {
    idx.centroids_.row(l) = xn.row(order[static_cast<std::size_t>(l)]);
  }

  std::vector<int> assign(static_cast<std::size_t>(N), -1);
  std::vector<int> prev(assign);
  const int max_iters = 25;
  for (int iter = 0; iter <= max_iters; ++iter) {
    const Eigen::MatrixXd scores = xn * idx.centroids_.transpose();
    for (Eigen::Index r = 0; r < N; ++r) {
      int best = 0;
      double best_s = scores(r, 0);
      for (int l = 1; l < n_list; ++l) {
        if (scores(r, l) > best_s) {
          best_s = scores(r, l);
          best = l;
        }
      }
      assign[static_cast<std::size_t>(r)] = best;
    }
    if (iter == max_iters || assign == prev) break;
    prev = assign;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(n_list, d);
    std::vector<int> counts(static_cast<std::size_t>(n_list), 0);
    for (Eigen::Index r = 0; r < N; ++r) {
      sums.row(assign[static_cast<std::size_t>(r)]) += xn.row(r);
      ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(r)])];
    }
    std::vector<char> grabbed(static_cast<std::size_t>(N), 0);
    for (int l = 0; l < n_list; ++l) {
      bool dead = counts[static_cast<std::size_t>(l)] == 0;
      if (!dead) {
        const double nn = sums.row(l).norm();
        if (nn > 0) {
          idx.centroids_.row(l) = sums.row(l) / nn;
        } else {
          dead = true;
        }
      }
      if (dead) {
        // Reseed on the row least similar to its own centroid.
        int worst = -1;
        double worst_s = std::numeric_limits<double>::infinity();
        for (Eigen::Index r = 0; r < N; ++r) {
          if (grabbed[static_cast<std::size_t>(r)]) continue;
          const double s = xn.row(r).dot(
              idx.centroids_.row(assign[static_cast<std::size_t>(r)]));
          if (s < worst_s) {
            worst_s = s;
            worst = static_cast<int>(r);
          }
        }
        if (worst >= 0) {
          grabbed[static_cast<std::size_t>(worst)] = 1;
          idx.centroids_.row(l) = xn.row(worst);
        }
      }
    }
  }

  idx.lists_.assign(static_cast<std::size_t>(n_list), {});
  for (Eigen::Index r = 0; r < N; ++r) {
    idx.lists_[static_cast<std::size_t>(assign[static_cast<std::size_t>(r)])]
        .push_back(static_cast<int>(r));
  }
  return idx;
}

std::vector<std::pair<int, double>> AnnIndex::knn(const Eigen::VectorXd& query,
                                                  int k, int n_probe) const {
  require_param(n_rows() >= 1, "index is empty");
  require_param(query.size() == dim(), "query dimension mismatch");
  require_param(query.allFinite(), "query must be finite");
  require_param(k >= 1, "k must be positive");
  if (n_probe == 0) n_probe = default_probe();
  require_param(n_probe >= 1 && n_probe <= n_list(),
                "n_probe must be in [1, n_list]");

  const double qn = query.norm();

  std::vector<int> probe(static_cast<std::size_t>(n_list()));
  std::iota(probe.begin(), probe.end(), 0);
  std::vector<double> cscore(static_cast<std::size_t>(n_list()));
  for (int l = 0; l < n_list(); ++l) {
    cscore[static_cast<std::size_t>(l)] =
        qn > 0 ? query.dot(centroids_.row(l)) / qn
               : -(query - centroids_.row(l).transpose()).norm();
  }
  std::sort(probe.begin(), probe.end(), [&](int a, int b) {
    const double sa = cscore[static_cast<std::size_t>(a)];
    const double sb = cscore[static_cast<std::size_t>(b)];
    if (sa != sb) return sa > sb;
    return a < b;
  });

  std::vector<std::pair<double, int>> cand;
  for (int p = 0; p < n_probe; ++p) {
    for (int id : lists_[static_cast<std::size_t>(probe[static_cast<std::size_t>(p)])]) {
      double s;
      if (qn > 0) {
        const double rn = row_norms_[id];
        s = rn > 0 ? query.dot(rows_.row(id)) / (qn * rn)
                   : -std::numeric_limits<double>::infinity();
      } else {
        s = -(query - rows_.row(id).transpose()).norm();
      }
      cand.emplace_back(s, id);
    }
  }
  std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  const std::size_t take = std::min<std::size_t>(cand.size(),
                                                 static_cast<std::size_t>(k));
  std::vector<std::pair<int, double>> out;
  out.reserve(take);
  for (std::size_t t = 0; t < take; ++t) {
    out.emplace_back(cand[t].second, cand[t].first);
  }
  return out;
}

Eigen::MatrixXd AnnIndex::gather(
    const std::vector<std::pair<int, double>>& hits) const {
  require_param(!hits.empty(), "cannot gather zero rows");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(hits.size()), dim());
  for (std::size_t t = 0; t < hits.size(); ++t) {
    const int id = hits[t].first;
    require_param(id >= 0 && id < n_rows(), "row id out of range");
    out.row(static_cast<Eigen::Index>(t)) = rows_.row(id);
  }
  return out;
}

void AnnIndex::save(const std::string& path, std::uint64_t config_hash,
                    std::uint64_t seed) const {
  io::Writer w;
  w.magic("LMPI");
  w.u32(kIndexVersion);
  w.u64(config_hash);
  w.u64(seed);
  w.u64(hash_rows_f32(rows_));
  w.u32(static_cast<std::uint32_t>(n_list()));
  w.u32(static_cast<std::uint32_t>(dim()));
  w.u64(static_cast<std::uint64_t>(n_rows()));
  for (Eigen::Index l = 0; l < centroids_.rows(); ++l) {
    for (Eigen::Index c = 0; c < centroids_.cols(); ++c) {
      w.f64(centroids_(l, c));
    }
  }
  // Offset table (exclusive prefix sums plus total), then the id blocks.
  std::uint64_t off = 0;
  for (const auto& list : lists_) {
    w.u64(off);
    off += list.size();
  }
  w.u64(off);
  for (const auto& list : lists_) {
    for (int id : list) w.u32(static_cast<std::uint32_t>(id));
  }
  w.finish(path);
}

AnnIndex AnnIndex::load(const std::string& path, const Eigen::MatrixXd& rows) {
  io::Reader r(path);
  r.verify_checksum();
  r.expect_magic("LMPI");
  const std::uint32_t version = r.u32();
  require_data(version == kIndexVersion, "unsupported index version");
  r.u64();  // config hash, informational
  const std::uint64_t seed = r.u64();
  const std::uint64_t fp = r.u64();
  const std::uint32_t nl = r.u32();
  const std::uint32_t d = r.u32();
  const std::uint64_t n = r.u64();
  require_data(rows.rows() == static_cast<Eigen::Index>(n) &&
                   rows.cols() == static_cast<Eigen::Index>(d),
               "index shape does not match the attached data");
  require_data(fp == hash_rows_f32(rows),
               "index was built over different data");
  require_data(nl >= 1 && nl <= n, "corrupt list count");

  AnnIndex idx;
  idx.rows_ = rows;
  idx.row_norms_.resize(rows.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    idx.row_norms_[i] = rows.row(i).norm();
  }
  idx.build_seed_ = seed;
  idx.centroids_.resize(nl, d);
  for (std::uint32_t l = 0; l < nl; ++l) {
    for (std::uint32_t c = 0; c < d; ++c) idx.centroids_(l, c) = r.f64();
  }
  std::vector<std::uint64_t> offsets(nl + 1);
  for (std::uint32_t l = 0; l <= nl; ++l) {
    offsets[l] = r.u64();
    require_data(offsets[l] <= n && (l == 0 || offsets[l] >= offsets[l - 1]),
                 "corrupt list offsets");
  }
  require_data(offsets[0] == 0 && offsets[nl] == n, "corrupt list offsets");
  idx.lists_.assign(nl, {});
  std::vector<char> seen(n, 0);
  for (std::uint32_t l = 0; l < nl; ++l) {
    const std::uint64_t count = offsets[l + 1] - offsets[l];
    auto& list = idx.lists_[l];
    list.reserve(count);
    for (std::uint64_t t = 0; t < count; ++t) {
      const std::uint32_t id = r.u32();
      require_data(id < n, "row id out of range");
      require_data(!seen[id], "row assigned to two lists");
      seen[id] = 1;
      list.push_back(static_cast<int>(id));
    }
    require_data(std::is_sorted(list.begin(), list.end()), "unsorted list");
  }
  require_data(r.at_footer(), "trailing bytes after index payload");
  return idx;
}

}  // namespace lomap
