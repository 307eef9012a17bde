#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "lomap/dataset.hpp"
#include "lomap/error.hpp"
#include "lomap/io.hpp"
#include "lomap/maze.hpp"
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

std::string temp_path(const char* stem) {
  return std::string("/tmp/lomap_dataset_") + stem + ".bin";
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

Dataset tiny_dataset() {
  Dataset ds;
  ds.horizon = 3;
  ds.state_dim = 2;
  ds.action_dim = 1;
  ds.config_hash = 0xfeed;
  ds.seed = 7;
  ds.rows.resize(2, ds.row_dim());
  ds.rows << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9,
      -1.0, -2.0, -3.0, -4.0, -5.0, -6.0, -7.0, -8.0, -9.0;
  ds.returns.resize(2);
  ds.returns << 1.25, 0.0;
  quantize_f32_in_place(ds.rows);
  quantize_f32_in_place(ds.returns);
  return ds;
}

// Breadth-first shortest distance, used as an independent check on the
// search-based path lengths.
int bfs_distance(const MazeSpec& m, std::pair<int, int> s,
                 std::pair<int, int> g) {
  std::vector<int> dist(static_cast<std::size_t>(m.rows) * m.cols, -1);
  std::deque<std::pair<int, int>> q{s};
  dist[static_cast<std::size_t>(s.first) * m.cols + s.second] = 0;
  while (!q.empty()) {
    const auto [r, c] = q.front();
    q.pop_front();
    const int d = dist[static_cast<std::size_t>(r) * m.cols + c];
    if (std::make_pair(r, c) == g) return d;
    const int dr[4] = {-1, 1, 0, 0};
    const int dc[4] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      const int nr = r + dr[k], nc = c + dc[k];
      if (m.wall(nr, nc)) continue;
      auto& slot = dist[static_cast<std::size_t>(nr) * m.cols + nc];
      if (slot < 0) {
        slot = d + 1;
        q.emplace_back(nr, nc);
      }
    }
  }
  return -1;
}

}  // namespace

TEST_CASE("quantization matches float32 storage") {
  CHECK(quantize_f32(0.1) == static_cast<double>(0.1f));
  CHECK(quantize_f32(0.1) != 0.1);
  CHECK(quantize_f32(quantize_f32(0.1)) == quantize_f32(0.1));
  CHECK(quantize_f32(1.5) == 1.5);
  Eigen::VectorXd v(2);
  v << 0.1, 2.0;
  quantize_f32_in_place(v);
  CHECK(v[0] == static_cast<double>(0.1f));
  CHECK(v[1] == 2.0);
}

TEST_CASE("trajectory views slice rows by timestep") {
  const Dataset ds = tiny_dataset();
  const Trajectory t = ds.trajectory(0);
  CHECK(t.horizon == 3);
  CHECK(t.state(1)[0] == quantize_f32(0.4));
  CHECK(t.action(2)[0] == quantize_f32(0.9));
  CHECK(error_code([&] { ds.trajectory(2); }) == 2);
  CHECK(error_code([&] {
          trajectory_from_row(Eigen::VectorXd::Zero(5), 3, 2, 1);
        }) == 2);
}

TEST_CASE("dataset files round trip byte-identically") {
  const Dataset ds = tiny_dataset();
  const std::string p1 = temp_path("rt1");
  const std::string p2 = temp_path("rt2");
  save_dataset(ds, p1);
  const Dataset back = load_dataset(p1);
  CHECK(back.horizon == ds.horizon);
  CHECK(back.state_dim == ds.state_dim);
  CHECK(back.action_dim == ds.action_dim);
  CHECK(back.config_hash == ds.config_hash);
  CHECK(back.seed == ds.seed);
  CHECK(back.rows == ds.rows);
  CHECK(back.returns == ds.returns);
  save_dataset(back, p2);
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("corrupted dataset files are rejected") {
  const std::string p = temp_path("bad");
  save_dataset(tiny_dataset(), p);
  std::string bytes = slurp(p);
  bytes[bytes.size() / 2] ^= 0x40;
  io::write_text_file(p, bytes);
  CHECK(error_code([&] { load_dataset(p); }) == 3);
  CHECK(error_code([] { load_dataset("/tmp/lomap_no_such_file.bin"); }) == 3);
}

TEST_CASE("save validates shape consistency") {
  Dataset ds = tiny_dataset();
  ds.returns.resize(1);
  CHECK(error_code([&] { save_dataset(ds, temp_path("x")); }) == 2);
  Dataset ds2 = tiny_dataset();
  ds2.horizon = 4;
  CHECK(error_code([&] { save_dataset(ds2, temp_path("x")); }) == 2);
}

TEST_CASE("grid search returns shortest paths with stable ties") {
  const MazeSpec m = MazeSpec::builtin("four_room");
  Rng rng(31);
  const auto free_list = m.free_cells();
  for (int rep = 0; rep < 40; ++rep) {
    const auto s = free_list[rng.uniform_index(free_list.size())];
    const auto g = free_list[rng.uniform_index(free_list.size())];
    const auto path = astar_path(m, s, g);
    REQUIRE(!path.empty());
    CHECK(path.front() == s);
    CHECK(path.back() == g);
    CHECK(static_cast<int>(path.size()) - 1 == bfs_distance(m, s, g));
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      const int dr = std::abs(path[i].first - path[i + 1].first);
      const int dc = std::abs(path[i].second - path[i + 1].second);
      CHECK(dr + dc == 1);  // 4-connected single steps
      CHECK(!m.wall(path[i + 1].first, path[i + 1].second));
    }
    CHECK(astar_path(m, s, g) == path);  // deterministic
  }
  CHECK(error_code([&] { astar_path(m, {0, 0}, {1, 1}); }) == 2);
}

TEST_CASE("unreachable goals yield an empty path") {
  MazeSpec m;  // hand-built: parse would reject the split free space
  m.rows = 1;
  m.cols = 3;
  m.cells = {'.', '#', '.'};
  CHECK(astar_path(m, {0, 0}, {0, 2}).empty());
  CHECK(astar_path(m, {0, 0}, {0, 0}).size() == 1);
}

TEST_CASE("generated episodes are clean and reproducible") {
  const MazeSpec maze = MazeSpec::builtin("corridor");
  DataGenOptions opt;
  opt.episodes = 25;
  opt.horizon = 24;
  const Dataset ds = generate_offline_dataset(maze, opt, 99, 0xabc);
  CHECK(ds.n() == 25);
  CHECK(ds.horizon == 24);
  CHECK(ds.state_dim == 4);
  CHECK(ds.action_dim == 2);
  CHECK(ds.config_hash == 0xabc);
  CHECK(ds.seed == 99);

  std::vector<Trajectory> plans;
  for (Eigen::Index i = 0; i < ds.n(); ++i) plans.push_back(ds.trajectory(i));
  CHECK(artifact_ratio(maze, plans) == 0.0);

  // float32 storage perturbs the transitions by rounding only
  const PointMassEnv env(maze, opt.env);
  for (const Trajectory& t : plans) {
    CHECK(dynamic_mse(env, t) < 1e-9);
  }
  // returns are discounted goal hits, so they stay in [0, 1/(1-gamma)]
  CHECK(ds.returns.minCoeff() >= 0.0);
  CHECK(ds.returns.maxCoeff() <= 1.0 / (1.0 - opt.gamma));
  CHECK(ds.returns.maxCoeff() > 0.0);

  const Dataset again = generate_offline_dataset(maze, opt, 99, 0xabc);
  CHECK(again.rows == ds.rows);
  CHECK(again.returns == ds.returns);
  const Dataset other = generate_offline_dataset(maze, opt, 100, 0xabc);
  CHECK(other.rows != ds.rows);
}

TEST_CASE("generation validates its options") {
  const MazeSpec maze = MazeSpec::builtin("corridor");
  DataGenOptions opt;
  opt.episodes = 0;
  CHECK(error_code([&] { generate_offline_dataset(maze, opt, 1, 0); }) == 2);
  opt.episodes = 1;
  opt.horizon = 1;
  CHECK(error_code([&] { generate_offline_dataset(maze, opt, 1, 0); }) == 2);
  opt.horizon = 24;
  opt.gamma = 0.0;
  CHECK(error_code([&] { generate_offline_dataset(maze, opt, 1, 0); }) == 2);
}

TEST_CASE("eval pairs are distinct free-cell centers") {
  const MazeSpec maze = MazeSpec::builtin("four_room");
  const auto pairs = sample_eval_pairs(maze, 60, 5);
  REQUIRE(pairs.size() == 60);
  for (const EvalPair& p : pairs) {
    CHECK(!maze.wall_at(p.start[0], p.start[1]));
    CHECK(!maze.wall_at(p.goal.x(), p.goal.y()));
    CHECK(p.start[2] == 0.0);
    CHECK(p.start[3] == 0.0);
    // centers sit at half-integer coordinates
    CHECK(p.start[0] - std::floor(p.start[0]) == 0.5);
    CHECK(p.goal.y() - std::floor(p.goal.y()) == 0.5);
    CHECK(p.start.head<2>() != p.goal);
  }
  CHECK(sample_eval_pairs(maze, 60, 5)[10].goal == pairs[10].goal);
  CHECK(error_code([&] { sample_eval_pairs(maze, 0, 5); }) == 2);
}

TEST_CASE("gmm sampling reproduces weights and means") {
  Eigen::MatrixXd means(2, 2);
  means << -2.0, 0.0, 2.0, 0.0;
  Eigen::VectorXd w(2);
  w << 0.3, 0.7;
  const GmmSpec gmm = GmmSpec::make(means, w, 0.0225);
  const long n = 20000;
  const Eigen::MatrixXd rows = sample_gmm_rows(gmm, n, 77);
  REQUIRE(rows.rows() == n);
  REQUIRE(rows.cols() == 2);
  long right = 0;
  for (long i = 0; i < n; ++i) {
    if (rows(i, 0) > 0) ++right;
  }
  const double frac = static_cast<double>(right) / n;
  CHECK(frac == doctest::Approx(0.7).epsilon(0.03));
  // mixture mean along x is 0.3 * (-2) + 0.7 * 2 = 0.8
  CHECK(rows.col(0).mean() == doctest::Approx(0.8).epsilon(0.1));
  CHECK(std::abs(rows.col(1).mean()) < 0.05);
  CHECK(error_code([&] { sample_gmm_rows(gmm, 0, 1); }) == 2);
}

TEST_CASE("subspace samples lie exactly on their affine subspace") {
  const SubspaceSample s = sample_subspace_rows(300, 20, 3, 123);
  REQUIRE(s.rows.rows() == 300);
  REQUIRE(s.rows.cols() == 20);
  REQUIRE(s.basis.rows() == 20);
  REQUIRE(s.basis.cols() == 3);
  const Eigen::MatrixXd gram = s.basis.transpose() * s.basis;
  CHECK((gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  for (int i = 0; i < 300; ++i) {
    const Eigen::VectorXd centered = s.rows.row(i).transpose() - s.mean;
    const Eigen::VectorXd residual =
        centered - s.basis * (s.basis.transpose() * centered);
    CHECK(residual.norm() < 1e-10);
  }
  CHECK(error_code([] { sample_subspace_rows(10, 20, 21, 1); }) == 2);
  CHECK(error_code([] { sample_subspace_rows(0, 20, 3, 1); }) == 2);
}

TEST_CASE("realism scores follow the hypersphere rule") {
  Eigen::MatrixXd refs(4, 2);
  refs << 0, 0, 1, 0, 0, 1, 1, 1;  // unit square, 1-nn radius = 1 everywhere
  Eigen::MatrixXd samples(3, 2);
  samples << 0.5, 0.5, 0, 0, 10, 10;
  const Eigen::VectorXd sc = realism_scores(samples, refs, 1);
  REQUIRE(sc.size() == 3);
  CHECK(sc[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(sc[1] == 1e6);  // exact duplicate of a reference row
  CHECK(sc[2] == doctest::Approx(1.0 / std::hypot(9.0, 9.0)).epsilon(1e-12));
  CHECK(sc[0] > 1.0);
  CHECK(sc[2] < 1.0);

  Eigen::MatrixXd dup = Eigen::MatrixXd::Zero(4, 2);
  CHECK(error_code([&] { realism_scores(samples, dup, 1); }) == 3);
  CHECK(error_code([&] { realism_scores(samples, refs, 4); }) == 2);
  CHECK(error_code([&] { realism_scores(samples, refs.leftCols(1), 1); }) == 2);
}

TEST_CASE("goal return discounts post-initial hits") {
  Eigen::MatrixXd states(4, 4);
  states << 0, 0, 0, 0,   // t = 0 never counts
      5, 5, 0, 0,         // hit, weight 1
      9, 9, 0, 0,         // miss
      5.2, 5.0, 0, 0;     // hit, weight gamma^2
  const Eigen::Vector2d goal(5, 5);
  const double g = discounted_goal_return(states, goal, 0.9, 0.25);
  CHECK(g == doctest::Approx(1.0 + 0.81).epsilon(1e-12));
  CHECK(discounted_goal_return(states, {50, 50}, 0.9, 0.25) == 0.0);
  CHECK(error_code([&] {
          discounted_goal_return(states.topRows(1), goal, 0.9, 0.25);
        }) == 2);
}

TEST_CASE("episode windows tile each row at stride offsets") {
  const Dataset ds = tiny_dataset();  // horizon 3, pair dim 3
  const Eigen::MatrixXd w = window_rows(ds, 2, 1);
  REQUIRE(w.rows() == 4);  // offsets {0, 1} per episode
  REQUIRE(w.cols() == 6);
  CHECK(w.row(0) == ds.rows.row(0).segment(0, 6));
  CHECK(w.row(1) == ds.rows.row(0).segment(3, 6));
  CHECK(w.row(2) == ds.rows.row(1).segment(0, 6));
  const Eigen::MatrixXd whole = window_rows(ds, 3, 5);
  REQUIRE(whole.rows() == 2);  // only offset 0 fits
  CHECK(whole.row(0) == ds.rows.row(0));
  CHECK(error_code([&] { window_rows(ds, 4, 1); }) == 2);
  CHECK(error_code([&] { window_rows(ds, 2, 0); }) == 2);
}

TEST_CASE("coarse rows keep states sampled every stride pairs") {
  const Dataset ds = tiny_dataset();  // horizon 3, state 2, action 1
  const Eigen::MatrixXd hi = highlevel_rows(ds, 2, 2);  // t = 0 and t = 2
  REQUIRE(hi.rows() == 2);
  REQUIRE(hi.cols() == 4);
  CHECK(hi.row(0).segment(0, 2) == ds.rows.row(0).segment(0, 2));
  CHECK(hi.row(0).segment(2, 2) == ds.rows.row(0).segment(6, 2));
  CHECK(error_code([&] { highlevel_rows(ds, 2, 3); }) == 2);  // overruns
  CHECK(error_code([&] { highlevel_rows(ds, 0, 2); }) == 2);
  CHECK(error_code([&] { highlevel_rows(ds, 1, 1); }) == 2);
}

TEST_CASE("artifact ratio counts colliding plans") {
  const MazeSpec m = MazeSpec::builtin("corridor");
  Trajectory ok(2, 4, 2);
  ok.state(0) << 1.5, 1.5, 0, 0;
  ok.state(1) << 2.5, 1.5, 0, 0;
  Trajectory bad = ok;
  bad.state(1) << 2.5, 2.5, 0, 0;
  CHECK(artifact_ratio(m, {ok, ok, bad, bad}) == 0.5);
  CHECK(artifact_ratio(m, {ok}) == 0.0);
  CHECK(error_code([&] { artifact_ratio(m, {}); }) == 2);
}
