#include "lomap/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "lomap/error.hpp"
#include "lomap/io.hpp"
#include "lomap/rng.hpp"

namespace lomap {

namespace {

constexpr std::uint32_t kDatasetVersion = 1;

}  // namespace

Trajectory Dataset::trajectory(Eigen::Index i) const {
  require_param(i >= 0 && i < n(), "episode index out of range");
  return trajectory_from_row(rows.row(i).transpose(), horizon, state_dim,
                             action_dim);
}

Trajectory trajectory_from_row(const Eigen::VectorXd& row, int horizon,
                               int state_dim, int action_dim) {
  Trajectory t;
  t.horizon = horizon;
  t.state_dim = state_dim;
  t.action_dim = action_dim;
  require_param(row.size() ==
                    static_cast<Eigen::Index>(horizon) * (state_dim + action_dim),
                "row length does not match trajectory shape");
  t.flat = row;
  return t;
}

double quantize_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

void quantize_f32_in_place(Eigen::MatrixXd& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      m(r, c) = quantize_f32(m(r, c));
    }
  }
}

void quantize_f32_in_place(Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = quantize_f32(v[i]);
}

void save_dataset(const Dataset& ds, const std::string& path) {
  require_param(ds.n() >= 0 && ds.rows.cols() == ds.row_dim(),
                "row width mismatch");
  require_param(ds.returns.size() == ds.n(), "returns count mismatch");
  require_param(ds.horizon >= 1 && ds.state_dim >= 1 && ds.action_dim >= 0,
                "trajectory shape must be positive");
  io::Writer w;
  w.magic("LMPD");
  w.u32(kDatasetVersion);
  w.u64(ds.config_hash);
  w.u64(ds.seed);
  w.u64(static_cast<std::uint64_t>(ds.n()));
  w.u32(static_cast<std::uint32_t>(ds.horizon));
  w.u32(static_cast<std::uint32_t>(ds.state_dim));
  w.u32(static_cast<std::uint32_t>(ds.action_dim));
  for (Eigen::Index r = 0; r < ds.n(); ++r) {
    for (Eigen::Index c = 0; c < ds.rows.cols(); ++c) {
      w.f32(static_cast<float>(ds.rows(r, c)));
    }
  }
  for (Eigen::Index i = 0; i < ds.returns.size(); ++i) {
    w.f32(static_cast<float>(ds.returns[i]));
  }
  w.finish(path);
}

Dataset load_dataset(const std::string& path) {
  io::Reader r(path);
  r.verify_checksum();
  r.expect_magic("LMPD");
  const std::uint32_t version = r.u32();
  require_data(version == kDatasetVersion, "unsupported dataset version");
  Dataset ds;
  ds.config_hash = r.u64();
  ds.seed = r.u64();
  const std::uint64_t n = r.u64();
  ds.horizon = static_cast<int>(r.u32());
  ds.state_dim = static_cast<int>(r.u32());
  ds.action_dim = static_cast<int>(r.u32());
  require_data(n <= (1u << 30) && ds.horizon >= 1 && ds.state_dim >= 1 &&
                   ds.action_dim >= 0,
               "corrupt dataset header");
  ds.rows.resize(static_cast<Eigen::Index>(n), ds.row_dim());
  for (Eigen::Index rr = 0; rr < ds.rows.rows(); ++rr) {
    for (Eigen::Index c = 0; c < ds.rows.cols(); ++c) {
      ds.rows(rr, c) = static_cast<double>(r.f32());
    }
  }
  ds.returns.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < ds.returns.size(); ++i) {
    ds.returns[i] = static_cast<double>(r.f32());
  }
  require_data(r.at_footer(), "trailing bytes after dataset payload");
  return ds;
}

std::vector<std::pair<int, int>> astar_path(const MazeSpec& maze,
                                            std::pair<int, int> start,
                                            std::pair<int, int> goal) {
  require_param(!maze.wall(start.first, start.second), "start cell is a wall");
  require_param(!maze.wall(goal.first, goal.second), "goal cell is a wall");
  const int R = maze.rows, C = maze.cols;
  const auto id = [C](int r, int c) { return r * C + c; };
  const int start_id = id(start.first, start.second);
  const int goal_id = id(goal.first, goal.second);

  std::vector<int> g(static_cast<std::size_t>(R) * C,
                     std::numeric_limits<int>::max());
  std::vector<int> parent(static_cast<std::size_t>(R) * C, -1);
  const auto h = [&](int r, int c) {
    return std::abs(r - goal.first) + std::abs(c - goal.second);
  };
  // (f, cell id): the id component makes expansion order deterministic.
  using Node = std::pair<int, int>;
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;
  g[static_cast<std::size_t>(start_id)] = 0;
  open.emplace(h(start.first, start.second), start_id);
  while (!open.empty()) {
    const auto [f, cur] = open.top();
    open.pop();
    const int r = cur / C, c = cur % C;
    if (f > g[static_cast<std::size_t>(cur)] + h(r, c)) continue;
    if (cur == goal_id) break;
    const int dr[4] = {-1, 1, 0, 0};
    const int dc[4] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      const int nr = r + dr[k], nc = c + dc[k];
      if (maze.wall(nr, nc)) continue;
      const int nid = id(nr, nc);
      const int ng = g[static_cast<std::size_t>(cur)] + 1;
      if (ng < g[static_cast<std::size_t>(nid)]) {
        g[static_cast<std::size_t>(nid)] = ng;
        parent[static_cast<std::size_t>(nid)] = cur;
        open.emplace(ng + h(nr, nc), nid);
      }
    }
  }
  if (g[static_cast<std::size_t>(goal_id)] == std::numeric_limits<int>::max()) {
    return {};
  }
  std::vector<std::pair<int, int>> path;
  for (int cur = goal_id; cur != -1; cur = parent[static_cast<std::size_t>(cur)]) {
    path.emplace_back(cur / C, cur % C);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

namespace {

struct Rollout {
  Eigen::MatrixXd states;   // (horizon + 1) x 4, includes the final state
  Eigen::MatrixXd actions;  // horizon x 2, as executed (post-clamp)
};

Rollout roll_episode(const PointMassEnv& env, const DataGenOptions& opt,
                     const std::vector<std::pair<int, int>>& path, Rng& rng) {
  const MazeSpec& maze = env.maze();
  Rollout out;
  out.states.resize(opt.horizon + 1, 4);
  out.actions.resize(opt.horizon, 2);
  const Eigen::Vector2d start = maze.center(path.front().first, path.front().second);
  Eigen::Vector4d s(start.x(), start.y(), 0.0, 0.0);
  std::size_t wp = 0;
  for (int t = 0; t < opt.horizon; ++t) {
    const Eigen::Vector2d pos = s.head<2>();
    while (wp + 1 < path.size() &&
           (pos - maze.center(path[wp].first, path[wp].second)).norm() <=
               opt.waypoint_radius) {
      ++wp;
    }
    const Eigen::Vector2d target = maze.center(path[wp].first, path[wp].second);
    Eigen::Vector2d a = opt.kp * (target - pos) -
                        opt.kd * Eigen::Vector2d(s[2], s[3]);
    a.x() += opt.action_noise * rng.gaussian();
    a.y() += opt.action_noise * rng.gaussian();
    const double an = a.norm();
    if (an > opt.env.amax) a *= opt.env.amax / an;
    out.states.row(t) = s.transpose();
    out.actions.row(t) = a.transpose();
    s = env.step(s, a);
  }
  out.states.row(opt.horizon) = s.transpose();
  return out;
}

bool rollout_collides(const MazeSpec& maze, const Rollout& roll) {
  Eigen::Vector2d prev = roll.states.row(0).head<2>().transpose();
  if (maze.wall_at(prev.x(), prev.y())) return true;
  for (Eigen::Index t = 1; t < roll.states.rows(); ++t) {
    const Eigen::Vector2d cur = roll.states.row(t).head<2>().transpose();
    if (segment_hits_wall(maze, prev, cur)) return true;
    prev = cur;
  }
  return false;
}

}  // namespace

Dataset generate_offline_dataset(const MazeSpec& maze,
                                 const DataGenOptions& opt, std::uint64_t seed,
                                 std::uint64_t config_hash) {
  require_param(opt.episodes >= 1, "episode count must be positive");
  require_param(opt.horizon >= 2, "horizon must be at least 2");
  require_param(opt.max_attempts >= 1, "attempt budget must be positive");
  require_param(opt.gamma > 0 && opt.gamma <= 1, "discount must be in (0, 1]");
  const auto starts = maze.start_region();
  const auto goals = maze.goal_region();
  require_data(starts.size() >= 1 && goals.size() >= 1 &&
                   maze.free_count() >= 2,
               "maze needs start and goal cells");

  const PointMassEnv env(maze, opt.env);
  Dataset ds;
  ds.horizon = opt.horizon;
  ds.state_dim = 4;
  ds.action_dim = 2;
  ds.config_hash = config_hash;
  ds.seed = seed;
  ds.rows.resize(opt.episodes, ds.row_dim());
  ds.returns.resize(opt.episodes);

  for (int ep = 0; ep < opt.episodes; ++ep) {
    bool done = false;
    for (int attempt = 0; attempt < opt.max_attempts && !done; ++attempt) {
      Rng rng(mix_seed(seed, (static_cast<std::uint64_t>(ep) << 16) |
                                 static_cast<std::uint64_t>(attempt)));
      const auto start = starts[rng.uniform_index(starts.size())];
      const auto goal_cell = goals[rng.uniform_index(goals.size())];
      if (start == goal_cell) continue;
      const auto path = astar_path(maze, start, goal_cell);
      if (path.empty()) continue;
      if (opt.max_path_len > 0 &&
          static_cast<double>(path.size() - 1) > opt.max_path_len) {
        continue;
      }
      Rollout roll = roll_episode(env, opt, path, rng);
      // Accept or reject the float32 values that will actually be stored;
      // wall-face clipping leaves margins smaller than a float32 ulp, so
      // checking the raw rollout would let rounded states land inside walls.
      quantize_f32_in_place(roll.states);
      quantize_f32_in_place(roll.actions);
      const Eigen::Vector2d goal = maze.center(path.back().first,
                                               path.back().second);
      const Eigen::Vector2d final_pos =
          roll.states.row(opt.horizon).head<2>().transpose();
      if ((final_pos - goal).norm() > 1.0) continue;
      if (rollout_collides(maze, roll)) continue;

      for (int t = 0; t < opt.horizon; ++t) {
        const Eigen::Index base = static_cast<Eigen::Index>(t) * 6;
        ds.rows.row(ep).segment(base, 4) = roll.states.row(t);
        ds.rows.row(ep).segment(base + 4, 2) = roll.actions.row(t);
      }
      ds.returns[ep] = discounted_goal_return(roll.states, goal, opt.gamma,
                                              opt.goal_radius);
      done = true;
    }
    require_numeric(done, "episode generation exhausted its attempt budget");
  }
  quantize_f32_in_place(ds.rows);
  quantize_f32_in_place(ds.returns);
  return ds;
}

std::vector<EvalPair> sample_eval_pairs(const MazeSpec& maze, int count,
                                        std::uint64_t seed) {
  require_param(count >= 1, "pair count must be positive");
  const auto starts = maze.start_region();
  const auto goals = maze.goal_region();
  require_data(starts.size() >= 1 && goals.size() >= 1 &&
                   maze.free_count() >= 2,
               "maze needs start and goal cells");
  require_data(starts.size() > 1 || goals.size() > 1 || starts[0] != goals[0],
               "start and goal regions pin the same single cell");
  Rng rng(mix_seed(seed, 0xEBA1));
  std::vector<EvalPair> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    const auto s = starts[rng.uniform_index(starts.size())];
    const auto g = goals[rng.uniform_index(goals.size())];
    if (s == g) continue;
    EvalPair p;
    const Eigen::Vector2d sc = maze.center(s.first, s.second);
    p.start = {sc.x(), sc.y(), 0.0, 0.0};
    p.goal = maze.center(g.first, g.second);
    out.push_back(p);
  }
  return out;
}

Eigen::MatrixXd sample_gmm_rows(const GmmSpec& gmm, long n, std::uint64_t seed) {
  require_param(n >= 1, "sample count must be positive");
  Rng rng(mix_seed(seed, 0x6310));
  const int d = static_cast<int>(gmm.means.cols());
  Eigen::MatrixXd rows(n, d);
  const double sigma0 = std::sqrt(gmm.sigma0_sq);
  for (long i = 0; i < n; ++i) {
    const double u = rng.uniform();
    double acc = 0;
    Eigen::Index comp = gmm.weights.size() - 1;
    for (Eigen::Index c = 0; c < gmm.weights.size(); ++c) {
      acc += gmm.weights[c];
      if (u < acc) {
        comp = c;
        break;
      }
    }
    for (int j = 0; j < d; ++j) {
      rows(i, j) = gmm.means(comp, j) + sigma0 * rng.gaussian();
    }
  }
  return rows;
}

SubspaceSample sample_subspace_rows(long n, int dim, int rank,
                                    std::uint64_t seed) {
  require_param(n >= 1 && dim >= 1, "sample shape must be positive");
  require_param(rank >= 1 && rank <= dim, "rank must be in [1, dim]");
  Rng rng(mix_seed(seed, 0x5B5B));
  Eigen::MatrixXd raw(dim, rank);
  for (int c = 0; c < rank; ++c) {
    for (int r = 0; r < dim; ++r) raw(r, c) = rng.gaussian();
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  SubspaceSample out;
  out.basis = qr.householderQ() * Eigen::MatrixXd::Identity(dim, rank);
  out.mean.resize(dim);
  for (int r = 0; r < dim; ++r) out.mean[r] = 0.5 * rng.gaussian();
  Eigen::VectorXd scales(rank);
  for (int c = 0; c < rank; ++c) {
    scales[c] = rank == 1 ? 2.0
                          : 2.0 - 1.5 * static_cast<double>(c) /
                                      static_cast<double>(rank - 1);
  }
  out.rows.resize(n, dim);
  for (long i = 0; i < n; ++i) {
    Eigen::VectorXd coeff(rank);
    for (int c = 0; c < rank; ++c) coeff[c] = scales[c] * rng.gaussian();
    out.rows.row(i) = (out.mean + out.basis * coeff).transpose();
  }
  return out;
}

double artifact_ratio(const MazeSpec& maze,
                      const std::vector<Trajectory>& plans) {
  require_param(!plans.empty(), "artifact ratio over zero plans");
  int bad = 0;
  for (const Trajectory& t : plans) {
    if (trajectory_hits_wall(maze, t)) ++bad;
  }
  return static_cast<double>(bad) / static_cast<double>(plans.size());
}

Eigen::VectorXd realism_scores(const Eigen::MatrixXd& samples,
                               const Eigen::MatrixXd& refs, int k_nn) {
  constexpr double kCap = 1e6;
  require_param(samples.rows() >= 1, "no samples to score");
  require_param(k_nn >= 1, "neighbor count must be positive");
  require_param(refs.rows() > k_nn,
                "reference set must exceed the neighbor count");
  require_param(samples.cols() == refs.cols(), "row width mismatch");

  // radius[j] = distance from reference j to its k_nn-th nearest other row.
  const Eigen::Index N = refs.rows();
  Eigen::VectorXd radius(N);
  std::vector<double> dists(static_cast<std::size_t>(N) - 1);
  bool any_radius = false;
  for (Eigen::Index i = 0; i < N; ++i) {
    std::size_t m = 0;
    for (Eigen::Index j = 0; j < N; ++j) {
      if (j != i) dists[m++] = (refs.row(i) - refs.row(j)).norm();
    }
    std::nth_element(dists.begin(), dists.begin() + (k_nn - 1), dists.end());
    radius[i] = dists[static_cast<std::size_t>(k_nn) - 1];
    any_radius = any_radius || radius[i] > 0;
  }
  require_data(any_radius, "reference rows are all duplicates");

  Eigen::VectorXd out(samples.rows());
  for (Eigen::Index p = 0; p < samples.rows(); ++p) {
    double best = 0;
    for (Eigen::Index j = 0; j < N; ++j) {
      const double dist = (samples.row(p) - refs.row(j)).norm();
      const double score =
          dist == 0 ? kCap : std::min(radius[j] / dist, kCap);
      best = std::max(best, score);
    }
    out[p] = best;
  }
  return out;
}

double discounted_goal_return(const Eigen::MatrixXd& states,
                              const Eigen::Vector2d& goal, double gamma,
                              double radius) {
  require_param(states.rows() >= 2 && states.cols() >= 2,
                "need post-initial states with (x, y)");
  double acc = 0;
  double disc = 1.0;
  for (Eigen::Index t = 1; t < states.rows(); ++t) {
    const Eigen::Vector2d pos = states.row(t).head<2>().transpose();
    if ((pos - goal).norm() <= radius) acc += disc;
    disc *= gamma;
  }
  return acc;
}

Eigen::MatrixXd window_rows(const Dataset& ds, int len, int stride) {
  require_param(len >= 1 && len <= ds.horizon, "window length out of range");
  require_param(stride >= 1, "stride must be positive");
  const int pair_dim = ds.state_dim + ds.action_dim;
  std::vector<int> offsets;
  for (int off = 0; off + len <= ds.horizon; off += stride) offsets.push_back(off);
  require_param(!offsets.empty(), "no windows fit the horizon");
  Eigen::MatrixXd out(ds.n() * static_cast<Eigen::Index>(offsets.size()),
                      static_cast<Eigen::Index>(len) * pair_dim);
  Eigen::Index w = 0;
  for (Eigen::Index ep = 0; ep < ds.n(); ++ep) {
    for (int off : offsets) {
      out.row(w++) = ds.rows.row(ep).segment(
          static_cast<Eigen::Index>(off) * pair_dim,
          static_cast<Eigen::Index>(len) * pair_dim);
    }
  }
  return out;
}

Eigen::MatrixXd highlevel_rows(const Dataset& ds, int stride, int points) {
  require_param(stride >= 1 && points >= 2, "need at least two coarse points");
  require_param((points - 1) * stride < ds.horizon,
                "coarse points overrun the horizon");
  const int pair_dim = ds.state_dim + ds.action_dim;
  Eigen::MatrixXd out(ds.n(),
                      static_cast<Eigen::Index>(points) * ds.state_dim);
  for (Eigen::Index ep = 0; ep < ds.n(); ++ep) {
    for (int p = 0; p < points; ++p) {
      out.row(ep).segment(static_cast<Eigen::Index>(p) * ds.state_dim,
                          ds.state_dim) =
          ds.rows.row(ep).segment(
              static_cast<Eigen::Index>(p) * stride * pair_dim, ds.state_dim);
    }
  }
  return out;
}

}  // namespace lomap
