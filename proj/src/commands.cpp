#include "lomap/commands.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lomap/ann.hpp"
#include "lomap/dataset.hpp"
#include "lomap/denoisers.hpp"
#include "lomap/diffusion.hpp"
#include "lomap/error.hpp"
#include "lomap/guidance.hpp"
#include "lomap/io.hpp"
#include "lomap/maze.hpp"
#include "lomap/planner.hpp"
#include "lomap/projection.hpp"
#include "lomap/rng.hpp"
#include "lomap/svg.hpp"

namespace lomap {
namespace {

void apply_threads(int threads) {
  require_param(threads >= 1, "thread count must be positive");
  Eigen::setNbThreads(threads);
}

int as_int(long v, const std::string& what) {
  require_param(v >= std::numeric_limits<int>::min() &&
                    v <= std::numeric_limits<int>::max(),
                what + " out of range");
  return static_cast<int>(v);
}

int get_int(const Config& cfg, const std::string& key, int fallback) {
  return as_int(cfg.get_long(key, fallback), key);
}

std::vector<int> get_int_list(const Config& cfg, const std::string& key,
                              const std::vector<long>& fallback) {
  const std::vector<long> raw = cfg.get_long_list(key, fallback);
  std::vector<int> out;
  out.reserve(raw.size());
  for (long v : raw) out.push_back(as_int(v, key));
  return out;
}

// maze = corridor | four_room | @<path to a grid file>
MazeSpec maze_from_config(const Config& cfg) {
  const std::string name = cfg.get_string("maze", "four_room");
  MazeSpec maze;
  if (!name.empty() && name[0] == '@') {
    maze = MazeSpec::parse(io::read_text_file(name.substr(1)));
  } else {
    maze = MazeSpec::builtin(name);
  }
  maze.cell_size = cfg.get_double("cell_size", maze.cell_size);
  require_param(maze.cell_size > 0, "cell_size must be positive");
  maze.goal_radius = cfg.get_double("goal_radius", maze.goal_radius);
  require_param(maze.goal_radius > 0, "goal_radius must be positive");
  return maze;
}

EnvParams env_from_config(const Config& cfg) {
  EnvParams env;
  env.dt = cfg.get_double("dt", env.dt);
  env.damping = cfg.get_double("damping", env.damping);
  env.amax = cfg.get_double("amax", env.amax);
  require_param(env.dt > 0, "dt must be positive");
  require_param(env.damping >= 0, "damping must be non-negative");
  require_param(env.amax > 0, "amax must be positive");
  return env;
}

NoiseSchedule schedule_from_config(const Config& cfg) {
  const int steps = get_int(cfg, "diffusion_steps", 20);
  const ScheduleKind kind =
      schedule_kind_from_string(cfg.get_string("schedule", "cosine"));
  // Linear interpolates between the bounds; cosine only clips into them, so
  // its ceiling must stay out of the way of the near-1 terminal betas.
  const double bmin = cfg.get_double("beta_min", 1e-4);
  const double bmax =
      cfg.get_double("beta_max", kind == ScheduleKind::linear ? 0.2 : 0.999);
  const bool force = cfg.get_bool("force_schedule", false);
  return build_schedule(steps, kind, bmin, bmax, force);
}

// A checkpoint carries the schedule it was trained under; explicit schedule
// keys that disagree with it would silently sample a different process.
void check_schedule_keys(const Config& cfg, const Checkpoint& ck) {
  if (cfg.has("diffusion_steps")) {
    require_data(get_int(cfg, "diffusion_steps", 0) == ck.sched_steps,
                 "diffusion_steps disagrees with the checkpoint");
  }
  if (cfg.has("schedule")) {
    require_data(schedule_kind_from_string(cfg.get_string("schedule", "")) ==
                     ck.sched_kind,
                 "schedule disagrees with the checkpoint");
  }
  if (cfg.has("beta_min")) {
    require_data(cfg.get_double("beta_min", 0) == ck.beta_min,
                 "beta_min disagrees with the checkpoint");
  }
  if (cfg.has("beta_max")) {
    require_data(cfg.get_double("beta_max", 0) == ck.beta_max,
                 "beta_max disagrees with the checkpoint");
  }
}

ProjectionSchedule projection_from_config(const Config& cfg, int steps) {
  ProjectionSchedule p = ProjectionSchedule::defaults(steps);
  p.lo = get_int(cfg, "proj_lo", p.lo);
  p.hi = get_int(cfg, "proj_hi", p.hi);
  p.k = get_int(cfg, "k", p.k);
  p.lambda = cfg.get_double("lambda", p.lambda);
  const std::string style = cfg.get_string("style", "affine");
  if (style == "affine") {
    p.style = ProjectionStyle::affine;
  } else if (style == "literal") {
    p.style = ProjectionStyle::literal;
  } else {
    fail_param("unknown projection style: " + style);
  }
  p.n_probe = get_int(cfg, "n_probe", p.n_probe);
  p.zero_noise = cfg.get_bool("zero_noise", p.zero_noise);
  p.validate(steps);
  return p;
}

Checkpoint load_denoiser_checkpoint(const Config& cfg, const std::string& key) {
  require_param(cfg.has(key), "missing " + key + "=<checkpoint path>");
  Checkpoint ck = load_checkpoint(cfg.get_string(key, ""));
  require_data(ck.kind == 0, key + " checkpoint is not a denoiser");
  check_schedule_keys(cfg, ck);
  return ck;
}

const std::set<std::string> kMazeKeys = {"maze", "cell_size", "goal_radius"};
const std::set<std::string> kEnvKeys = {"dt", "damping", "amax"};
const std::set<std::string> kSchedKeys = {"diffusion_steps", "schedule",
                                          "beta_min", "beta_max",
                                          "force_schedule"};
const std::set<std::string> kProjKeys = {"proj_lo", "proj_hi", "k",      "lambda",
                                         "style",   "n_probe", "zero_noise"};

std::set<std::string> key_union(std::initializer_list<std::set<std::string>> sets,
                                std::initializer_list<const char*> extra) {
  std::set<std::string> all;
  for (const auto& s : sets) all.insert(s.begin(), s.end());
  for (const char* k : extra) all.insert(k);
  return all;
}

}  // namespace

void cmd_gen_data(const Config& cfg, std::uint64_t seed, const std::string& out,
                  int threads) {
  apply_threads(threads);
  cfg.restrict_keys(key_union(
      {kMazeKeys, kEnvKeys},
      {"kind", "episodes", "horizon", "max_path_len", "action_noise",
       "waypoint_radius", "kp", "kd", "gamma", "max_attempts", "count", "dim",
       "components", "sigma0", "spread", "rank"}));
  const std::string kind = cfg.get_string("kind", "maze");
  Dataset ds;
  if (kind == "maze") {
    const MazeSpec maze = maze_from_config(cfg);
    DataGenOptions opt;
    opt.episodes = get_int(cfg, "episodes", opt.episodes);
    opt.horizon = get_int(cfg, "horizon", opt.horizon);
    opt.max_path_len = cfg.get_double("max_path_len", opt.max_path_len);
    opt.action_noise = cfg.get_double("action_noise", opt.action_noise);
    opt.goal_radius = maze.goal_radius;
    opt.waypoint_radius = cfg.get_double("waypoint_radius", opt.waypoint_radius);
    opt.kp = cfg.get_double("kp", opt.kp);
    opt.kd = cfg.get_double("kd", opt.kd);
    opt.gamma = cfg.get_double("gamma", opt.gamma);
    opt.max_attempts = get_int(cfg, "max_attempts", opt.max_attempts);
    opt.env = env_from_config(cfg);
    ds = generate_offline_dataset(maze, opt, seed, cfg.hash());
  } else if (kind == "gmm") {
    const int dim = get_int(cfg, "dim", 8);
    const int components = get_int(cfg, "components", 3);
    const long count = cfg.get_long("count", 4096);
    const double sigma0 = cfg.get_double("sigma0", 0.15);
    const double spread = cfg.get_double("spread", 4.0);
    require_param(dim >= 1 && components >= 1 && count >= 0,
                  "gmm shape parameters must be positive");
    require_param(sigma0 > 0 && spread > 0, "sigma0 and spread must be positive");
    Rng rng(mix_seed(seed, 0x6a3d));
    Eigen::MatrixXd means(components, dim);
    for (int c = 0; c < components; ++c)
      for (int j = 0; j < dim; ++j) means(c, j) = spread * rng.gaussian();
    const GmmSpec gmm = GmmSpec::make(
        means, Eigen::VectorXd::Ones(components), sigma0 * sigma0);
    ds.horizon = 1;
    ds.state_dim = dim;
    ds.action_dim = 0;
    ds.rows = sample_gmm_rows(gmm, count, mix_seed(seed, 0x6a3e));
    quantize_f32_in_place(ds.rows);
    ds.returns = Eigen::VectorXd::Zero(count);
  } else if (kind == "subspace") {
    const int dim = get_int(cfg, "dim", 20);
    const int rank = get_int(cfg, "rank", 3);
    const long count = cfg.get_long("count", 4096);
    require_param(dim >= 1 && rank >= 1 && rank <= dim && count >= 0,
                  "subspace shape parameters are inconsistent");
    SubspaceSample s = sample_subspace_rows(count, dim, rank, seed);
    ds.horizon = 1;
    ds.state_dim = dim;
    ds.action_dim = 0;
    ds.rows = std::move(s.rows);
    quantize_f32_in_place(ds.rows);
    ds.returns = Eigen::VectorXd::Zero(count);
  } else {
    fail_param("unknown data kind: " + kind);
  }
  ds.config_hash = cfg.hash();
  ds.seed = seed;
  save_dataset(ds, out);
}

void cmd_train(const Config& cfg, std::uint64_t seed, const std::string& out,
               int threads) {
  apply_threads(threads);
  cfg.restrict_keys(key_union({kSchedKeys}, {"data", "kind", "steps", "batch",
                                             "lr", "hidden", "embed_dim",
                                             "view", "stride", "points",
                                             "window"}));
  require_param(cfg.has("data"), "missing data=<dataset path>");
  const Dataset ds = load_dataset(cfg.get_string("data", ""));
  require_data(ds.n() > 0, "dataset is empty");
  const std::string kind = cfg.get_string("kind", "denoiser");
  const std::string view = cfg.get_string("view", "full");

  Eigen::MatrixXd rows;
  int horizon = ds.horizon;
  int state_dim = ds.state_dim;
  int action_dim = ds.action_dim;
  if (view == "full") {
    rows = ds.rows;
  } else if (view == "window") {
    const int stride = get_int(cfg, "stride", 8);
    const int window = get_int(cfg, "window", stride + 1);
    rows = window_rows(ds, window, stride);
    horizon = window;
  } else if (view == "highlevel") {
    const int stride = get_int(cfg, "stride", 8);
    const int points = get_int(cfg, "points", 7);
    rows = highlevel_rows(ds, stride, points);
    horizon = points;
    action_dim = 0;
  } else {
    fail_param("unknown view: " + view);
  }

  const NoiseSchedule sched = schedule_from_config(cfg);
  const Normalizer norm = Normalizer::fit(rows);
  const Eigen::MatrixXd z = norm.normalize_rows(rows);

  TrainOptions opts;
  opts.steps = cfg.get_long("steps", opts.steps);
  opts.batch = get_int(cfg, "batch", opts.batch);
  opts.lr = cfg.get_double("lr", opts.lr);
  std::vector<long> hidden_fallback(opts.hidden.begin(), opts.hidden.end());
  opts.hidden = get_int_list(cfg, "hidden", hidden_fallback);
  for (int h : opts.hidden) require_param(h >= 1, "hidden widths must be positive");
  opts.embed_dim = get_int(cfg, "embed_dim", opts.embed_dim);
  opts.seed = seed;

  Checkpoint ck;
  TrainCurve curve;
  if (kind == "denoiser") {
    ck.kind = 0;
    ck.net = train_mlp_denoiser(z, sched, opts, &curve);
  } else if (kind == "guide") {
    require_param(view == "full", "guide training uses the full view");
    ck.kind = 1;
    ck.net = train_mse_guide(z, ds.returns, sched, opts, &curve);
  } else {
    fail_param("unknown train kind: " + kind);
  }
  ck.config_hash = cfg.hash();
  ck.seed = seed;
  ck.sched_steps = sched.steps;
  ck.sched_kind = sched.kind;
  ck.beta_min = sched.beta_min;
  ck.beta_max = sched.beta_max;
  ck.sched_forced = sched.forced;
  ck.horizon = horizon;
  ck.state_dim = state_dim;
  ck.action_dim = action_dim;
  ck.norm = norm;
  save_checkpoint(out, ck);

  io::Csv csv;
  csv.header({"epoch", "loss"});
  for (std::size_t e = 0; e < curve.epoch_loss.size(); ++e) {
    csv.cell(static_cast<std::uint64_t>(e + 1));
    csv.cell(curve.epoch_loss[e]);
    csv.end_row();
  }
  csv.write(out + ".loss.csv");
}

namespace {

struct PlanRowSink {
  bool enabled = false;
  int horizon = 0;
  int state_dim = 0;
  int action_dim = 0;
  std::vector<Eigen::VectorXd> rows;

  void add(const Eigen::VectorXd& row) {
    if (enabled) rows.push_back(row);
  }
  void save(const std::string& path, std::uint64_t config_hash,
            std::uint64_t seed) const {
    if (!enabled) return;
    Dataset ds;
    ds.horizon = horizon;
    ds.state_dim = state_dim;
    ds.action_dim = action_dim;
    ds.rows.resize(static_cast<Eigen::Index>(rows.size()), ds.row_dim());
    for (std::size_t i = 0; i < rows.size(); ++i)
      ds.rows.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    quantize_f32_in_place(ds.rows);
    ds.returns = Eigen::VectorXd::Zero(ds.rows.rows());
    ds.config_hash = config_hash;
    ds.seed = seed;
    save_dataset(ds, path);
  }
};

}  // namespace

void cmd_plan(const Config& cfg, std::uint64_t seed, const std::string& out,
              int threads) {
  apply_threads(threads);
  cfg.restrict_keys(key_union(
      {kMazeKeys, kEnvKeys, kSchedKeys, kProjKeys},
      {"denoiser", "guide", "data", "index", "omega", "projection",
       "candidates", "episodes", "episode_cap", "gamma", "condition_final",
       "n_list", "hier", "hi_ckpt", "lo_ckpt", "projection_low", "dump"}));
  const MazeSpec maze = maze_from_config(cfg);
  const PointMassEnv env(maze, env_from_config(cfg));
  const int episodes = get_int(cfg, "episodes", 20);
  require_param(episodes >= 1, "episodes must be positive");
  const bool projection = cfg.get_bool("projection", false);
  const bool dump = cfg.get_bool("dump", false);
  const std::vector<EvalPair> pairs =
      sample_eval_pairs(maze, episodes, mix_seed(seed, 0x7071));

  io::Csv csv;
  csv.header({"seed", "success", "return", "steps", "collision", "config_hash"});
  PlanRowSink sink;
  sink.enabled = dump;

  if (!cfg.get_bool("hier", false)) {
    const Checkpoint ck = load_denoiser_checkpoint(cfg, "denoiser");
    require_data(ck.state_dim == 4 && ck.action_dim == 2,
                 "planning needs a point-mass denoiser checkpoint");
    const NoiseSchedule sched = ck.schedule();
    const MlpDenoiser den(ck.net);
    TrajectoryPlanner planner(&den, &sched, &ck.norm, ck.data_dim());

    std::unique_ptr<MseGuide> guide;
    if (cfg.has("guide")) {
      Checkpoint gck = load_checkpoint(cfg.get_string("guide", ""));
      require_data(gck.kind == 1, "guide checkpoint is not a guide");
      require_data(gck.data_dim() == ck.data_dim(),
                   "guide width does not match the denoiser");
      guide = std::make_unique<MseGuide>(std::move(gck.net));
    }

    Dataset ds;
    AnnIndex index;
    if (projection) {
      require_param(cfg.has("data"),
                    "projection needs data=<dataset path> for neighbors");
      ds = load_dataset(cfg.get_string("data", ""));
      require_data(ds.row_dim() == ck.data_dim(),
                   "dataset width does not match the checkpoint");
      const Eigen::MatrixXd z = ck.norm.normalize_rows(ds.rows);
      if (cfg.has("index")) {
        index = AnnIndex::load(cfg.get_string("index", ""), z);
      } else {
        index = AnnIndex::build(z, get_int(cfg, "n_list", 0),
                                mix_seed(seed, 0xA11C));
      }
      planner.attach_index(&index, projection_from_config(cfg, sched.steps));
    }

    EpisodeOptions opt;
    opt.horizon = ck.horizon;
    opt.candidates = get_int(cfg, "candidates", opt.candidates);
    opt.omega = cfg.get_double("omega", opt.omega);
    opt.guide = guide.get();
    opt.use_lomap = projection;
    opt.condition_final = cfg.get_bool("condition_final", opt.condition_final);
    opt.gamma = cfg.get_double("gamma", opt.gamma);
    opt.episode_cap = get_int(cfg, "episode_cap", opt.episode_cap);

    sink.horizon = ck.horizon;
    sink.state_dim = 4;
    sink.action_dim = 2;
    for (int e = 0; e < episodes; ++e) {
      const std::uint64_t ep_seed = mix_seed(seed, static_cast<std::uint64_t>(e));
      const EpisodeResult res =
          plan_episode(env, planner, pairs[e].start, pairs[e].goal, ep_seed, opt);
      csv.cell(ep_seed);
      csv.cell(res.success ? 1 : 0);
      csv.cell(res.ret);
      csv.cell(res.steps);
      csv.cell(res.plan_collision ? 1 : 0);
      csv.cell(cfg.hash());
      csv.end_row();
      if (res.first_plan.size() > 0) sink.add(res.first_plan);
    }
  } else {
    const Checkpoint hi = load_denoiser_checkpoint(cfg, "hi_ckpt");
    const Checkpoint lo = load_denoiser_checkpoint(cfg, "lo_ckpt");
    require_data(hi.state_dim == 4 && hi.action_dim == 0,
                 "hi_ckpt must be a state-only checkpoint");
    require_data(lo.state_dim == 4 && lo.action_dim == 2 && lo.horizon >= 2,
                 "lo_ckpt must be a short-window point-mass checkpoint");
    const int stride = lo.horizon - 1;
    const int points = hi.horizon;
    require_data(points >= 2, "hi_ckpt horizon must be at least 2");

    const NoiseSchedule hi_sched = hi.schedule();
    const NoiseSchedule lo_sched = lo.schedule();
    const MlpDenoiser hi_den(hi.net);
    const MlpDenoiser lo_den(lo.net);
    TrajectoryPlanner high(&hi_den, &hi_sched, &hi.norm, hi.data_dim());
    TrajectoryPlanner low(&lo_den, &lo_sched, &lo.norm, lo.data_dim());

    const bool projection_low = cfg.get_bool("projection_low", false);
    Dataset ds;
    AnnIndex hi_index;
    AnnIndex lo_index;
    Eigen::MatrixXd hi_z;
    Eigen::MatrixXd lo_z;
    if (projection || projection_low) {
      require_param(cfg.has("data"),
                    "projection needs data=<dataset path> for neighbors");
      ds = load_dataset(cfg.get_string("data", ""));
      require_data(ds.state_dim == 4 && ds.action_dim == 2,
                   "hierarchical planning needs point-mass data");
    }
    if (projection) {
      hi_z = hi.norm.normalize_rows(highlevel_rows(ds, stride, points));
      hi_index = AnnIndex::build(hi_z, get_int(cfg, "n_list", 0),
                                 mix_seed(seed, 0xA11C));
      high.attach_index(&hi_index, projection_from_config(cfg, hi_sched.steps));
    }
    if (projection_low) {
      lo_z = lo.norm.normalize_rows(window_rows(ds, lo.horizon, stride));
      lo_index = AnnIndex::build(lo_z, get_int(cfg, "n_list", 0),
                                 mix_seed(seed, 0xA11D));
      low.attach_index(&lo_index, projection_from_config(cfg, lo_sched.steps));
    }

    const HierarchicalPlanner hp(&high, &low, stride, points, 4, 2);
    const double gamma = cfg.get_double("gamma", 0.99);
    sink.horizon = hp.stitched_horizon();
    sink.state_dim = 4;
    sink.action_dim = 2;
    for (int e = 0; e < episodes; ++e) {
      const std::uint64_t ep_seed = mix_seed(seed, static_cast<std::uint64_t>(e));
      const Eigen::VectorXd row = hp.plan(pairs[e].start, pairs[e].goal, ep_seed,
                                          projection, projection_low);
      const Trajectory traj =
          trajectory_from_row(row, hp.stitched_horizon(), 4, 2);
      const bool collision = trajectory_hits_wall(maze, traj);
      const Eigen::MatrixXd states = rollout_actions(
          env, pairs[e].start, actions_of_row(row, hp.stitched_horizon(), 4, 2));
      const double ret =
          discounted_goal_return(states, pairs[e].goal, gamma, maze.goal_radius);
      bool success = false;
      for (Eigen::Index t = 1; t < states.rows(); ++t) {
        if ((states.row(t).head<2>().transpose() - pairs[e].goal).norm() <=
            maze.goal_radius) {
          success = true;
          break;
        }
      }
      csv.cell(ep_seed);
      csv.cell(success ? 1 : 0);
      csv.cell(ret);
      csv.cell(static_cast<int>(states.rows() - 1));
      csv.cell(collision ? 1 : 0);
      csv.cell(cfg.hash());
      csv.end_row();
      sink.add(row);
    }
  }

  csv.write(out);
  sink.save(out + ".plans.lmpd", cfg.hash(), seed);
}

void cmd_eval(const Config& cfg, std::uint64_t seed, const std::string& out,
              int threads) {
  apply_threads(threads);
  cfg.restrict_keys(key_union(
      {kMazeKeys, kEnvKeys, kSchedKeys, kProjKeys},
      {"denoiser", "guide", "data", "index", "omega", "counts", "pairs",
       "realism_k", "n_list", "condition_final"}));
  const MazeSpec maze = maze_from_config(cfg);
  const PointMassEnv env(maze, env_from_config(cfg));

  const Checkpoint ck = load_denoiser_checkpoint(cfg, "denoiser");
  require_data(ck.state_dim == 4 && ck.action_dim == 2,
               "evaluation needs a point-mass denoiser checkpoint");
  const NoiseSchedule sched = ck.schedule();
  const MlpDenoiser den(ck.net);
  TrajectoryPlanner planner(&den, &sched, &ck.norm, ck.data_dim());

  require_param(cfg.has("data"), "missing data=<dataset path>");
  const Dataset ds = load_dataset(cfg.get_string("data", ""));
  require_data(ds.row_dim() == ck.data_dim(),
               "dataset width does not match the checkpoint");
  const Eigen::MatrixXd z = ck.norm.normalize_rows(ds.rows);
  AnnIndex index;
  if (cfg.has("index")) {
    index = AnnIndex::load(cfg.get_string("index", ""), z);
  } else {
    index = AnnIndex::build(z, get_int(cfg, "n_list", 0), mix_seed(seed, 0xA11C));
  }
  planner.attach_index(&index, projection_from_config(cfg, sched.steps));

  std::unique_ptr<MseGuide> guide;
  if (cfg.has("guide")) {
    Checkpoint gck = load_checkpoint(cfg.get_string("guide", ""));
    require_data(gck.kind == 1, "guide checkpoint is not a guide");
    require_data(gck.data_dim() == ck.data_dim(),
                 "guide width does not match the denoiser");
    guide = std::make_unique<MseGuide>(std::move(gck.net));
  }
  const double omega = cfg.get_double("omega", 0.0);
  const bool condition_final = cfg.get_bool("condition_final", true);
  const int realism_k = get_int(cfg, "realism_k", 5);

  std::vector<int> counts = get_int_list(cfg, "counts", {10, 20, 30, 50, 100});
  require_param(!counts.empty(), "counts must not be empty");
  std::sort(counts.begin(), counts.end());
  counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
  require_param(counts.front() >= 1, "counts must be positive");
  const int cmax = counts.back();
  const int n_pairs = get_int(cfg, "pairs", 100);
  require_param(n_pairs >= 1, "pairs must be positive");
  const std::vector<EvalPair> pairs =
      sample_eval_pairs(maze, n_pairs, mix_seed(seed, 0x7071));

  // Plans are drawn once per (method, pair) at the largest count; smaller
  // counts reuse the prefix, which is sound because candidate noise streams
  // depend only on (seed, candidate). The two methods share per-pair seeds.
  const char* method_name[2] = {"baseline", "lomap"};
  Eigen::MatrixXd all_plans(2L * n_pairs * cmax, ck.data_dim());
  std::vector<std::vector<std::uint8_t>> collide(2);
  std::vector<std::vector<double>> dmse(2);
  for (int m = 0; m < 2; ++m) {
    collide[m].assign(static_cast<std::size_t>(n_pairs) * cmax, 0);
    dmse[m].assign(static_cast<std::size_t>(n_pairs) * cmax, 0.0);
  }
  for (int p = 0; p < n_pairs; ++p) {
    const std::vector<ConditionSlot> conds = maze_plan_conditions(
        pairs[p].start, pairs[p].goal, ck.horizon, 4, 2, condition_final);
    const std::uint64_t pair_seed = mix_seed(seed, static_cast<std::uint64_t>(p));
    for (int m = 0; m < 2; ++m) {
      const Eigen::MatrixXd rows = planner.sample_rows(
          conds, cmax, pair_seed, guide.get(), omega, m == 1);
      for (int c = 0; c < cmax; ++c) {
        const Trajectory traj =
            trajectory_from_row(rows.row(c).transpose(), ck.horizon, 4, 2);
        const std::size_t at = static_cast<std::size_t>(p) * cmax + c;
        collide[m][at] = trajectory_hits_wall(maze, traj) ? 1 : 0;
        dmse[m][at] = dynamic_mse(env, traj);
        all_plans.row((static_cast<Eigen::Index>(m) * n_pairs + p) * cmax + c) =
            rows.row(c);
      }
    }
  }
  const Eigen::VectorXd realism = realism_scores(all_plans, ds.rows, realism_k);

  io::Csv csv;
  csv.header({"method", "count", "artifact_ratio", "collision_pair_fraction",
              "realism_mean", "dynamic_mse_mean", "config_hash"});
  for (int m = 0; m < 2; ++m) {
    for (int count : counts) {
      double hits = 0;
      double hit_pairs = 0;
      double realism_sum = 0;
      double dmse_sum = 0;
      for (int p = 0; p < n_pairs; ++p) {
        bool any = false;
        for (int c = 0; c < count; ++c) {
          const std::size_t at = static_cast<std::size_t>(p) * cmax + c;
          hits += collide[m][at];
          any = any || collide[m][at] != 0;
          dmse_sum += dmse[m][at];
          realism_sum +=
              realism[(static_cast<Eigen::Index>(m) * n_pairs + p) * cmax + c];
        }
        hit_pairs += any ? 1 : 0;
      }
      const double plans = static_cast<double>(n_pairs) * count;
      csv.cell(method_name[m]);
      csv.cell(count);
      csv.cell(hits / plans);
      csv.cell(hit_pairs / n_pairs);
      csv.cell(realism_sum / plans);
      csv.cell(dmse_sum / plans);
      csv.cell(cfg.hash());
      csv.end_row();
    }
  }
  csv.write(out);
}

void cmd_gap(const Config& cfg, std::uint64_t seed, const std::string& out,
             int threads) {
  apply_threads(threads);
  cfg.restrict_keys(
      key_union({kSchedKeys}, {"family", "dims", "step", "n", "trials"}));
  const NoiseSchedule sched = schedule_from_config(cfg);
  const ReturnFamily family =
      return_family_from_string(cfg.get_string("family", "quadratic"));
  const std::vector<int> dims = get_int_list(cfg, "dims", {4, 16, 64, 256});
  const int step = get_int(cfg, "step", (sched.steps + 1) / 2);
  const long n = cfg.get_long("n", 100000);
  const int trials = get_int(cfg, "trials", 20);

  const GapScalingResult res =
      gap_scaling_experiment(dims, step, family, sched, n, trials, seed);

  io::Csv csv;
  csv.header({"d", "i", "n", "delta_mean", "delta_stderr"});
  for (const GapCell& cell : res.cells) {
    csv.cell(cell.dim);
    csv.cell(cell.step);
    csv.cell(static_cast<std::uint64_t>(cell.n));
    csv.cell(cell.delta_mean);
    csv.cell(cell.delta_mc_stderr);
    csv.end_row();
  }
  csv.cell("slope");
  csv.cell(step);
  csv.cell(static_cast<std::uint64_t>(n));
  if (res.degenerate) {
    csv.cell("degenerate");
    csv.cell("");
  } else {
    csv.cell(res.slope);
    csv.cell(res.slope_stderr);
  }
  csv.end_row();
  csv.write(out);

  PlotSeries series;
  series.label = return_family_name(family);
  series.color = "#2c7fb8";
  for (const GapCell& cell : res.cells) {
    if (cell.delta_mean > 0)
      series.pts.push_back({static_cast<double>(cell.dim), cell.delta_mean});
  }
  write_loglog_plot(out + ".svg", "guidance gap vs dimension", "d", "delta",
                    {series}, !res.degenerate, res.slope, res.intercept);
}

void cmd_plot(const Config& cfg, std::uint64_t seed, const std::string& out,
              int threads) {
  apply_threads(threads);
  (void)seed;
  cfg.restrict_keys(key_union({kMazeKeys}, {"plans", "title"}));
  const MazeSpec maze = maze_from_config(cfg);
  std::vector<Trajectory> plans;
  if (cfg.has("plans")) {
    const Dataset ds = load_dataset(cfg.get_string("plans", ""));
    plans.reserve(static_cast<std::size_t>(ds.n()));
    for (Eigen::Index i = 0; i < ds.n(); ++i) plans.push_back(ds.trajectory(i));
  }
  write_maze_figure(out, maze, plans, cfg.get_string("title", "plans"));
}

void run_command(const std::string& name, const Config& cfg,
                 std::uint64_t seed, const std::string& out, int threads) {
  require_param(!out.empty(), "missing output path");
  if (name == "gen-data") return cmd_gen_data(cfg, seed, out, threads);
  if (name == "train") return cmd_train(cfg, seed, out, threads);
  if (name == "plan") return cmd_plan(cfg, seed, out, threads);
  if (name == "eval") return cmd_eval(cfg, seed, out, threads);
  if (name == "gap") return cmd_gap(cfg, seed, out, threads);
  if (name == "plot") return cmd_plot(cfg, seed, out, threads);
  fail_param("unknown command: " + name);
}

}  // namespace lomap
