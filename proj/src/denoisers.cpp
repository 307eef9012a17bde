#include "lomap/denoisers.hpp"

#include <cmath>

#include "lomap/error.hpp"
#include "lomap/io.hpp"

namespace lomap {

GmmSpec GmmSpec::make(Eigen::MatrixXd means, Eigen::VectorXd weights,
                      double sigma0_sq) {
  require_param(means.rows() >= 1, "GMM needs at least one component");
  require_param(weights.size() == means.rows(), "weight count mismatch");
  require_param((weights.array() > 0.0).all(), "weights must be positive");
  require_param(sigma0_sq > 0.0, "sigma0_sq must be positive");
  GmmSpec g;
  g.means = std::move(means);
  g.weights = weights / weights.sum();
  g.sigma0_sq = sigma0_sq;
  return g;
}

Eigen::VectorXd analytic_gmm_predict_noise(const Eigen::VectorXd& tau_i, int i,
                                           const GmmSpec& gmm,
                                           const NoiseSchedule& sched) {
  require_param(i >= 1 && i <= sched.steps, "step out of range");
  require_param(tau_i.size() == gmm.dim(), "dimension mismatch");
  double ab = sched.alpha_bar[i];
  double var = ab * gmm.sigma0_sq + (1.0 - ab);
  double root_ab = std::sqrt(ab);

  int c_n = gmm.components();
  Eigen::VectorXd logp(c_n);
  for (int c = 0; c < c_n; ++c) {
    Eigen::VectorXd diff = tau_i - root_ab * gmm.means.row(c).transpose();
    logp[c] = std::log(gmm.weights[c]) - 0.5 * diff.squaredNorm() / var;
  }
  double m = logp.maxCoeff();
  Eigen::VectorXd resp = (logp.array() - m).exp();
  resp /= resp.sum();

  Eigen::VectorXd score = Eigen::VectorXd::Zero(tau_i.size());
  for (int c = 0; c < c_n; ++c)
    score += resp[c] * (root_ab * gmm.means.row(c).transpose() - tau_i) / var;
  return -std::sqrt(1.0 - ab) * score;
}

Mlp train_mlp_denoiser(const Eigen::MatrixXd& rows, const NoiseSchedule& sched,
                       const TrainOptions& opts, TrainCurve* curve) {
  require_param(rows.rows() >= 1, "empty training set");
  require_param(opts.steps >= 0 && opts.batch >= 1, "bad training options");
  const int d = static_cast<int>(rows.cols());
  const long n = rows.rows();

  Mlp net(d, d, opts.hidden, opts.embed_dim, mix_seed(opts.seed, 0x1217));
  Adam adam(net, opts.lr);
  Rng rng(mix_seed(opts.seed, 0x90aa));

  long steps_per_epoch = std::max<long>(1, (n + opts.batch - 1) / opts.batch);
  double epoch_sum = 0.0;
  long epoch_count = 0;
  if (curve) curve->epoch_loss.clear();

  Eigen::MatrixXd x(opts.batch, d), eps(opts.batch, d);
  Eigen::VectorXi steps(opts.batch);
  Mlp::Cache cache;
  Mlp::Grads grads;

  for (long step = 0; step < opts.steps; ++step) {
    for (int b = 0; b < opts.batch; ++b) {
      long idx = static_cast<long>(rng.uniform_index(n));
      int i = 1 + static_cast<int>(rng.uniform_index(sched.steps));
      steps[b] = i;
      double ab = sched.alpha_bar[i];
      double c0 = std::sqrt(ab), c1 = std::sqrt(1.0 - ab);
      for (int k = 0; k < d; ++k) {
        double e = rng.gaussian();
        eps(b, k) = e;
        x(b, k) = c0 * rows(idx, k) + c1 * e;
      }
    }
    Eigen::MatrixXd pred = net.forward_cached(x, steps, cache);
    Eigen::MatrixXd resid = pred - eps;
    double loss = resid.squaredNorm() / double(opts.batch * d);
    require_numeric(std::isfinite(loss), "training loss diverged");
    Eigen::MatrixXd d_out = (2.0 / double(opts.batch * d)) * resid;
    net.backward(cache, d_out, grads);
    adam.step(net, grads);

    epoch_sum += loss;
    if (++epoch_count == steps_per_epoch) {
      if (curve) curve->epoch_loss.push_back(epoch_sum / double(epoch_count));
      epoch_sum = 0.0;
      epoch_count = 0;
    }
  }
  if (curve && epoch_count > 0)
    curve->epoch_loss.push_back(epoch_sum / double(epoch_count));
  return net;
}

namespace {

void write_net(io::Writer& w, const Mlp& net) {
  auto shapes = net.shapes();
  w.u32(static_cast<std::uint32_t>(shapes.size()));
  for (auto [r, c] : shapes) {
    w.u32(static_cast<std::uint32_t>(r));
    w.u32(static_cast<std::uint32_t>(c));
  }
  Eigen::VectorXd p = net.params_flat();
  for (Eigen::Index k = 0; k < p.size(); ++k) w.f64(p[k]);
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  io::Writer w;
  w.magic("LMPC");
  w.u32(1);  // format version
  w.u64(ckpt.config_hash);
  w.u64(ckpt.seed);
  w.u32(static_cast<std::uint32_t>(ckpt.kind));
  w.u32(static_cast<std::uint32_t>(ckpt.sched_steps));
  w.u32(static_cast<std::uint32_t>(ckpt.sched_kind));
  w.f64(ckpt.beta_min);
  w.f64(ckpt.beta_max);
  w.u32(ckpt.sched_forced ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(ckpt.horizon));
  w.u32(static_cast<std::uint32_t>(ckpt.state_dim));
  w.u32(static_cast<std::uint32_t>(ckpt.action_dim));
  w.u32(static_cast<std::uint32_t>(ckpt.net.in_dim()));
  w.u32(static_cast<std::uint32_t>(ckpt.net.out_dim()));
  w.u32(static_cast<std::uint32_t>(ckpt.net.embed_dim()));
  w.u32(static_cast<std::uint32_t>(ckpt.net.hidden().size()));
  for (int h : ckpt.net.hidden()) w.u32(static_cast<std::uint32_t>(h));
  write_net(w, ckpt.net);
  w.u32(static_cast<std::uint32_t>(ckpt.norm.dim()));
  for (int k = 0; k < ckpt.norm.dim(); ++k) w.f64(ckpt.norm.mid[k]);
  for (int k = 0; k < ckpt.norm.dim(); ++k) w.f64(ckpt.norm.half[k]);
  w.finish(path);
}

Checkpoint load_checkpoint(const std::string& path) {
  io::Reader r(path);
  r.verify_checksum();
  r.expect_magic("LMPC");
  std::uint32_t version = r.u32();
  if (version != 1) fail_data("unsupported LMPC version");
  Checkpoint c;
  c.config_hash = r.u64();
  c.seed = r.u64();
  c.kind = static_cast<int>(r.u32());
  c.sched_steps = static_cast<int>(r.u32());
  c.sched_kind = static_cast<ScheduleKind>(r.u32());
  c.beta_min = r.f64();
  c.beta_max = r.f64();
  c.sched_forced = r.u32() != 0;
  c.horizon = static_cast<int>(r.u32());
  c.state_dim = static_cast<int>(r.u32());
  c.action_dim = static_cast<int>(r.u32());
  int in_dim = static_cast<int>(r.u32());
  int out_dim = static_cast<int>(r.u32());
  int embed_dim = static_cast<int>(r.u32());
  int n_hidden = static_cast<int>(r.u32());
  std::vector<int> hidden(n_hidden);
  for (int& h : hidden) h = static_cast<int>(r.u32());

  c.net = Mlp(in_dim, out_dim, hidden, embed_dim, 0);
  std::uint32_t n_shapes = r.u32();
  auto shapes = c.net.shapes();
  if (n_shapes != shapes.size()) fail_data("checkpoint shape table mismatch");
  for (auto [rows, cols] : shapes) {
    if (static_cast<int>(r.u32()) != rows || static_cast<int>(r.u32()) != cols)
      fail_data("checkpoint layer shape mismatch");
  }
  Eigen::VectorXd p(c.net.n_params());
  for (Eigen::Index k = 0; k < p.size(); ++k) p[k] = r.f64();
  c.net.set_params_flat(p);

  int norm_dim = static_cast<int>(r.u32());
  c.norm.mid.resize(norm_dim);
  c.norm.half.resize(norm_dim);
  for (int k = 0; k < norm_dim; ++k) c.norm.mid[k] = r.f64();
  for (int k = 0; k < norm_dim; ++k) c.norm.half[k] = r.f64();
  if (!r.at_footer()) fail_data("trailing bytes in checkpoint");
  return c;
}

}  // namespace lomap
