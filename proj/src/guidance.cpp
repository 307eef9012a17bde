#include "lomap/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "lomap/error.hpp"

namespace lomap {

ReturnFunction ReturnFunction::constant(double c, int dim) {
  require_param(std::isfinite(c), "constant return must be finite");
  require_param(dim >= 1, "return dimension must be positive");
  ReturnFunction r;
  r.kind = Kind::linear;
  r.lin_a = Eigen::VectorXd::Zero(dim);
  r.offset = c;
  return r;
}

ReturnFunction ReturnFunction::linear(Eigen::VectorXd a, double offset) {
  require_param(a.size() >= 1, "linear return needs a coefficient vector");
  require_param(a.allFinite() && std::isfinite(offset),
                "linear return coefficients must be finite");
  ReturnFunction r;
  r.kind = Kind::linear;
  r.lin_a = std::move(a);
  r.offset = offset;
  return r;
}

ReturnFunction ReturnFunction::quadratic(double coeff, double offset) {
  require_param(std::isfinite(coeff) && std::isfinite(offset),
                "quadratic return coefficients must be finite");
  ReturnFunction r;
  r.kind = Kind::quadratic;
  r.quad_coeff = coeff;
  r.offset = offset;
  return r;
}

ReturnFunction ReturnFunction::custom(
    std::function<double(const Eigen::VectorXd&)> f) {
  require_param(static_cast<bool>(f), "custom return needs a callable");
  ReturnFunction r;
  r.kind = Kind::custom;
  r.fn = std::move(f);
  return r;
}

ReturnFunction ReturnFunction::discounted_reward_sum(
    std::function<double(const Eigen::VectorXd&)> f) {
  require_param(static_cast<bool>(f), "reward-sum return needs a callable");
  ReturnFunction r;
  r.kind = Kind::discounted_reward_sum;
  r.fn = std::move(f);
  return r;
}

double ReturnFunction::eval(const Eigen::VectorXd& tau0) const {
  switch (kind) {
    case Kind::linear:
      require_param(lin_a.size() == tau0.size(),
                    "linear return dimension mismatch");
      return lin_a.dot(tau0) + offset;
    case Kind::quadratic:
      return -0.5 * quad_coeff * tau0.squaredNorm() + offset;
    case Kind::discounted_reward_sum:
    case Kind::custom:
      return fn(tau0);
  }
  fail_param("unknown return kind");
}

double ReturnFunction::eval_coord(Eigen::Index j, double x) const {
  switch (kind) {
    case Kind::linear:
      return lin_a[j] * x;
    case Kind::quadratic:
      return -0.5 * quad_coeff * x * x;
    default:
      fail_param("per-coordinate evaluation requires a separable return");
  }
}

namespace {

struct CoordStats {
  double exact_raw = 0;  // z-unit gradient pieces; scaled by 1/sqrt(1-ab) later
  double exact_var_raw = 0;
  double mse_raw = 0;
  double mse_var_raw = 0;
  double diff_var_raw = 0;
  double exact_value = 0;  // log E[e^{J_j}] piece
  double exact_value_var = 0;
  double mse_value = 0;  // E[J_j] piece
  double mse_value_var = 0;
};

// Single-coordinate SNIS and centered-moment estimates from one shared
// sample column. All gradient quantities are in z units; the caller divides
// by sqrt(1 - ab).
CoordStats coord_estimates(const std::vector<double>& z,
                           const std::vector<double>& jv) {
  const long n = static_cast<long>(z.size());
  const double nd = static_cast<double>(n);
  const double c = nd / (nd - 1.0);

  double jmax = jv[0];
  double jsum = 0;
  for (double v : jv) {
    jmax = std::max(jmax, v);
    jsum += v;
  }
  require_numeric(std::isfinite(jmax), "return evaluated to a non-finite value");
  const double jbar = jsum / nd;

  double wsum = 0, w2sum = 0, wzsum = 0;
  std::vector<double> w(z.size());
  for (long s = 0; s < n; ++s) {
    w[s] = std::exp(jv[s] - jmax);
    wsum += w[s];
    w2sum += w[s] * w[s];
    wzsum += w[s] * z[s];
  }
  require_numeric(wsum > 0 && std::isfinite(wsum),
                  "importance weights degenerate");

  CoordStats st;
  const double zhat = wzsum / wsum;
  st.exact_raw = zhat;

  double snis_var = 0;   // sum (w/W)^2 (z - zhat)^2
  double tsum = 0, t2sum = 0;
  double vsum = 0, v2sum = 0;
  for (long s = 0; s < n; ++s) {
    const double wn = w[s] / wsum;
    const double dz = z[s] - zhat;
    snis_var += wn * wn * dz * dz;
    const double t = c * (jv[s] - jbar) * z[s];
    tsum += t;
    t2sum += t * t;
    const double v = nd * wn * z[s] - t;
    vsum += v;
    v2sum += v * v;
  }
  st.exact_var_raw = snis_var;
  st.mse_raw = tsum / nd;
  const double t_var = std::max(0.0, (t2sum - tsum * tsum / nd) / (nd - 1.0));
  st.mse_var_raw = t_var / nd;
  const double v_var = std::max(0.0, (v2sum - vsum * vsum / nd) / (nd - 1.0));
  st.diff_var_raw = v_var / nd;

  st.exact_value = jmax + std::log(wsum / nd);
  const double w_var = std::max(0.0, (w2sum - wsum * wsum / nd) / (nd - 1.0));
  const double wmean = wsum / nd;
  st.exact_value_var = w_var / (nd * wmean * wmean);
  st.mse_value = jbar;
  double j_var = 0;
  for (double v : jv) j_var += (v - jbar) * (v - jbar);
  st.mse_value_var = j_var / (nd - 1.0) / nd;
  return st;
}

GapReport estimate_both(const Eigen::VectorXd& tau_i, int i,
                        const ReturnFunction& J, const NoiseSchedule& sched,
                        long n, Rng& rng) {
  const Eigen::Index d = tau_i.size();
  require_param(d >= 1, "guidance input must be non-empty");
  require_param(tau_i.allFinite(), "guidance input must be finite");
  require_param(i >= 1 && i <= sched.steps, "guidance step out of range");
  require_param(n >= 2, "guidance estimators need at least 2 samples");
  if (J.kind == ReturnFunction::Kind::linear) {
    require_param(J.lin_a.size() == d, "linear return dimension mismatch");
  }
  const double ab = sched.alpha_bar[static_cast<std::size_t>(i)];
  require_numeric(ab >= 1e-8,
                  "posterior over clean data is unusable at this step");

  const double sigma = std::sqrt((1.0 - ab) / ab);
  const double root_ab = std::sqrt(ab);
  const double grad_scale = 1.0 / std::sqrt(1.0 - ab);
  const double nd = static_cast<double>(n);

  GapReport rep;
  rep.dim = static_cast<int>(d);
  rep.step = i;
  rep.n = n;
  rep.exact_grad.resize(d);
  rep.mse_grad.resize(d);
  rep.exact_stderr.resize(d);
  rep.mse_stderr.resize(d);

  double diff_var_total = 0;
  double exact_val = 0, exact_val_var = 0;
  double mse_val = 0, mse_val_var = 0;

  if (J.separable()) {
    std::vector<double> z(static_cast<std::size_t>(n));
    std::vector<double> jv(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < d; ++j) {
      const double mu_j = tau_i[j] / root_ab;
      for (long s = 0; s < n; ++s) {
        z[static_cast<std::size_t>(s)] = rng.gaussian();
        const double x = mu_j + sigma * z[static_cast<std::size_t>(s)];
        jv[static_cast<std::size_t>(s)] = J.eval_coord(j, x);
      }
      const CoordStats st = coord_estimates(z, jv);
      rep.exact_grad[j] = st.exact_raw * grad_scale;
      rep.mse_grad[j] = st.mse_raw * grad_scale;
      rep.exact_stderr[j] = std::sqrt(st.exact_var_raw) * grad_scale;
      rep.mse_stderr[j] = std::sqrt(st.mse_var_raw) * grad_scale;
      diff_var_total += st.diff_var_raw * grad_scale * grad_scale;
      exact_val += st.exact_value;
      exact_val_var += st.exact_value_var;
      mse_val += st.mse_value;
      mse_val_var += st.mse_value_var;
    }
    exact_val += J.offset;
    mse_val += J.offset;
  } else {
    // Joint path: the sample matrix is regenerated from a saved generator
    // state on the second pass so memory stays O(n + d).
    Rng replay = rng;
    Eigen::VectorXd jv(n);
    Eigen::VectorXd x(d);
    double jmax = -std::numeric_limits<double>::infinity();
    double jsum = 0;
    for (long s = 0; s < n; ++s) {
      for (Eigen::Index j = 0; j < d; ++j) {
        x[j] = tau_i[j] / root_ab + sigma * rng.gaussian();
      }
      jv[s] = J.eval(x);
      jmax = std::max(jmax, jv[s]);
      jsum += jv[s];
    }
    require_numeric(std::isfinite(jmax) && std::isfinite(jsum),
                    "return evaluated to a non-finite value");
    const double jbar = jsum / nd;
    const double c = nd / (nd - 1.0);

    Eigen::VectorXd w(n);
    double wsum = 0, w2sum = 0;
    for (long s = 0; s < n; ++s) {
      w[s] = std::exp(jv[s] - jmax);
      wsum += w[s];
      w2sum += w[s] * w[s];
    }
    require_numeric(wsum > 0 && std::isfinite(wsum),
                    "importance weights degenerate");

    Eigen::VectorXd s_wz = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd s_w2z = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd s_w2z2 = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd s_t = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd s_t2 = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd s_v = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd s_v2 = Eigen::VectorXd::Zero(d);
    for (long s = 0; s < n; ++s) {
      const double wn = w[s] / wsum;
      const double jt = c * (jv[s] - jbar);
      for (Eigen::Index j = 0; j < d; ++j) {
        const double zj = replay.gaussian();
        s_wz[j] += wn * zj;
        s_w2z[j] += wn * wn * zj;
        s_w2z2[j] += wn * wn * zj * zj;
        const double t = jt * zj;
        s_t[j] += t;
        s_t2[j] += t * t;
        const double v = nd * wn * zj - t;
        s_v[j] += v;
        s_v2[j] += v * v;
      }
    }
    const double wn2sum = w2sum / (wsum * wsum);
    for (Eigen::Index j = 0; j < d; ++j) {
      const double zhat = s_wz[j];
      rep.exact_grad[j] = zhat * grad_scale;
      rep.mse_grad[j] = s_t[j] / nd * grad_scale;
      const double snis_var = std::max(
          0.0, s_w2z2[j] - 2.0 * zhat * s_w2z[j] + zhat * zhat * wn2sum);
      rep.exact_stderr[j] = std::sqrt(snis_var) * grad_scale;
      const double t_var =
          std::max(0.0, (s_t2[j] - s_t[j] * s_t[j] / nd) / (nd - 1.0));
      rep.mse_stderr[j] = std::sqrt(t_var / nd) * grad_scale;
      const double v_var =
          std::max(0.0, (s_v2[j] - s_v[j] * s_v[j] / nd) / (nd - 1.0));
      diff_var_total += v_var / nd * grad_scale * grad_scale;
    }
    exact_val = jmax + std::log(wsum / nd);
    const double w_var = std::max(0.0, (w2sum - wsum * wsum / nd) / (nd - 1.0));
    const double wmean = wsum / nd;
    exact_val_var = w_var / (nd * wmean * wmean);
    mse_val = jbar;
    double j_var = 0;
    for (long s = 0; s < n; ++s) j_var += (jv[s] - jbar) * (jv[s] - jbar);
    mse_val_var = j_var / (nd - 1.0) / nd;
  }

  rep.delta = (rep.exact_grad - rep.mse_grad).norm();
  rep.stderr_agg = std::sqrt(diff_var_total);
  rep.exact_value = exact_val;
  rep.exact_value_stderr = std::sqrt(exact_val_var);
  rep.mse_value = mse_val;
  rep.mse_value_stderr = std::sqrt(mse_val_var);
  return rep;
}

}  // namespace

McEstimate exact_guidance_mc(const Eigen::VectorXd& tau_i, int i,
                             const ReturnFunction& J,
                             const NoiseSchedule& sched, long n, Rng& rng) {
  GapReport rep = estimate_both(tau_i, i, J, sched, n, rng);
  McEstimate est;
  est.grad = std::move(rep.exact_grad);
  est.stderr_coord = std::move(rep.exact_stderr);
  est.value = rep.exact_value;
  est.value_stderr = rep.exact_value_stderr;
  est.n = n;
  return est;
}

McEstimate mse_guidance_mc(const Eigen::VectorXd& tau_i, int i,
                           const ReturnFunction& J, const NoiseSchedule& sched,
                           long n, Rng& rng) {
  GapReport rep = estimate_both(tau_i, i, J, sched, n, rng);
  McEstimate est;
  est.grad = std::move(rep.mse_grad);
  est.stderr_coord = std::move(rep.mse_stderr);
  est.value = rep.mse_value;
  est.value_stderr = rep.mse_value_stderr;
  est.n = n;
  return est;
}

GapReport guidance_gap(const Eigen::VectorXd& tau_i, int i,
                       const ReturnFunction& J, const NoiseSchedule& sched,
                       long n, Rng& rng) {
  return estimate_both(tau_i, i, J, sched, n, rng);
}

ReturnFamily return_family_from_string(const std::string& s) {
  if (s == "constant") return ReturnFamily::constant;
  if (s == "linear") return ReturnFamily::linear;
  if (s == "quadratic") return ReturnFamily::quadratic;
  if (s == "quadratic_normalized") return ReturnFamily::quadratic_normalized;
  fail_param("unknown return family: " + s);
}

std::string return_family_name(ReturnFamily f) {
  switch (f) {
    case ReturnFamily::constant:
      return "constant";
    case ReturnFamily::linear:
      return "linear";
    case ReturnFamily::quadratic:
      return "quadratic";
    case ReturnFamily::quadratic_normalized:
      return "quadratic_normalized";
  }
  fail_param("unknown return family");
}

ReturnFunction make_family_return(ReturnFamily f, int dim) {
  require_param(dim >= 1, "return dimension must be positive");
  switch (f) {
    case ReturnFamily::constant:
      return ReturnFunction::constant(1.0, dim);
    case ReturnFamily::linear:
      return ReturnFunction::linear(Eigen::VectorXd::Ones(dim));
    case ReturnFamily::quadratic:
      return ReturnFunction::quadratic(1.0);
    case ReturnFamily::quadratic_normalized:
      return ReturnFunction::quadratic(1.0 / static_cast<double>(dim));
  }
  fail_param("unknown return family");
}

GapScalingResult gap_scaling_experiment(const std::vector<int>& dims, int step,
                                        ReturnFamily family,
                                        const NoiseSchedule& sched, long n,
                                        int trials, std::uint64_t seed) {
  require_param(dims.size() >= 3, "dimension sweep needs at least 3 sizes");
  int dmin = dims[0], dmax = dims[0];
  for (std::size_t a = 0; a < dims.size(); ++a) {
    require_param(dims[a] >= 1, "dimensions must be positive");
    dmin = std::min(dmin, dims[a]);
    dmax = std::max(dmax, dims[a]);
    for (std::size_t b = a + 1; b < dims.size(); ++b) {
      require_param(dims[a] != dims[b], "dimensions must be distinct");
    }
  }
  require_param(dmax >= 10 * dmin, "dimension sweep must span a decade");
  require_param(step >= 1 && step <= sched.steps, "step out of range");
  require_param(n >= 10, "too few samples per trial");
  require_param(trials >= 2, "need at least 2 trials per dimension");

  GapScalingResult res;
  res.cells.reserve(dims.size());
  for (std::size_t di = 0; di < dims.size(); ++di) {
    const int d = dims[di];
    const ReturnFunction J = make_family_return(family, d);
    double delta_sum = 0, delta_sq_sum = 0, stderr_sum = 0;
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t tag =
          (static_cast<std::uint64_t>(d) << 24) ^
          (static_cast<std::uint64_t>(step) << 16) ^
          static_cast<std::uint64_t>(t);
      Rng trial_rng(mix_seed(seed, tag));
      Eigen::VectorXd tau0(d);
      for (int j = 0; j < d; ++j) tau0[j] = trial_rng.gaussian();
      const Eigen::VectorXd tau_i = forward_diffuse(tau0, step, sched, trial_rng);
      const GapReport rep = guidance_gap(tau_i, step, J, sched, n, trial_rng);
      delta_sum += rep.delta;
      delta_sq_sum += rep.delta * rep.delta;
      stderr_sum += rep.stderr_agg;
    }
    GapCell cell;
    cell.dim = d;
    cell.step = step;
    cell.n = n;
    cell.trials = trials;
    cell.delta_mean = delta_sum / trials;
    cell.delta_mc_stderr = stderr_sum / trials;
    const double var = std::max(
        0.0, (delta_sq_sum - delta_sum * delta_sum / trials) / (trials - 1.0));
    cell.delta_trial_sd = std::sqrt(var);
    cell.significant = cell.delta_mean > 3.0 * cell.delta_mc_stderr;
    res.cells.push_back(cell);
  }

  std::vector<double> xs, ys;
  for (const GapCell& c : res.cells) {
    if (c.significant) {
      xs.push_back(std::log(static_cast<double>(c.dim)));
      ys.push_back(std::log(c.delta_mean));
    }
  }
  if (xs.size() < 3) {
    res.degenerate = true;
    return res;
  }
  const double m = static_cast<double>(xs.size());
  double xbar = 0, ybar = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    xbar += xs[k];
    ybar += ys[k];
  }
  xbar /= m;
  ybar /= m;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - xbar) * (xs[k] - xbar);
    sxy += (xs[k] - xbar) * (ys[k] - ybar);
  }
  require_numeric(sxx > 0, "dimension sweep collapsed to one abscissa");
  res.slope = sxy / sxx;
  res.intercept = ybar - res.slope * xbar;
  double rss = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double r = ys[k] - (res.intercept + res.slope * xs[k]);
    rss += r * r;
  }
  if (xs.size() > 2) {
    res.slope_stderr = std::sqrt(rss / (m - 2.0) / sxx);
  }
  return res;
}

Eigen::VectorXd Guide::value_rows(const Eigen::MatrixXd& x, int step) const {
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    out[r] = value(x.row(r).transpose(), step);
  }
  return out;
}

Eigen::MatrixXd Guide::gradient_rows(const Eigen::MatrixXd& x,
                                     int step) const {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    out.row(r) = gradient(x.row(r).transpose(), step).transpose();
  }
  return out;
}

Mlp train_mse_guide(const Eigen::MatrixXd& rows, const Eigen::VectorXd& returns,
                    const NoiseSchedule& sched, const TrainOptions& opts,
                    TrainCurve* curve) {
  const Eigen::Index N = rows.rows();
  const Eigen::Index d = rows.cols();
  require_param(N >= 1 && d >= 1, "guide training set is empty");
  require_param(returns.size() == N, "one return per training row required");
  require_param(rows.allFinite() && returns.allFinite(),
                "guide training data must be finite");
  require_param(opts.steps >= 0 && opts.batch >= 1, "bad training options");
  require_param(opts.lr > 0 && std::isfinite(opts.lr), "bad learning rate");

  Mlp net(static_cast<int>(d), 1, opts.hidden, opts.embed_dim,
          mix_seed(opts.seed, 0x6D5E));
  Adam adam(net, opts.lr);
  Rng rng(mix_seed(opts.seed, 0x17AB));

  const long steps_per_epoch =
      std::max<long>(1, (static_cast<long>(N) + opts.batch - 1) / opts.batch);
  double epoch_loss = 0;
  long epoch_count = 0;

  Eigen::MatrixXd x(opts.batch, d);
  Eigen::VectorXi step_ids(opts.batch);
  Eigen::VectorXd target(opts.batch);
  Mlp::Cache cache;
  Mlp::Grads grads;

  for (long s = 0; s < opts.steps; ++s) {
    for (long b = 0; b < opts.batch; ++b) {
      const Eigen::Index row =
          static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(N)));
      const int i =
          1 + static_cast<int>(rng.uniform_index(
                  static_cast<std::uint64_t>(sched.steps)));
      const double ab = sched.alpha_bar[static_cast<std::size_t>(i)];
      const double ra = std::sqrt(ab), re = std::sqrt(1.0 - ab);
      for (Eigen::Index j = 0; j < d; ++j) {
        x(b, j) = ra * rows(row, j) + re * rng.gaussian();
      }
      step_ids[static_cast<int>(b)] = i;
      target[b] = returns[row];
    }
    const Eigen::MatrixXd pred = net.forward_cached(x, step_ids, cache);
    const Eigen::VectorXd resid = pred.col(0) - target;
    const double loss = resid.squaredNorm() / static_cast<double>(opts.batch);
    require_numeric(std::isfinite(loss), "training loss diverged");
    Eigen::MatrixXd d_out =
        (2.0 / static_cast<double>(opts.batch)) * resid;
    net.backward(cache, d_out, grads, nullptr);
    adam.step(net, grads);

    epoch_loss += loss;
    ++epoch_count;
    if (curve && (epoch_count == steps_per_epoch || s + 1 == opts.steps)) {
      curve->epoch_loss.push_back(epoch_loss / epoch_count);
      epoch_loss = 0;
      epoch_count = 0;
    }
  }
  return net;
}

Eigen::VectorXd apply_guidance(const Eigen::VectorXd& mu, int i,
                               const Guide& guide, double omega,
                               const NoiseSchedule& sched) {
  require_param(i >= 1 && i <= sched.steps, "guidance step out of range");
  require_param(std::isfinite(omega) && omega >= 0,
                "guidance strength must be finite and non-negative");
  const Eigen::VectorXd g = guide.gradient(mu, i);
  require_numeric(g.allFinite(), "guide gradient is non-finite");
  return mu + omega * sched.posterior_var[static_cast<std::size_t>(i)] * g;
}

}  // namespace lomap
