#include "lomap/diffusion.hpp"

#include <algorithm>
#include <cmath>

#include "lomap/error.hpp"

namespace lomap {

ScheduleKind schedule_kind_from_string(const std::string& s) {
  if (s == "linear") return ScheduleKind::linear;
  if (s == "cosine") return ScheduleKind::cosine;
  fail_param("unknown schedule kind: " + s);
}

std::string schedule_kind_name(ScheduleKind k) {
  return k == ScheduleKind::linear ? "linear" : "cosine";
}

NoiseSchedule build_schedule(int steps, ScheduleKind kind, double beta_min,
                             double beta_max, bool force) {
  require_param(steps >= 1, "schedule needs at least one step");
  require_param(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0,
                "need 0 < beta_min <= beta_max < 1");

  NoiseSchedule s;
  s.steps = steps;
  s.kind = kind;
  s.beta_min = beta_min;
  s.beta_max = beta_max;
  s.beta.assign(steps + 1, 0.0);
  s.alpha_bar.assign(steps + 1, 1.0);
  s.posterior_var.assign(steps + 1, 0.0);

  if (kind == ScheduleKind::linear) {
    for (int i = 1; i <= steps; ++i) {
      double t = steps == 1 ? 0.0 : double(i - 1) / double(steps - 1);
      s.beta[i] = beta_min + t * (beta_max - beta_min);
    }
  } else {
    // Nichol-Dhariwal cosine alpha_bar with offset 0.008; betas derived from
    // consecutive ratios and clipped into [beta_min, beta_max].
    const double off = 0.008;
    auto f = [&](double t) {
      double x = ((t / steps) + off) / (1.0 + off) * 1.5707963267948966;
      double c = std::cos(x);
      return c * c;
    };
    double f0 = f(0.0);
    double prev = 1.0;
    for (int i = 1; i <= steps; ++i) {
      double cur = f(double(i)) / f0;
      double b = 1.0 - cur / prev;
      s.beta[i] = std::clamp(b, beta_min, beta_max);
      prev = cur;
    }
  }

  for (int i = 1; i <= steps; ++i) {
    s.alpha_bar[i] = s.alpha_bar[i - 1] * (1.0 - s.beta[i]);
    if (!(s.alpha_bar[i] > 0.0) || s.alpha_bar[i] >= s.alpha_bar[i - 1])
      fail_numeric("alpha_bar not strictly decreasing");
  }
  for (int i = 1; i <= steps; ++i) {
    s.posterior_var[i] =
        s.beta[i] * (1.0 - s.alpha_bar[i - 1]) / (1.0 - s.alpha_bar[i]);
  }

  if (!s.terminal_valid()) {
    if (!force)
      fail_param("terminal alpha_bar = " + std::to_string(s.alpha_bar[steps]) +
                 " >= 0.01; pass force to accept a terminal-invalid schedule");
    s.forced = true;
  }
  return s;
}

Eigen::VectorXd forward_diffuse(const Eigen::VectorXd& tau0, int i,
                                const NoiseSchedule& sched, Rng& rng) {
  require_param(i >= 0 && i <= sched.steps, "step out of range");
  if (i == 0) return tau0;
  Eigen::VectorXd eps(tau0.size());
  for (Eigen::Index k = 0; k < eps.size(); ++k) eps[k] = rng.gaussian();
  return forward_diffuse_given(tau0, i, sched, eps);
}

Eigen::VectorXd forward_diffuse_given(const Eigen::VectorXd& tau0, int i,
                                      const NoiseSchedule& sched,
                                      const Eigen::VectorXd& eps) {
  require_param(i >= 0 && i <= sched.steps, "step out of range");
  require_param(eps.size() == tau0.size(), "noise dimension mismatch");
  double ab = sched.alpha_bar[i];
  return std::sqrt(ab) * tau0 + std::sqrt(1.0 - ab) * eps;
}

Eigen::MatrixXd Denoiser::predict_noise_rows(const Eigen::MatrixXd& tau_i,
                                             int i) const {
  Eigen::MatrixXd out(tau_i.rows(), tau_i.cols());
  for (Eigen::Index r = 0; r < tau_i.rows(); ++r)
    out.row(r) = predict_noise(tau_i.row(r).transpose(), i).transpose();
  return out;
}

Eigen::VectorXd tweedie_denoise(const Eigen::VectorXd& tau_i, int i,
                                const Denoiser& den,
                                const NoiseSchedule& sched) {
  require_param(i >= 1 && i <= sched.steps, "step out of range");
  double ab = sched.alpha_bar[i];
  require_numeric(ab >= 1e-8, "alpha_bar below 1e-8; Tweedie inversion unstable");
  Eigen::VectorXd eps = den.predict_noise(tau_i, i);
  return (tau_i - std::sqrt(1.0 - ab) * eps) / std::sqrt(ab);
}

ReverseMoments reverse_moments(const Eigen::VectorXd& tau_i, int i,
                               const Denoiser& den,
                               const NoiseSchedule& sched) {
  require_param(i >= 1 && i <= sched.steps, "step out of range");
  double b = sched.beta[i];
  double ab = sched.alpha_bar[i];
  Eigen::VectorXd eps = den.predict_noise(tau_i, i);
  ReverseMoments m;
  m.mean = (tau_i - (b / std::sqrt(1.0 - ab)) * eps) / std::sqrt(1.0 - b);
  m.var = sched.posterior_var[i];
  return m;
}

Eigen::VectorXd reverse_step(const Eigen::VectorXd& tau_i, int i,
                             const Denoiser& den, const NoiseSchedule& sched,
                             Rng& rng) {
  ReverseMoments m = reverse_moments(tau_i, i, den, sched);
  if (m.var <= 0.0) return m.mean;
  double sd = std::sqrt(m.var);
  Eigen::VectorXd out = m.mean;
  for (Eigen::Index k = 0; k < out.size(); ++k) out[k] += sd * rng.gaussian();
  return out;
}

}  // namespace lomap
