#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "lomap/rng.hpp"

namespace lomap {

enum class ScheduleKind { linear = 0, cosine = 1 };

ScheduleKind schedule_kind_from_string(const std::string& s);
std::string schedule_kind_name(ScheduleKind k);

// DDPM variance schedule. Vectors are indexed by diffusion step i in 0..M
// with the clean-data convention at index 0: beta[0] = 0, alpha_bar[0] = 1.
// posterior_var[i] is the reverse-transition variance
// beta_i * (1 - alpha_bar_{i-1}) / (1 - alpha_bar_i); it is exactly 0 at
// i = 1, which is what makes the final reverse step deterministic.
struct NoiseSchedule {
  int steps = 0;  // M
  ScheduleKind kind = ScheduleKind::linear;
  double beta_min = 0.0;
  double beta_max = 0.0;
  bool forced = false;  // accepted despite alpha_bar[M] >= 0.01
  std::vector<double> beta;           // size M+1
  std::vector<double> alpha_bar;      // size M+1, strictly decreasing
  std::vector<double> posterior_var;  // size M+1

  bool terminal_valid() const { return alpha_bar[steps] < 0.01; }
};

// Builds a linear or cosine beta schedule. A schedule whose terminal
// alpha_bar is >= 0.01 is refused unless force is set; such schedules leave
// visible data in tau^M and break the N(0, I) initialization of reverse
// sampling.
NoiseSchedule build_schedule(int steps, ScheduleKind kind, double beta_min,
                             double beta_max, bool force = false);

// tau^i = sqrt(alpha_bar_i) tau0 + sqrt(1 - alpha_bar_i) eps, eps ~ N(0, I).
// i = 0 returns tau0 unchanged and consumes no randomness.
Eigen::VectorXd forward_diffuse(const Eigen::VectorXd& tau0, int i,
                                const NoiseSchedule& sched, Rng& rng);

// Same marginal with caller-supplied noise; used by training loops that need
// the eps target.
Eigen::VectorXd forward_diffuse_given(const Eigen::VectorXd& tau0, int i,
                                      const NoiseSchedule& sched,
                                      const Eigen::VectorXd& eps);

// Noise-prediction interface shared by the analytic and learned denoisers.
// Implementations must be const-callable from multiple threads.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual int dim() const = 0;
  virtual Eigen::VectorXd predict_noise(const Eigen::VectorXd& tau_i,
                                        int i) const = 0;
  // rows of tau_i, all at the same step; default loops over rows
  virtual Eigen::MatrixXd predict_noise_rows(const Eigen::MatrixXd& tau_i,
                                             int i) const;
};

// Tweedie posterior-mean estimate of tau^0 given tau^i:
//   (tau^i - sqrt(1 - alpha_bar_i) eps_hat) / sqrt(alpha_bar_i).
// Requires 1 <= i <= M and alpha_bar_i >= 1e-8 (the division amplifies both
// noise and rounding once alpha_bar underflows that guard).
Eigen::VectorXd tweedie_denoise(const Eigen::VectorXd& tau_i, int i,
                                const Denoiser& den,
                                const NoiseSchedule& sched);

struct ReverseMoments {
  Eigen::VectorXd mean;
  double var = 0.0;  // isotropic; Sigma^i = var * I
};

// DDPM reverse-transition moments:
//   mu = (tau^i - beta_i / sqrt(1 - alpha_bar_i) * eps_hat) / sqrt(1 - beta_i)
ReverseMoments reverse_moments(const Eigen::VectorXd& tau_i, int i,
                               const Denoiser& den, const NoiseSchedule& sched);

// One ancestral step tau^i -> tau^{i-1}. At i = 1 the sample equals the mean
// exactly (posterior_var[1] = 0).
Eigen::VectorXd reverse_step(const Eigen::VectorXd& tau_i, int i,
                             const Denoiser& den, const NoiseSchedule& sched,
                             Rng& rng);

}  // namespace lomap
