#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lomap/denoisers.hpp"
#include "lomap/diffusion.hpp"
#include "lomap/mlp.hpp"

namespace lomap {

// Scalar return over clean trajectories. The kind tag is not cosmetic: the
// Monte-Carlo gap estimators dispatch on it, using exact per-coordinate
// factorizations for linear/quadratic returns (J = sum_j J_j(x_j)) and the
// generic joint estimators otherwise.
struct ReturnFunction {
  enum class Kind {
    linear = 0,
    quadratic = 1,
    discounted_reward_sum = 2,
    custom = 3,
  };

  Kind kind = Kind::custom;
  Eigen::VectorXd lin_a;    // linear: J = a.x + offset
  double quad_coeff = 1.0;  // quadratic: J = -0.5 * coeff * ||x||^2 + offset
  double offset = 0.0;
  std::function<double(const Eigen::VectorXd&)> fn;

  static ReturnFunction constant(double c, int dim);
  static ReturnFunction linear(Eigen::VectorXd a, double offset = 0.0);
  static ReturnFunction quadratic(double coeff = 1.0, double offset = 0.0);
  static ReturnFunction custom(std::function<double(const Eigen::VectorXd&)> f);
  static ReturnFunction discounted_reward_sum(
      std::function<double(const Eigen::VectorXd&)> f);

  bool separable() const {
    return kind == Kind::linear || kind == Kind::quadratic;
  }
  double eval(const Eigen::VectorXd& tau0) const;
  // contribution of coordinate j alone, offset excluded (separable kinds)
  double eval_coord(Eigen::Index j, double x) const;
};

struct McEstimate {
  Eigen::VectorXd grad;
  Eigen::VectorXd stderr_coord;
  double value = 0.0;         // exact: log E[e^J]; mse: E[J]
  double value_stderr = 0.0;
  long n = 0;
};

// Self-normalized importance-weighted estimate of the exact guidance
// gradient grad_{tau^i} log E[e^{J(tau^0)}], sampling tau^0 from the
// single-sample posterior q(tau^0 | tau^i) = N(tau^i / sqrt(ab),
// (1 - ab)/ab I) and using grad log q = -eps / sqrt(1 - ab). Weights are
// max-subtracted before exponentiation.
McEstimate exact_guidance_mc(const Eigen::VectorXd& tau_i, int i,
                             const ReturnFunction& J,
                             const NoiseSchedule& sched, long n, Rng& rng);

// Same sampling scheme with unexponentiated weights: estimates
// E[J(tau^0) grad log q], the gradient the MSE-trained guide converges to.
// J is centered by its sample mean (E[grad log q] = 0 keeps the target
// expectation unchanged) with an n/(n-1) debias factor.
McEstimate mse_guidance_mc(const Eigen::VectorXd& tau_i, int i,
                           const ReturnFunction& J, const NoiseSchedule& sched,
                           long n, Rng& rng);

struct GapReport {
  Eigen::VectorXd exact_grad;
  Eigen::VectorXd mse_grad;
  Eigen::VectorXd exact_stderr;  // per-coordinate, delta method
  Eigen::VectorXd mse_stderr;
  double delta = 0.0;    // || exact - mse ||_2
  double stderr_agg = 0.0;  // sqrt(sum_j Var(diff_j)), first-order
  double exact_value = 0.0;
  double mse_value = 0.0;
  double exact_value_stderr = 0.0;
  double mse_value_stderr = 0.0;
  int dim = 0;
  int step = 0;
  long n = 0;
};

// Both estimators evaluated on one shared sample set, plus the gap magnitude
// and an aggregate standard error for it.
GapReport guidance_gap(const Eigen::VectorXd& tau_i, int i,
                       const ReturnFunction& J, const NoiseSchedule& sched,
                       long n, Rng& rng);

enum class ReturnFamily {
  constant = 0,
  linear = 1,
  quadratic = 2,
  quadratic_normalized = 3,
};

ReturnFamily return_family_from_string(const std::string& s);
std::string return_family_name(ReturnFamily f);
ReturnFunction make_family_return(ReturnFamily f, int dim);

struct GapCell {
  int dim = 0;
  int step = 0;
  long n = 0;
  int trials = 0;
  double delta_mean = 0.0;
  double delta_mc_stderr = 0.0;  // mean per-trial aggregate MC stderr
  double delta_trial_sd = 0.0;   // spread of per-trial deltas
  bool significant = false;      // delta_mean > 3 * delta_mc_stderr
};

struct GapScalingResult {
  std::vector<GapCell> cells;
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  bool degenerate = false;  // fewer than 3 dims significantly above zero
};

// Sweeps trajectory dimension at a fixed step. tau^i is drawn fresh per
// trial from the forward marginal of unit-Gaussian data (which is N(0, I)
// at every step). Requires >= 3 distinct dims spanning at least a decade.
GapScalingResult gap_scaling_experiment(const std::vector<int>& dims, int step,
                                        ReturnFamily family,
                                        const NoiseSchedule& sched, long n,
                                        int trials, std::uint64_t seed);

// Guidance consumers; the planner shifts reverse-transition means by
// omega * Sigma^i * grad J_phi evaluated at the mean.
class Guide {
 public:
  virtual ~Guide() = default;
  virtual double value(const Eigen::VectorXd& x, int step) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& x, int step) const = 0;
  virtual Eigen::VectorXd value_rows(const Eigen::MatrixXd& x, int step) const;
  virtual Eigen::MatrixXd gradient_rows(const Eigen::MatrixXd& x,
                                        int step) const;
};

class MseGuide : public Guide {
 public:
  MseGuide() = default;
  explicit MseGuide(Mlp net) : net_(std::move(net)) {}
  double value(const Eigen::VectorXd& x, int step) const override {
    return net_.forward(x, step)[0];
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x, int step) const override {
    return net_.input_gradient(x, step);
  }
  Eigen::VectorXd value_rows(const Eigen::MatrixXd& x, int step) const override {
    return net_.forward_rows(x, step).col(0);
  }
  Eigen::MatrixXd gradient_rows(const Eigen::MatrixXd& x,
                                int step) const override {
    return net_.input_gradient_rows(x, step);
  }
  const Mlp& net() const { return net_; }
  Mlp& net() { return net_; }

 private:
  Mlp net_;
};

// Fixed-gradient guide; closed-form shift checks and directional sampling
// tests use it in place of a trained net.
class LinearGuide : public Guide {
 public:
  explicit LinearGuide(Eigen::VectorXd a) : a_(std::move(a)) {}
  double value(const Eigen::VectorXd& x, int) const override {
    return a_.dot(x);
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd&, int) const override {
    return a_;
  }

 private:
  Eigen::VectorXd a_;
};

// Regresses dataset returns from noised inputs; the minimizer of this MSE
// objective is E[J | tau^i], whose gradient the gap experiments compare
// against the exact tilt.
Mlp train_mse_guide(const Eigen::MatrixXd& rows,
                    const Eigen::VectorXd& returns, const NoiseSchedule& sched,
                    const TrainOptions& opts, TrainCurve* curve = nullptr);

// mu + omega * posterior_var_i * grad J(mu, i). The shift vanishes at i = 1
// where the reverse step is deterministic.
Eigen::VectorXd apply_guidance(const Eigen::VectorXd& mu, int i,
                               const Guide& guide, double omega,
                               const NoiseSchedule& sched);

}  // namespace lomap
