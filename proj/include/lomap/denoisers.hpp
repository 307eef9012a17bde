#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lomap/diffusion.hpp"
#include "lomap/mlp.hpp"
#include "lomap/normalizer.hpp"

namespace lomap {

// Isotropic Gaussian mixture over clean data: sum_c w_c N(m_c, sigma0_sq I).
// Weights are normalized at construction.
struct GmmSpec {
  Eigen::MatrixXd means;    // C x d
  Eigen::VectorXd weights;  // C
  double sigma0_sq = 1.0;

  static GmmSpec make(Eigen::MatrixXd means, Eigen::VectorXd weights,
                      double sigma0_sq);
  int dim() const { return static_cast<int>(means.cols()); }
  int components() const { return static_cast<int>(means.rows()); }
};

// Closed-form noise prediction under a GMM prior. The noised marginal at
// step i is itself a GMM with means sqrt(ab_i) m_c and component variance
// ab_i sigma0_sq + (1 - ab_i); the score follows from log-sum-exp
// responsibilities and eps_hat = -sqrt(1 - ab_i) * score.
Eigen::VectorXd analytic_gmm_predict_noise(const Eigen::VectorXd& tau_i, int i,
                                           const GmmSpec& gmm,
                                           const NoiseSchedule& sched);

class AnalyticGmmDenoiser : public Denoiser {
 public:
  AnalyticGmmDenoiser(GmmSpec gmm, NoiseSchedule sched)
      : gmm_(std::move(gmm)), sched_(std::move(sched)) {}
  int dim() const override { return gmm_.dim(); }
  Eigen::VectorXd predict_noise(const Eigen::VectorXd& tau_i,
                                int i) const override {
    return analytic_gmm_predict_noise(tau_i, i, gmm_, sched_);
  }
  const GmmSpec& gmm() const { return gmm_; }

 private:
  GmmSpec gmm_;
  NoiseSchedule sched_;
};

class MlpDenoiser : public Denoiser {
 public:
  MlpDenoiser() = default;
  explicit MlpDenoiser(Mlp net) : net_(std::move(net)) {}
  int dim() const override { return net_.in_dim(); }
  Eigen::VectorXd predict_noise(const Eigen::VectorXd& tau_i,
                                int i) const override {
    return net_.forward(tau_i, i);
  }
  Eigen::MatrixXd predict_noise_rows(const Eigen::MatrixXd& tau_i,
                                     int i) const override {
    return net_.forward_rows(tau_i, i);
  }
  const Mlp& net() const { return net_; }
  Mlp& net() { return net_; }

 private:
  Mlp net_;
};

struct TrainOptions {
  long steps = 10000;
  int batch = 64;
  double lr = 1e-3;
  std::vector<int> hidden = {128, 128};
  int embed_dim = 32;
  std::uint64_t seed = 0;
};

struct TrainCurve {
  std::vector<double> epoch_loss;  // mean loss per epoch
};

// Standard eps-prediction objective: rows are (already normalized) clean
// vectors, steps are sampled uniformly from 1..M per example, loss is mean
// squared error against the injected noise. Epoch length is one pass
// equivalent, ceil(N / batch) optimizer steps.
Mlp train_mlp_denoiser(const Eigen::MatrixXd& rows, const NoiseSchedule& sched,
                       const TrainOptions& opts, TrainCurve* curve = nullptr);

// Checkpoint container (LMPC). kind 0 holds a noise model, kind 1 a scalar
// return regressor. The schedule is stored by its constructor arguments and
// rebuilt on load; the normalizer maps between world and diffusion space.
struct Checkpoint {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  int kind = 0;  // 0 denoiser, 1 guide
  int sched_steps = 0;
  ScheduleKind sched_kind = ScheduleKind::cosine;
  double beta_min = 0.0;
  double beta_max = 0.0;
  bool sched_forced = false;
  int horizon = 1;
  int state_dim = 0;
  int action_dim = 0;
  Mlp net;
  Normalizer norm;

  NoiseSchedule schedule() const {
    return build_schedule(sched_steps, sched_kind, beta_min, beta_max,
                          sched_forced);
  }
  int data_dim() const { return horizon * (state_dim + action_dim); }
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace lomap
