#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "lomap/diffusion.hpp"
#include "lomap/error.hpp"
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

// Denoiser that returns a fixed vector regardless of input.
class FixedDenoiser : public Denoiser {
 public:
  explicit FixedDenoiser(Eigen::VectorXd eps) : eps_(std::move(eps)) {}
  int dim() const override { return static_cast<int>(eps_.size()); }
  Eigen::VectorXd predict_noise(const Eigen::VectorXd&, int) const override {
    return eps_;
  }

 private:
  Eigen::VectorXd eps_;
};

}  // namespace

TEST_CASE("index zero is the identity point of both schedules") {
  for (ScheduleKind kind : {ScheduleKind::cosine, ScheduleKind::linear}) {
    const NoiseSchedule s =
        build_schedule(kind == ScheduleKind::linear ? 1000 : 20, kind, 1e-4,
                       kind == ScheduleKind::linear ? 0.02 : 0.999, false);
    CHECK(s.beta[0] == 0.0);
    CHECK(s.alpha_bar[0] == 1.0);
    CHECK(s.posterior_var[0] == 0.0);
    CHECK(s.posterior_var[1] == 0.0);  // no signal mixed in before step 1
    for (int i = 1; i <= s.steps; ++i) {
      CHECK(s.alpha_bar[i] < s.alpha_bar[i - 1]);
      CHECK(s.beta[i] > 0.0);
      CHECK(s.beta[i] < 1.0);
    }
  }
}

TEST_CASE("cosine 20-step signal fractions match an independent recomputation") {
  // Frozen oracle: alpha_bar from the cosine-squared curve with offset 0.008,
  // betas as consecutive ratios clipped into [1e-4, 0.999], evaluated with an
  // independent arbitrary-precision script.
  const NoiseSchedule s = build_schedule(20, ScheduleKind::cosine, 1e-4, 0.999,
                                         false);
  CHECK(s.alpha_bar[20] == doctest::Approx(6.05964e-06).epsilon(1e-5));
  CHECK(s.alpha_bar[10] == doctest::Approx(0.493844).epsilon(1e-5));
  CHECK(s.terminal_valid());
}

TEST_CASE("linear 20-step schedule keeps too much terminal signal") {
  // Frozen oracle: prod(1 - beta_i), beta linear from 1e-4 to 0.2 over 20
  // steps, equals 1.160248e-01 >= 0.01, so the build must be refused.
  CHECK(error_code([] {
          build_schedule(20, ScheduleKind::linear, 1e-4, 0.2, false);
        }) == 2);
  const NoiseSchedule forced =
      build_schedule(20, ScheduleKind::linear, 1e-4, 0.2, true);
  CHECK(forced.forced);
  CHECK(forced.alpha_bar[20] == doctest::Approx(1.160248e-01).epsilon(1e-5));
}

TEST_CASE("linear 1000-step schedule is terminal-valid") {
  // Frozen oracle: 4.035830e-05 under the same product recomputation.
  const NoiseSchedule s =
      build_schedule(1000, ScheduleKind::linear, 1e-4, 0.02, false);
  CHECK(!s.forced);
  CHECK(s.alpha_bar[1000] == doctest::Approx(4.035830e-05).epsilon(1e-5));
}

TEST_CASE("schedule argument validation") {
  CHECK(error_code([] {
          build_schedule(0, ScheduleKind::cosine, 1e-4, 0.999, false);
        }) == 2);
  CHECK(error_code([] {
          build_schedule(10, ScheduleKind::linear, 0.0, 0.2, false);
        }) == 2);
  CHECK(error_code([] {
          build_schedule(10, ScheduleKind::linear, 1e-4, 1.0, false);
        }) == 2);
  CHECK(error_code([] { schedule_kind_from_string("triangular"); }) == 2);
  CHECK(schedule_kind_from_string("linear") == ScheduleKind::linear);
  CHECK(schedule_kind_name(ScheduleKind::cosine) == "cosine");
}

TEST_CASE("forward diffusion with known noise inverts to machine precision") {
  const NoiseSchedule s =
      build_schedule(20, ScheduleKind::cosine, 1e-4, 0.999, false);
  Rng rng(31);
  Eigen::VectorXd tau0(6), eps(6);
  for (int j = 0; j < 6; ++j) {
    tau0[j] = rng.gaussian() * 3.0;
    eps[j] = rng.gaussian();
  }
  for (int i : {1, 10, 20}) {
    const Eigen::VectorXd noised = forward_diffuse_given(tau0, i, s, eps);
    // true-noise oracle: running the Tweedie inversion with the exact eps
    // must return tau0 bit-for-bit up to rounding
    const FixedDenoiser oracle(eps);
    const Eigen::VectorXd back = tweedie_denoise(noised, i, oracle, s);
    CHECK((back - tau0).cwiseAbs().maxCoeff() < 1e-9 * tau0.cwiseAbs().maxCoeff() + 1e-12);
  }
  CHECK(forward_diffuse(tau0, 0, s, rng) == tau0);
}

TEST_CASE("forward marginal of unit-gaussian data stays unit-gaussian") {
  // MC oracle: Var = ab * 1 + (1 - ab) = 1 at every step; n = 4e4 keeps the
  // standard error of the second moment below 0.008.
  const NoiseSchedule s =
      build_schedule(20, ScheduleKind::cosine, 1e-4, 0.999, false);
  Rng rng(77);
  const long n = 40000;
  for (int i : {1, 10, 20}) {
    double sum2 = 0;
    for (long t = 0; t < n; ++t) {
      Eigen::VectorXd tau0(1);
      tau0[0] = rng.gaussian();
      sum2 += forward_diffuse(tau0, i, s, rng).squaredNorm();
    }
    CHECK(std::abs(sum2 / n - 1.0) < 0.04);
  }
}

TEST_CASE("reverse mean agrees with the posterior-mean identity") {
  // Dual route: the epsilon form (tau - beta/sqrt(1-ab) eps)/sqrt(1-beta)
  // must equal the x0-form posterior mean
  // sqrt(ab_prev) beta/(1-ab) x0_hat + sqrt(alpha)(1-ab_prev)/(1-ab) tau.
  const NoiseSchedule s =
      build_schedule(20, ScheduleKind::cosine, 1e-4, 0.999, false);
  Rng rng(5);
  Eigen::VectorXd tau(5), eps(5);
  for (int j = 0; j < 5; ++j) {
    tau[j] = rng.gaussian();
    eps[j] = 0.3 * rng.gaussian();
  }
  const FixedDenoiser den(eps);
  for (int i : {1, 7, 20}) {
    const ReverseMoments m = reverse_moments(tau, i, den, s);
    const double ab = s.alpha_bar[i];
    const double ab_prev = s.alpha_bar[i - 1];
    const double alpha = 1.0 - s.beta[i];
    const Eigen::VectorXd x0 = (tau - std::sqrt(1.0 - ab) * eps) / std::sqrt(ab);
    const Eigen::VectorXd mean2 =
        (std::sqrt(ab_prev) * s.beta[i] / (1.0 - ab)) * x0 +
        (std::sqrt(alpha) * (1.0 - ab_prev) / (1.0 - ab)) * tau;
    CHECK((m.mean - mean2).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(m.var ==
          doctest::Approx(s.beta[i] * (1.0 - ab_prev) / (1.0 - ab)).epsilon(1e-12));
  }
}

TEST_CASE("reverse step at i=1 is deterministic") {
  const NoiseSchedule s =
      build_schedule(20, ScheduleKind::cosine, 1e-4, 0.999, false);
  const FixedDenoiser den(Eigen::VectorXd::Constant(3, 0.1));
  const Eigen::VectorXd tau = Eigen::VectorXd::Constant(3, 0.5);
  Rng r1(1), r2(2);
  const Eigen::VectorXd a = reverse_step(tau, 1, den, s, r1);
  const Eigen::VectorXd b = reverse_step(tau, 1, den, s, r2);
  CHECK(a == b);
  const ReverseMoments m = reverse_moments(tau, 1, den, s);
  CHECK(a == m.mean);
  // with variance the draws differ
  const Eigen::VectorXd c = reverse_step(tau, 10, den, s, r1);
  const Eigen::VectorXd d = reverse_step(tau, 10, den, s, r2);
  CHECK(c != d);
}

TEST_CASE("tweedie guards its validity domain") {
  const NoiseSchedule s =
      build_schedule(20, ScheduleKind::cosine, 1e-4, 0.999, false);
  const FixedDenoiser den(Eigen::VectorXd::Zero(2));
  const Eigen::VectorXd tau = Eigen::VectorXd::Zero(2);
  CHECK(error_code([&] { tweedie_denoise(tau, 0, den, s); }) == 2);
  CHECK(error_code([&] { tweedie_denoise(tau, 21, den, s); }) == 2);

  NoiseSchedule tiny;
  tiny.steps = 2;
  tiny.kind = ScheduleKind::cosine;
  tiny.beta = {0.0, 0.5, 0.5};
  tiny.alpha_bar = {1.0, 1e-4, 1e-9};
  tiny.posterior_var = {0.0, 0.0, 0.25};
  CHECK(error_code([&] { tweedie_denoise(tau, 2, den, tiny); }) == 4);
}

TEST_CASE("reverse MC moments match reverse_moments on a known posterior") {
  // MC oracle: drive reverse_step many times from a fixed tau with a fixed
  // denoiser; the sample mean and variance must land on the analytic moments.
  const NoiseSchedule s =
      build_schedule(20, ScheduleKind::cosine, 1e-4, 0.999, false);
  const FixedDenoiser den(Eigen::VectorXd::Constant(1, 0.4));
  const Eigen::VectorXd tau = Eigen::VectorXd::Constant(1, -0.8);
  const int i = 12;
  const ReverseMoments m = reverse_moments(tau, i, den, s);
  Rng rng(99);
  const long n = 200000;
  double sum = 0, sum2 = 0;
  for (long t = 0; t < n; ++t) {
    const double x = reverse_step(tau, i, den, s, rng)[0];
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  const double sd = std::sqrt(m.var);
  CHECK(std::abs(mean - m.mean[0]) < 5.0 * sd / std::sqrt(double(n)));
  CHECK(std::abs(var - m.var) < 5.0 * m.var * std::sqrt(2.0 / double(n)));
}
