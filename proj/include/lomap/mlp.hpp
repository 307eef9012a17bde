#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "lomap/rng.hpp"

namespace lomap {

// Small fully-connected network with a fixed sinusoidal step embedding
// appended to the input. Hidden activations are SiLU (smooth, so central
// finite differences converge cleanly); the output layer is linear.
class Mlp {
 public:
  Mlp() = default;
  Mlp(int in_dim, int out_dim, std::vector<int> hidden, int embed_dim,
      std::uint64_t init_seed);

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  int embed_dim() const { return embed_dim_; }
  const std::vector<int>& hidden() const { return hidden_; }

  Eigen::VectorXd embed_step(int step) const;

  Eigen::VectorXd forward(const Eigen::VectorXd& x, int step) const;
  // rows of x at a shared step
  Eigen::MatrixXd forward_rows(const Eigen::MatrixXd& x, int step) const;

  struct Cache {
    Eigen::MatrixXd a0;                // input with embedding appended
    std::vector<Eigen::MatrixXd> z;    // pre-activations per layer
    std::vector<Eigen::MatrixXd> a;    // post-activations per layer
  };

  struct Grads {
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;
    void zero_like(const Mlp& net);
  };

  // X is B x in_dim, steps is length B. Returns B x out_dim.
  Eigen::MatrixXd forward_cached(const Eigen::MatrixXd& x,
                                 const Eigen::VectorXi& steps,
                                 Cache& cache) const;

  // d_out is B x out_dim (dLoss/dOutput). Fills parameter gradients and,
  // when d_input is non-null, the gradient w.r.t. the raw input block
  // (embedding columns dropped).
  void backward(const Cache& cache, const Eigen::MatrixXd& d_out, Grads& g,
                Eigen::MatrixXd* d_input = nullptr) const;

  // gradient of a scalar output w.r.t. the input for out_dim == 1 networks
  Eigen::VectorXd input_gradient(const Eigen::VectorXd& x, int step) const;
  // row-wise input gradients for out_dim == 1 networks
  Eigen::MatrixXd input_gradient_rows(const Eigen::MatrixXd& x, int step) const;

  std::size_t n_params() const;
  Eigen::VectorXd params_flat() const;
  void set_params_flat(const Eigen::VectorXd& p);
  // (rows, cols) per block in serialization order W0, b0, W1, b1, ...
  std::vector<std::pair<int, int>> shapes() const;

  const std::vector<Eigen::MatrixXd>& weights() const { return w_; }
  const std::vector<Eigen::VectorXd>& biases() const { return b_; }
  std::vector<Eigen::MatrixXd>& weights() { return w_; }
  std::vector<Eigen::VectorXd>& biases() { return b_; }

 private:
  int in_dim_ = 0;
  int out_dim_ = 0;
  int embed_dim_ = 0;
  std::vector<int> hidden_;
  std::vector<Eigen::MatrixXd> w_;  // layer l: (out_l x in_l)
  std::vector<Eigen::VectorXd> b_;
};

// Adam with shapes mirroring the network blocks.
class Adam {
 public:
  Adam(const Mlp& net, double lr);
  void step(Mlp& net, const Mlp::Grads& g);

 private:
  double lr_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
  std::vector<Eigen::MatrixXd> mw_, vw_;
  std::vector<Eigen::VectorXd> mb_, vb_;
};

}  // namespace lomap
