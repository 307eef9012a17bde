#include "lomap/mlp.hpp"

#include <cmath>

#include "lomap/error.hpp"

namespace lomap {

namespace {

inline double silu(double x) { return x / (1.0 + std::exp(-x)); }

inline double silu_grad(double x) {
  double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 + x * (1.0 - s));
}

Eigen::MatrixXd silu_mat(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double v) { return silu(v); });
}

Eigen::MatrixXd silu_grad_mat(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double v) { return silu_grad(v); });
}

}  // namespace

Mlp::Mlp(int in_dim, int out_dim, std::vector<int> hidden, int embed_dim,
         std::uint64_t init_seed)
    : in_dim_(in_dim),
      out_dim_(out_dim),
      embed_dim_(embed_dim),
      hidden_(std::move(hidden)) {
  require_param(in_dim >= 1 && out_dim >= 1, "bad network shape");
  require_param(embed_dim >= 2 && embed_dim % 2 == 0,
                "embed_dim must be a positive even number");
  require_param(!hidden_.empty(), "need at least one hidden layer");

  Rng rng(init_seed);
  std::vector<int> dims;
  dims.push_back(in_dim_ + embed_dim_);
  for (int h : hidden_) dims.push_back(h);
  dims.push_back(out_dim_);

  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    int rows = dims[l + 1], cols = dims[l];
    double bound = std::sqrt(1.0 / cols);
    Eigen::MatrixXd w(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        w(r, c) = (2.0 * rng.uniform() - 1.0) * bound;
    w_.push_back(std::move(w));
    b_.push_back(Eigen::VectorXd::Zero(rows));
  }
}

Eigen::VectorXd Mlp::embed_step(int step) const {
  int half = embed_dim_ / 2;
  Eigen::VectorXd e(embed_dim_);
  for (int k = 0; k < half; ++k) {
    double freq = std::exp(-std::log(10000.0) * double(k) / double(half));
    e[2 * k] = std::sin(step * freq);
    e[2 * k + 1] = std::cos(step * freq);
  }
  return e;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x, int step) const {
  return forward_rows(x.transpose(), step).row(0).transpose();
}

Eigen::MatrixXd Mlp::forward_rows(const Eigen::MatrixXd& x, int step) const {
  require_param(x.cols() == in_dim_, "input dimension mismatch");
  Eigen::MatrixXd a(x.rows(), in_dim_ + embed_dim_);
  a.leftCols(in_dim_) = x;
  a.rightCols(embed_dim_) = embed_step(step).transpose().replicate(x.rows(), 1);
  for (std::size_t l = 0; l < w_.size(); ++l) {
    Eigen::MatrixXd z = a * w_[l].transpose();
    z.rowwise() += b_[l].transpose();
    a = (l + 1 == w_.size()) ? z : silu_mat(z);
  }
  return a;
}

void Mlp::Grads::zero_like(const Mlp& net) {
  w.clear();
  b.clear();
  for (const auto& m : net.weights())
    w.push_back(Eigen::MatrixXd::Zero(m.rows(), m.cols()));
  for (const auto& v : net.biases())
    b.push_back(Eigen::VectorXd::Zero(v.size()));
}

Eigen::MatrixXd Mlp::forward_cached(const Eigen::MatrixXd& x,
                                    const Eigen::VectorXi& steps,
                                    Cache& cache) const {
  require_param(x.cols() == in_dim_, "input dimension mismatch");
  require_param(steps.size() == x.rows(), "steps length mismatch");
  cache.a0.resize(x.rows(), in_dim_ + embed_dim_);
  cache.a0.leftCols(in_dim_) = x;
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    cache.a0.block(r, in_dim_, 1, embed_dim_) = embed_step(steps[r]).transpose();

  cache.z.assign(w_.size(), Eigen::MatrixXd());
  cache.a.assign(w_.size(), Eigen::MatrixXd());
  const Eigen::MatrixXd* prev = &cache.a0;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    cache.z[l] = (*prev) * w_[l].transpose();
    cache.z[l].rowwise() += b_[l].transpose();
    cache.a[l] = (l + 1 == w_.size()) ? cache.z[l] : silu_mat(cache.z[l]);
    prev = &cache.a[l];
  }
  return cache.a.back();
}

void Mlp::backward(const Cache& cache, const Eigen::MatrixXd& d_out, Grads& g,
                   Eigen::MatrixXd* d_input) const {
  g.zero_like(*this);
  Eigen::MatrixXd dz = d_out;  // output layer is linear
  for (int l = static_cast<int>(w_.size()) - 1; l >= 0; --l) {
    const Eigen::MatrixXd& a_prev = (l == 0) ? cache.a0 : cache.a[l - 1];
    g.w[l] = dz.transpose() * a_prev;
    g.b[l] = dz.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd da = dz * w_[l];
      dz = da.cwiseProduct(silu_grad_mat(cache.z[l - 1]));
    } else if (d_input != nullptr) {
      Eigen::MatrixXd da0 = dz * w_[0];
      *d_input = da0.leftCols(in_dim_);
    }
  }
}

Eigen::VectorXd Mlp::input_gradient(const Eigen::VectorXd& x, int step) const {
  return input_gradient_rows(x.transpose(), step).row(0).transpose();
}

Eigen::MatrixXd Mlp::input_gradient_rows(const Eigen::MatrixXd& x,
                                         int step) const {
  require_param(out_dim_ == 1, "input_gradient expects a scalar head");
  Cache cache;
  Eigen::VectorXi steps = Eigen::VectorXi::Constant(x.rows(), step);
  forward_cached(x, steps, cache);
  Grads g;
  Eigen::MatrixXd d_input;
  backward(cache, Eigen::MatrixXd::Ones(x.rows(), 1), g, &d_input);
  return d_input;
}

std::size_t Mlp::n_params() const {
  std::size_t n = 0;
  for (const auto& m : w_) n += static_cast<std::size_t>(m.size());
  for (const auto& v : b_) n += static_cast<std::size_t>(v.size());
  return n;
}

std::vector<std::pair<int, int>> Mlp::shapes() const {
  std::vector<std::pair<int, int>> s;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    s.emplace_back(static_cast<int>(w_[l].rows()), static_cast<int>(w_[l].cols()));
    s.emplace_back(static_cast<int>(b_[l].size()), 1);
  }
  return s;
}

Eigen::VectorXd Mlp::params_flat() const {
  Eigen::VectorXd p(n_params());
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    for (Eigen::Index r = 0; r < w_[l].rows(); ++r)
      for (Eigen::Index c = 0; c < w_[l].cols(); ++c) p[pos++] = w_[l](r, c);
    for (Eigen::Index k = 0; k < b_[l].size(); ++k) p[pos++] = b_[l][k];
  }
  return p;
}

void Mlp::set_params_flat(const Eigen::VectorXd& p) {
  require_param(static_cast<std::size_t>(p.size()) == n_params(),
                "parameter vector size mismatch");
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    for (Eigen::Index r = 0; r < w_[l].rows(); ++r)
      for (Eigen::Index c = 0; c < w_[l].cols(); ++c) w_[l](r, c) = p[pos++];
    for (Eigen::Index k = 0; k < b_[l].size(); ++k) b_[l][k] = p[pos++];
  }
}

Adam::Adam(const Mlp& net, double lr) : lr_(lr) {
  for (const auto& m : net.weights()) {
    mw_.push_back(Eigen::MatrixXd::Zero(m.rows(), m.cols()));
    vw_.push_back(Eigen::MatrixXd::Zero(m.rows(), m.cols()));
  }
  for (const auto& v : net.biases()) {
    mb_.push_back(Eigen::VectorXd::Zero(v.size()));
    vb_.push_back(Eigen::VectorXd::Zero(v.size()));
  }
}

void Adam::step(Mlp& net, const Mlp::Grads& g) {
  ++t_;
  double c1 = 1.0 - std::pow(beta1_, double(t_));
  double c2 = 1.0 - std::pow(beta2_, double(t_));
  for (std::size_t l = 0; l < net.weights().size(); ++l) {
    mw_[l] = beta1_ * mw_[l] + (1.0 - beta1_) * g.w[l];
    vw_[l] = beta2_ * vw_[l] + (1.0 - beta2_) * g.w[l].cwiseProduct(g.w[l]);
    net.weights()[l] -=
        (lr_ * (mw_[l] / c1).array() /
         ((vw_[l] / c2).array().sqrt() + eps_))
            .matrix();
    mb_[l] = beta1_ * mb_[l] + (1.0 - beta1_) * g.b[l];
    vb_[l] = beta2_ * vb_[l] + (1.0 - beta2_) * g.b[l].cwiseProduct(g.b[l]);
    net.biases()[l] -=
        (lr_ * (mb_[l] / c1).array() /
         ((vb_[l] / c2).array().sqrt() + eps_))
            .matrix();
  }
}

}  // namespace lomap
