#include "ahc/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ahc {

std::string_view activation_name(Activation a) { return a == Activation::kTanh ? "tanh" : "relu"; }

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

Mlp::Mlp(std::vector<int> sizes, Activation hidden) : sizes_(std::move(sizes)), activation_(hidden) {
  if (sizes_.size() < 2) throw std::invalid_argument("an MLP needs at least input and output sizes");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] < 1 || sizes_[l + 1] < 1) throw std::invalid_argument("layer sizes must be positive");
    offsets_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l + 1] * sizes_[l] + sizes_[l + 1]);
  }
  params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total));
}

void Mlp::initialize(RandomStream& stream, double output_gain) {
  params_.setZero();
  const std::size_t n_layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const double gain = (l + 1 == n_layers) ? output_gain : 1.0;
    const double std = gain / std::sqrt(static_cast<double>(sizes_[l]));
    const auto n = static_cast<std::size_t>(sizes_[l + 1] * sizes_[l]);
    for (std::size_t i = 0; i < n; ++i)
      params_[static_cast<Eigen::Index>(weight_offset(l) + i)] = std * stream.normal();
  }
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  Cache cache;
  return forward(x, cache);
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x, Cache& cache) const {
  if (x.size() != input_size()) throw std::invalid_argument("MLP input size mismatch");
  const std::size_t n_layers = sizes_.size() - 1;
  cache.activations.resize(n_layers + 1);
  cache.activations[0] = x;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const Eigen::Map<const Eigen::MatrixXd> W(params_.data() + weight_offset(l), sizes_[l + 1], sizes_[l]);
    const Eigen::Map<const Eigen::VectorXd> b(params_.data() + bias_offset(l), sizes_[l + 1]);
    Eigen::VectorXd z = W * cache.activations[l] + b;
    if (l + 1 < n_layers) {
      if (activation_ == Activation::kTanh)
        z = z.array().tanh();
      else
        z = z.array().max(0.0);
    }
    cache.activations[l + 1] = std::move(z);
  }
  return cache.activations.back();
}

void Mlp::backward(const Cache& cache, const Eigen::VectorXd& grad_output, Eigen::VectorXd& grad) const {
  if (grad.size() != params_.size()) grad = Eigen::VectorXd::Zero(params_.size());
  const std::size_t n_layers = sizes_.size() - 1;
  Eigen::VectorXd delta = grad_output;  // dL/dz of the current layer
  for (std::size_t l = n_layers; l-- > 0;) {
    Eigen::Map<Eigen::MatrixXd> gW(grad.data() + weight_offset(l), sizes_[l + 1], sizes_[l]);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + bias_offset(l), sizes_[l + 1]);
    gW.noalias() += delta * cache.activations[l].transpose();
    gb += delta;
    if (l == 0) break;
    const Eigen::Map<const Eigen::MatrixXd> W(params_.data() + weight_offset(l), sizes_[l + 1], sizes_[l]);
    Eigen::VectorXd upstream = W.transpose() * delta;
    const auto& a = cache.activations[l];
    if (activation_ == Activation::kTanh)
      delta = upstream.array() * (1.0 - a.array().square());
    else
      delta = upstream.array() * (a.array() > 0.0).cast<double>();
  }
}

Adam::Adam(Eigen::Index n_params, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(epsilon),
      m_(Eigen::VectorXd::Zero(n_params)),
      v_(Eigen::VectorXd::Zero(n_params)) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  if (grad.size() != params.size() || m_.size() != params.size())
    throw std::invalid_argument("Adam parameter size mismatch");
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + eps_);
}

}  // namespace ahc
