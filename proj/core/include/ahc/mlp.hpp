#pragma once

#include <Eigen/Dense>
#include <string_view>
#include <vector>

#include "ahc/rng.hpp"

namespace ahc {

enum class Activation { kTanh, kRelu };

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

/// Fully connected network with a hidden activation and a linear output
/// layer. All weights live in one flat parameter vector: for each layer the
/// (out x in) column-major weight block followed by the bias.
class Mlp {
 public:
  struct Cache {
    std::vector<Eigen::VectorXd> activations;  // input, each hidden output, final output
  };

  Mlp() = default;
  /// Zero-initialized network; throws for fewer than two layer sizes or a
  /// non-positive size.
  Mlp(std::vector<int> sizes, Activation hidden);

  /// Gaussian weights with std gain/sqrt(fan_in) on hidden layers and
  /// output_gain/sqrt(fan_in) on the last layer; zero biases.
  void initialize(RandomStream& stream, double output_gain);

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  Eigen::VectorXd forward(const Eigen::VectorXd& x, Cache& cache) const;

  /// Adds dL/dparams to `grad` given dL/doutput and the forward cache.
  void backward(const Cache& cache, const Eigen::VectorXd& grad_output, Eigen::VectorXd& grad) const;

  const std::vector<int>& sizes() const { return sizes_; }
  Activation activation() const { return activation_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

 private:
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + static_cast<std::size_t>(sizes_[layer + 1] * sizes_[layer]);
  }

  std::vector<int> sizes_;
  Activation activation_ = Activation::kTanh;
  std::vector<std::size_t> offsets_;
  Eigen::VectorXd params_;
};

/// Adaptive-moment optimizer over a flat parameter vector. `step` performs
/// gradient descent on the supplied gradient.
class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index n_params, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double epsilon = 1e-8);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
  long long steps() const { return t_; }

 private:
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long long t_ = 0;
  Eigen::VectorXd m_, v_;
};

}  // namespace ahc
