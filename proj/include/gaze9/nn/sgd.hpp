#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaze9/core/tensor.hpp"

namespace gaze9::nn {

class NonFiniteGradient : public std::runtime_error {
 public:
  explicit NonFiniteGradient(std::size_t tensor_index)
      : std::runtime_error("non-finite gradient in tensor " + std::to_string(tensor_index)), index_(tensor_index) {}
  std::size_t tensor_index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// SGD with classical momentum: v <- mu*v - lr*g; p <- p + v.
template <class T>
class Sgd {
 public:
  Sgd(T learning_rate, T momentum) : lr_(learning_rate), momentum_(momentum) {
    if (!(learning_rate > T{0})) throw std::invalid_argument("learning rate must be positive");
    if (momentum < T{0} || momentum >= T{1}) throw std::invalid_argument("momentum must be in [0, 1)");
  }

  T learning_rate() const noexcept { return lr_; }
  void set_learning_rate(T lr) { lr_ = lr; }
  const std::vector<Tensor<T>>& velocity() const noexcept { return velocity_; }

  /// All gradients are validated before any parameter is touched, so a
  /// rejected step leaves parameters and velocity unchanged.
  void step(std::span<Tensor<T>* const> params, std::span<const Tensor<T>> grads) {
    require(params.size() == grads.size(), "parameter and gradient lists differ in length");
    for (std::size_t i = 0; i < params.size(); ++i) {
      require(params[i]->shape() == grads[i].shape(),
              "gradient " + std::to_string(i) + " shape " + shape_string(grads[i].shape()) +
                  " does not match parameter " + shape_string(params[i]->shape()));
      if (!grads[i].all_finite()) throw NonFiniteGradient(i);
    }
    if (velocity_.empty()) {
      for (auto* p : params) velocity_.emplace_back(p->shape());
    }
    require(velocity_.size() == params.size(), "optimizer reused with a different parameter set");
    for (std::size_t i = 0; i < params.size(); ++i) {
      T* p = params[i]->raw();
      T* v = velocity_[i].raw();
      const T* g = grads[i].raw();
      for (std::size_t k = 0; k < grads[i].size(); ++k) {
        v[k] = momentum_ * v[k] - lr_ * g[k];
        p[k] += v[k];
      }
    }
  }

 private:
  T lr_;
  T momentum_;
  std::vector<Tensor<T>> velocity_;
};

}  // namespace gaze9::nn
