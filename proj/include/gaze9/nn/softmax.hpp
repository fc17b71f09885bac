#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "gaze9/core/tensor.hpp"

namespace gaze9::nn {

template <class T>
std::vector<T> softmax(std::span<const T> logits) {
  require(!logits.empty(), "softmax of an empty vector");
  const T shift = *std::max_element(logits.begin(), logits.end());
  std::vector<T> p(logits.size());
  T sum{0};
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - shift);
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

template <class T>
struct SoftmaxLoss {
  T loss;
  std::vector<T> probs;
  std::vector<T> grad_logits;
};

/// Softmax cross-entropy for one sample. The loss is computed from the
/// log-sum-exp form so saturated logits do not produce log(0).
template <class T>
SoftmaxLoss<T> softmax_cross_entropy(std::span<const T> logits, std::size_t label) {
  require(label < logits.size(), "label outside the logit range");
  const T shift = *std::max_element(logits.begin(), logits.end());
  T sum{0};
  for (T l : logits) sum += std::exp(l - shift);
  SoftmaxLoss<T> r{std::log(sum) - (logits[label] - shift), softmax(logits), {}};
  r.grad_logits = r.probs;
  r.grad_logits[label] -= T{1};
  return r;
}

/// Mean loss over an N x K batch; the gradient is scaled by 1/N.
template <class T>
T softmax_cross_entropy_batch(const Tensor<T>& logits, std::span<const std::size_t> labels, Tensor<T>& grad) {
  require(logits.rank() == 2 && logits.dim(0) == labels.size(), "logits must be N x K with N labels");
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  grad = Tensor<T>(logits.shape());
  T total{0};
  const T inv_n = T{1} / static_cast<T>(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = softmax_cross_entropy<T>(logits.data().subspan(i * k, k), labels[i]);
    total += r.loss;
    for (std::size_t j = 0; j < k; ++j) grad[i * k + j] = r.grad_logits[j] * inv_n;
  }
  return total * inv_n;
}

}  // namespace gaze9::nn
