#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gaze9/core/tensor.hpp"

namespace gaze9::nn {

enum class BnMode { kTrain, kInfer };

/// Per-channel batch normalization over every axis except the last.
template <class T>
struct BatchNorm {
  Tensor<T> gamma;
  Tensor<T> beta;
  Tensor<T> running_mean;
  Tensor<T> running_var;
  T epsilon = T(1e-5);
  /// Weight of the previous running value in the moving average.
  T momentum = T(0.9);

  BatchNorm() = default;
  explicit BatchNorm(std::size_t channels)
      : gamma({channels}, T{1}), beta({channels}), running_mean({channels}), running_var({channels}, T{1}) {}

  std::size_t channels() const { return gamma.size(); }
};

template <class T>
struct BatchNormCache {
  Tensor<T> normalized;     // pre-affine x_hat
  std::vector<T> inv_std;   // 1 / sqrt(var + eps) per channel
};

template <class T>
struct BatchNormGrads {
  Tensor<T> input;
  Tensor<T> gamma;
  Tensor<T> beta;
};

namespace detail {
template <class T>
void check_bn(const Tensor<T>& input, const BatchNorm<T>& p) {
  require(input.rank() >= 2, "batchnorm expects at least a rank-2 tensor");
  const std::size_t c = input.shape().back();
  require(p.gamma.size() == c && p.beta.size() == c, "batchnorm gamma/beta length does not match channels");
  require(p.running_mean.size() == c && p.running_var.size() == c,
          "batchnorm running statistics are missing or do not match channels");
}
}  // namespace detail

/// Inference: a pure function of the input and the running statistics.
template <class T>
Tensor<T> batchnorm_infer(const Tensor<T>& input, const BatchNorm<T>& p) {
  detail::check_bn(input, p);
  const std::size_t c = input.shape().back();
  const std::size_t m = input.size() / c;
  Tensor<T> out(input.shape());
  const T* x = input.raw();
  T* y = out.raw();
  std::vector<T> scale(c), shift(c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    require(p.running_var[ch] >= T{0}, "batchnorm running variance is negative");
    scale[ch] = p.gamma[ch] / std::sqrt(p.running_var[ch] + p.epsilon);
    shift[ch] = p.beta[ch] - p.running_mean[ch] * scale[ch];
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t ch = 0; ch < c; ++ch) y[i * c + ch] = x[i * c + ch] * scale[ch] + shift[ch];
  return out;
}

namespace detail {
/// Per-channel sums of f(row, ch) over m rows of c channels. Rows are
/// summed in T within short chunks so the channel loop vectorizes; chunk
/// totals are folded into doubles.
template <class T, class F>
void channel_sums(std::size_t m, std::size_t c, std::vector<double>& out, F f) {
  constexpr std::size_t kChunk = 64;
  out.assign(c, 0.0);
  std::vector<T> acc(c);
  for (std::size_t r0 = 0; r0 < m; r0 += kChunk) {
    std::fill(acc.begin(), acc.end(), T{0});
    const std::size_t r1 = std::min(m, r0 + kChunk);
    for (std::size_t i = r0; i < r1; ++i)
      for (std::size_t ch = 0; ch < c; ++ch) acc[ch] += f(i * c + ch, ch);
    for (std::size_t ch = 0; ch < c; ++ch) out[ch] += static_cast<double>(acc[ch]);
  }
}
}  // namespace detail

/// Train mode normalizes with batch statistics and updates the running
/// averages in `p`; Infer mode reads the running statistics only.
template <class T>
Tensor<T> batchnorm_forward(const Tensor<T>& input, BatchNorm<T>& p, BnMode mode, BatchNormCache<T>* cache = nullptr) {
  if (mode == BnMode::kInfer) return batchnorm_infer(input, p);
  detail::check_bn(input, p);
  const std::size_t c = input.shape().back();
  const std::size_t m = input.size() / c;
  require(m >= 2, "batchnorm Train mode needs at least 2 samples per channel");
  const T* x = input.raw();

  std::vector<double> mean, var;
  detail::channel_sums<T>(m, c, mean, [x](std::size_t k, std::size_t) { return x[k]; });
  for (auto& v : mean) v /= static_cast<double>(m);
  std::vector<T> mean_t(c);
  for (std::size_t ch = 0; ch < c; ++ch) mean_t[ch] = static_cast<T>(mean[ch]);
  const T* mt = mean_t.data();
  detail::channel_sums<T>(m, c, var, [x, mt](std::size_t k, std::size_t ch) {
    const T d = x[k] - mt[ch];
    return d * d;
  });
  for (auto& v : var) v /= static_cast<double>(m);

  std::vector<T> inv_std(c), scale(c), shift(c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    inv_std[ch] = static_cast<T>(1.0 / std::sqrt(var[ch] + static_cast<double>(p.epsilon)));
    scale[ch] = p.gamma[ch];
    shift[ch] = p.beta[ch];
  }

  Tensor<T> out(input.shape());
  Tensor<T> normalized(input.shape());
  T* y = out.raw();
  T* xh = normalized.raw();
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t base = i * c;
    for (std::size_t ch = 0; ch < c; ++ch) {
      const T v = (x[base + ch] - mean_t[ch]) * inv_std[ch];
      xh[base + ch] = v;
      y[base + ch] = scale[ch] * v + shift[ch];
    }
  }

  const double unbias = static_cast<double>(m) / static_cast<double>(m - 1);
  for (std::size_t ch = 0; ch < c; ++ch) {
    p.running_mean[ch] = p.momentum * p.running_mean[ch] + (T{1} - p.momentum) * mean_t[ch];
    p.running_var[ch] = p.momentum * p.running_var[ch] + (T{1} - p.momentum) * static_cast<T>(var[ch] * unbias);
  }

  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return out;
}

/// Backward pass for Train mode.
template <class T>
BatchNormGrads<T> batchnorm_backward(const BatchNormCache<T>& cache, const BatchNorm<T>& p, const Tensor<T>& grad_out) {
  const Tensor<T>& xhat = cache.normalized;
  require(grad_out.shape() == xhat.shape(), "batchnorm output gradient shape mismatch");
  const std::size_t c = xhat.shape().back();
  const std::size_t m = xhat.size() / c;

  BatchNormGrads<T> g{Tensor<T>(xhat.shape()), Tensor<T>({c}), Tensor<T>({c})};
  const T* dy = grad_out.raw();
  const T* xh = xhat.raw();
  std::vector<double> sum_dy, sum_dy_xh;
  detail::channel_sums<T>(m, c, sum_dy, [dy](std::size_t k, std::size_t) { return dy[k]; });
  detail::channel_sums<T>(m, c, sum_dy_xh, [dy, xh](std::size_t k, std::size_t) { return dy[k] * xh[k]; });
  for (std::size_t ch = 0; ch < c; ++ch) {
    g.beta[ch] = static_cast<T>(sum_dy[ch]);
    g.gamma[ch] = static_cast<T>(sum_dy_xh[ch]);
  }

  // dx = gamma * inv_std / m * (m*dy - sum(dy) - x_hat*sum(dy*x_hat))
  const T inv_m = T{1} / static_cast<T>(m);
  std::vector<T> k1(c), k2(c), k3(c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    k1[ch] = p.gamma[ch] * cache.inv_std[ch];
    k2[ch] = static_cast<T>(sum_dy[ch]) * inv_m;
    k3[ch] = static_cast<T>(sum_dy_xh[ch]) * inv_m;
  }
  T* dx = g.input.raw();
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t base = i * c;
    for (std::size_t ch = 0; ch < c; ++ch) dx[base + ch] = k1[ch] * (dy[base + ch] - k2[ch] - xh[base + ch] * k3[ch]);
  }
  return g;
}

}  // namespace gaze9::nn
