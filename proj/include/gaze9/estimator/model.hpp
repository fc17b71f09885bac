#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaze9/core/eye_state.hpp"
#include "gaze9/core/random.hpp"
#include "gaze9/core/tensor.hpp"
#include "gaze9/image/eye_strip.hpp"
#include "gaze9/nn/activations.hpp"
#include "gaze9/nn/batchnorm.hpp"
#include "gaze9/nn/conv2d.hpp"
#include "gaze9/nn/dense.hpp"
#include "gaze9/nn/softmax.hpp"

namespace gaze9::estimator {

/// Topology: (conv3x3 -> batchnorm -> relu -> maxpool2x2) x 3 -> dense +
/// relu -> dense. Only the sizes are configurable. Internally each block
/// pools before the relu; max and relu commute, so outputs and gradients
/// are the same and the relu runs on a quarter of the values.
struct ModelConfig {
  static constexpr int kBlocks = 3;

  int height = EyeStrip::kHeight;
  int width = EyeStrip::kDoubleEyeWidth;
  int filters = 64;
  int hidden = 300;
  int classes = EyeState::kCount;

  static ModelConfig double_eye() { return {}; }
  static ModelConfig single_eye() {
    ModelConfig c;
    c.width = EyeStrip::kSingleEyeWidth;
    return c;
  }

  void validate() const {
    if (height <= 0 || width <= 0 || filters <= 0 || hidden <= 0 || classes <= 1) {
      throw std::invalid_argument("model sizes must be positive");
    }
    if (width % 8 != 0 || height % 8 != 0) {
      throw std::invalid_argument("input " + std::to_string(height) + "x" + std::to_string(width) +
                                  " is not divisible by 8 (three 2x2 pools)");
    }
  }

  std::size_t flat_features() const {
    return static_cast<std::size_t>(height / 8) * static_cast<std::size_t>(width / 8) * static_cast<std::size_t>(filters);
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

template <class T>
struct ConvBlock {
  nn::Conv2D<T> conv;
  nn::BatchNorm<T> bn;
};

template <class T>
struct ModelParams {
  ModelConfig config;
  std::array<ConvBlock<T>, ModelConfig::kBlocks> blocks;
  nn::Dense<T> hidden;
  nn::Dense<T> output;

  /// Learnable tensors in a fixed order: per block conv W, conv b, gamma,
  /// beta; then hidden W, b, output W, b.
  std::vector<Tensor<T>*> learnable() {
    std::vector<Tensor<T>*> out;
    for (auto& b : blocks) {
      out.insert(out.end(), {&b.conv.weights, &b.conv.bias, &b.bn.gamma, &b.bn.beta});
    }
    out.insert(out.end(), {&hidden.weights, &hidden.bias, &output.weights, &output.bias});
    return out;
  }
  std::vector<const Tensor<T>*> learnable() const {
    auto v = const_cast<ModelParams*>(this)->learnable();
    return {v.begin(), v.end()};
  }

  std::size_t learnable_count() const {
    std::size_t n = 0;
    for (const auto* t : learnable()) n += t->size();
    return n;
  }

  template <class U>
  ModelParams<U> cast() const {
    ModelParams<U> out;
    out.config = config;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const auto& s = blocks[i];
      auto& d = out.blocks[i];
      d.conv.weights = s.conv.weights.template cast<U>();
      d.conv.bias = s.conv.bias.template cast<U>();
      d.bn.gamma = s.bn.gamma.template cast<U>();
      d.bn.beta = s.bn.beta.template cast<U>();
      d.bn.running_mean = s.bn.running_mean.template cast<U>();
      d.bn.running_var = s.bn.running_var.template cast<U>();
      d.bn.epsilon = static_cast<U>(s.bn.epsilon);
      d.bn.momentum = static_cast<U>(s.bn.momentum);
    }
    out.hidden.weights = hidden.weights.template cast<U>();
    out.hidden.bias = hidden.bias.template cast<U>();
    out.output.weights = output.weights.template cast<U>();
    out.output.bias = output.bias.template cast<U>();
    return out;
  }
};

/// Fresh parameters: weights ~ U(-sqrt(6/fan_in), +sqrt(6/fan_in)), zero
/// biases, gamma 1, beta 0, running statistics (0, 1).
template <class T>
ModelParams<T> build_model(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ModelParams<T> p;
  p.config = config;
  Rng rng(derive_seed(seed, {0x1A17}));
  auto init = [&](Tensor<T>& w, std::size_t fan_in) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (auto& v : w.data()) v = static_cast<T>(rng.uniform(-limit, limit));
  };
  std::size_t channels = EyeStrip::kChannels;
  for (auto& b : p.blocks) {
    b.conv = nn::Conv2D<T>(channels, static_cast<std::size_t>(config.filters));
    init(b.conv.weights, 9 * channels);
    b.bn = nn::BatchNorm<T>(static_cast<std::size_t>(config.filters));
    channels = static_cast<std::size_t>(config.filters);
  }
  p.hidden = nn::Dense<T>(config.flat_features(), static_cast<std::size_t>(config.hidden));
  init(p.hidden.weights, config.flat_features());
  p.output = nn::Dense<T>(static_cast<std::size_t>(config.hidden), static_cast<std::size_t>(config.classes));
  init(p.output.weights, static_cast<std::size_t>(config.hidden));
  return p;
}

/// Intermediate activations kept by a Train-mode forward pass.
template <class T>
struct ForwardCache {
  struct Block {
    Tensor<T> input;
    nn::BatchNormCache<T> bn;
    std::vector<std::size_t> argmax;
    Shape pool_in_shape;
    Tensor<T> pooled;  // relu input
  };
  std::array<Block, ModelConfig::kBlocks> blocks;
  Tensor<T> flat;
  Tensor<T> hidden_pre;
  Tensor<T> hidden_act;
};

/// Layer output shapes for a batch of one, in forward order.
inline std::vector<Shape> layer_shapes(const ModelConfig& c) {
  std::vector<Shape> out;
  std::size_t h = static_cast<std::size_t>(c.height), w = static_cast<std::size_t>(c.width);
  const auto f = static_cast<std::size_t>(c.filters);
  for (int b = 0; b < ModelConfig::kBlocks; ++b) {
    out.push_back({h, w, f});  // conv, bn, relu
    h /= 2;
    w /= 2;
    out.push_back({h, w, f});  // pool
  }
  out.push_back({c.flat_features()});
  out.push_back({static_cast<std::size_t>(c.hidden)});
  out.push_back({static_cast<std::size_t>(c.classes)});
  return out;
}

/// Stacks strips into an N x H x W x 3 tensor.
template <class T>
Tensor<T> make_batch(std::span<const EyeStrip* const> strips, const ModelConfig& config) {
  Tensor<T> batch({strips.size(), static_cast<std::size_t>(config.height), static_cast<std::size_t>(config.width),
                   static_cast<std::size_t>(EyeStrip::kChannels)});
  const std::size_t per = batch.size() / std::max<std::size_t>(strips.size(), 1);
  for (std::size_t i = 0; i < strips.size(); ++i) {
    const EyeStrip& s = *strips[i];
    if (s.height() != config.height || s.width() != config.width) {
      throw ShapeError("eye strip is " + std::to_string(s.height()) + "x" + std::to_string(s.width()) +
                       " but the model expects " + std::to_string(config.height) + "x" + std::to_string(config.width));
    }
    std::copy(s.pixels().begin(), s.pixels().end(), batch.raw() + i * per);
  }
  return batch;
}

namespace detail {
template <class T>
Tensor<T> flatten(Tensor<T> t) {
  const std::size_t n = t.dim(0);
  const std::size_t rest = t.size() / n;
  return std::move(t).reshaped({n, rest});
}
}  // namespace detail

/// Train-mode forward; updates batchnorm running statistics and fills the
/// cache. Returns N x classes logits.
template <class T>
Tensor<T> train_forward(ModelParams<T>& p, const Tensor<T>& batch, ForwardCache<T>& cache) {
  Tensor<T> x = batch;
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    auto& blk = p.blocks[b];
    auto& c = cache.blocks[b];
    c.input = std::move(x);
    Tensor<T> conv = nn::conv2d_forward(c.input, blk.conv);
    Tensor<T> normed = nn::batchnorm_forward(conv, blk.bn, nn::BnMode::kTrain, &c.bn);
    c.pool_in_shape = normed.shape();
    auto pooled = nn::maxpool2x2_forward(normed);
    c.argmax = std::move(pooled.argmax);
    c.pooled = std::move(pooled.output);
    x = nn::relu_forward(c.pooled);
  }
  cache.flat = detail::flatten(std::move(x));
  cache.hidden_pre = nn::dense_forward(cache.flat, p.hidden);
  cache.hidden_act = nn::relu_forward(cache.hidden_pre);
  return nn::dense_forward(cache.hidden_act, p.output);
}

/// Infer-mode forward; pure. Returns N x classes logits.
template <class T>
Tensor<T> infer_logits(const ModelParams<T>& p, const Tensor<T>& batch) {
  require(batch.rank() == 4 && batch.dim(1) == static_cast<std::size_t>(p.config.height) &&
              batch.dim(2) == static_cast<std::size_t>(p.config.width) && batch.dim(3) == EyeStrip::kChannels,
          "input batch " + shape_string(batch.shape()) + " does not match the model input size");
  Tensor<T> x = batch;
  for (const auto& blk : p.blocks) {
    x = nn::relu_forward(nn::maxpool2x2_forward(nn::batchnorm_infer(nn::conv2d_forward(x, blk.conv), blk.bn)).output);
  }
  Tensor<T> h = nn::relu_forward(nn::dense_forward(detail::flatten(std::move(x)), p.hidden));
  return nn::dense_forward(h, p.output);
}

/// Gradients of the loss for every learnable tensor, in learnable() order.
template <class T>
std::vector<Tensor<T>> backward(const ModelParams<T>& p, const ForwardCache<T>& cache, const Tensor<T>& grad_logits) {
  std::vector<Tensor<T>> grads(4 * ModelConfig::kBlocks + 4);
  auto out_g = nn::dense_backward(cache.hidden_act, p.output, grad_logits);
  grads[4 * ModelConfig::kBlocks + 2] = std::move(out_g.weights);
  grads[4 * ModelConfig::kBlocks + 3] = std::move(out_g.bias);
  auto hid_g = nn::dense_backward(cache.flat, p.hidden, nn::relu_backward(cache.hidden_pre, out_g.input));
  grads[4 * ModelConfig::kBlocks] = std::move(hid_g.weights);
  grads[4 * ModelConfig::kBlocks + 1] = std::move(hid_g.bias);

  Tensor<T> g = std::move(hid_g.input);
  for (std::size_t bi = p.blocks.size(); bi-- > 0;) {
    const auto& blk = p.blocks[bi];
    const auto& c = cache.blocks[bi];
    Tensor<T> act_grad = nn::relu_backward(c.pooled, g);
    auto bn_g = nn::batchnorm_backward(c.bn, blk.bn, nn::maxpool2x2_backward(act_grad, c.argmax, c.pool_in_shape));
    auto conv_g = nn::conv2d_backward(c.input, blk.conv, bn_g.input, bi > 0);
    grads[4 * bi] = std::move(conv_g.weights);
    grads[4 * bi + 1] = std::move(conv_g.bias);
    grads[4 * bi + 2] = std::move(bn_g.gamma);
    grads[4 * bi + 3] = std::move(bn_g.beta);
    g = std::move(conv_g.input);
  }
  return grads;
}

using Scores = std::array<float, EyeState::kCount>;

inline EyeState argmax_state(const Scores& s) {
  return EyeState(static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin()));
}

/// Softmax scores for each strip, evaluated in chunks.
inline std::vector<Scores> predict_batch(const ModelParams<float>& p, std::span<const EyeStrip* const> strips,
                                         std::size_t chunk = 32) {
  if (p.config.classes != EyeState::kCount) throw std::invalid_argument("prediction needs a 10-class model");
  std::vector<Scores> out;
  out.reserve(strips.size());
  for (std::size_t start = 0; start < strips.size(); start += chunk) {
    const auto part = strips.subspan(start, std::min(chunk, strips.size() - start));
    const Tensor<float> logits = infer_logits(p, make_batch<float>(part, p.config));
    for (std::size_t i = 0; i < part.size(); ++i) {
      const auto probs = nn::softmax<float>(logits.data().subspan(i * EyeState::kCount, EyeState::kCount));
      Scores s{};
      std::copy(probs.begin(), probs.end(), s.begin());
      out.push_back(s);
    }
  }
  return out;
}

/// Softmax probabilities of the ten eye states for one strip.
inline Scores predict(const ModelParams<float>& p, const EyeStrip& strip) {
  const EyeStrip* one[] = {&strip};
  return predict_batch(p, one).front();
}

}  // namespace gaze9::estimator
