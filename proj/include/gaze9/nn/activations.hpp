#pragma once

#include <vector>

#include "gaze9/core/tensor.hpp"

namespace gaze9::nn {

template <class T>
Tensor<T> relu_forward(const Tensor<T>& t) {
  Tensor<T> out(t.shape());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = t[i] > T{0} ? t[i] : T{0};
  return out;
}

/// Gradient passes only where the forward input was strictly positive.
template <class T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& grad_out) {
  require(input.size() == grad_out.size(), "relu gradient size mismatch");
  Tensor<T> g(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) g[i] = input[i] > T{0} ? grad_out[i] : T{0};
  return g;
}

template <class T>
struct MaxPoolResult {
  Tensor<T> output;
  std::vector<std::size_t> argmax;  // flat input index per output element
};

/// Disjoint 2x2 windows with stride 2 on H x W x C or N x H x W x C.
/// Ties go to the first position in row-major scan order.
template <class T>
MaxPoolResult<T> maxpool2x2_forward(const Tensor<T>& t) {
  require(t.rank() == 3 || t.rank() == 4, "maxpool expects H x W x C or N x H x W x C");
  const bool batched = t.rank() == 4;
  const std::size_t n = batched ? t.dim(0) : 1;
  const std::size_t h = t.dim(batched ? 1 : 0), w = t.dim(batched ? 2 : 1), c = t.shape().back();
  require(h % 2 == 0 && w % 2 == 0,
          "maxpool needs even spatial dimensions, got " + std::to_string(h) + "x" + std::to_string(w));
  const std::size_t oh = h / 2, ow = w / 2;
  Shape out_shape = batched ? Shape{n, oh, ow, c} : Shape{oh, ow, c};
  MaxPoolResult<T> r{Tensor<T>(out_shape), std::vector<std::size_t>(n * oh * ow * c)};

  const T* x = t.raw();
  T* y = r.output.raw();
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox)
        for (std::size_t ch = 0; ch < c; ++ch) {
          std::size_t best = ((b * h + 2 * oy) * w + 2 * ox) * c + ch;
          for (std::size_t dy = 0; dy < 2; ++dy)
            for (std::size_t dx = 0; dx < 2; ++dx) {
              const std::size_t k = ((b * h + 2 * oy + dy) * w + 2 * ox + dx) * c + ch;
              if (x[k] > x[best]) best = k;
            }
          const std::size_t o = ((b * oh + oy) * ow + ox) * c + ch;
          y[o] = x[best];
          r.argmax[o] = best;
        }
  return r;
}

template <class T>
Tensor<T> maxpool2x2_backward(const Tensor<T>& grad_out, const std::vector<std::size_t>& argmax,
                              const Shape& input_shape) {
  require(grad_out.size() == argmax.size(), "maxpool gradient does not match argmax table");
  Tensor<T> g(input_shape);
  for (std::size_t o = 0; o < argmax.size(); ++o) g[argmax[o]] += grad_out[o];
  return g;
}

}  // namespace gaze9::nn
