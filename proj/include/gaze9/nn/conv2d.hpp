#pragma once

#include <Eigen/Core>

#include "gaze9/core/tensor.hpp"

namespace gaze9::nn {

/// 3x3 same-padded convolution. Weights are stored K x K x Cin x Cout, which
/// read as a (9*Cin) x Cout matrix matches the im2col column order.
template <class T>
struct Conv2D {
  static constexpr std::size_t kKernel = 3;

  Tensor<T> weights;
  Tensor<T> bias;

  Conv2D() = default;
  Conv2D(std::size_t in_channels, std::size_t out_channels)
      : weights({kKernel, kKernel, in_channels, out_channels}), bias({out_channels}) {}

  std::size_t in_channels() const { return weights.dim(2); }
  std::size_t out_channels() const { return weights.dim(3); }
};

template <class T>
struct Conv2DGrads {
  Tensor<T> input;  // empty when not requested
  Tensor<T> weights;
  Tensor<T> bias;
};

namespace detail {

template <class T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MatMap = Eigen::Map<RowMatrix<T>>;
template <class T>
using ConstMatMap = Eigen::Map<const RowMatrix<T>>;

inline Shape as_batch(const Shape& s) {
  if (s.size() == 3) return {1, s[0], s[1], s[2]};
  require(s.size() == 4, "expected an H x W x C or N x H x W x C tensor, got " + shape_string(s));
  return s;
}

inline void check_conv(const Shape& in, const Shape& w) {
  require(w.size() == 4 && w[0] == 3 && w[1] == 3, "conv weights must be 3 x 3 x Cin x Cout, got " + shape_string(w));
  require(in[3] == w[2], "conv input has " + std::to_string(in[3]) + " channels but weights expect " +
                             std::to_string(w[2]));
}

// cols: (H*W) x (9*C) for one image; zero padding of one pixel on each border.
template <class T>
void im2col(const T* img, std::size_t h, std::size_t w, std::size_t c, T* cols) {
  const std::size_t row_len = 9 * c;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      T* row = cols + (y * w + x) * row_len;
      for (int ky = 0; ky < 3; ++ky) {
        const long sy = static_cast<long>(y) + ky - 1;
        for (int kx = 0; kx < 3; ++kx) {
          const long sx = static_cast<long>(x) + kx - 1;
          T* dst = row + (ky * 3 + kx) * c;
          if (sy < 0 || sx < 0 || sy >= static_cast<long>(h) || sx >= static_cast<long>(w)) {
            std::fill(dst, dst + c, T{0});
          } else {
            const T* src = img + (static_cast<std::size_t>(sy) * w + static_cast<std::size_t>(sx)) * c;
            std::copy(src, src + c, dst);
          }
        }
      }
    }
  }
}

template <class T>
void col2im_add(const T* cols, std::size_t h, std::size_t w, std::size_t c, T* img) {
  const std::size_t row_len = 9 * c;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const T* row = cols + (y * w + x) * row_len;
      for (int ky = 0; ky < 3; ++ky) {
        const long sy = static_cast<long>(y) + ky - 1;
        if (sy < 0 || sy >= static_cast<long>(h)) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const long sx = static_cast<long>(x) + kx - 1;
          if (sx < 0 || sx >= static_cast<long>(w)) continue;
          const T* src = row + (ky * 3 + kx) * c;
          T* dst = img + (static_cast<std::size_t>(sy) * w + static_cast<std::size_t>(sx)) * c;
          for (std::size_t i = 0; i < c; ++i) dst[i] += src[i];
        }
      }
    }
  }
}

}  // namespace detail

/// Forward pass. Accepts H x W x Cin or N x H x W x Cin; output keeps the
/// input's rank with Cout channels.
template <class T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Conv2D<T>& p) {
  const Shape in = detail::as_batch(input.shape());
  detail::check_conv(in, p.weights.shape());
  const std::size_t n = in[0], h = in[1], w = in[2], cin = in[3], cout = p.out_channels();
  require(p.bias.size() == cout, "conv bias length does not match Cout");

  Shape out_shape = input.shape();
  out_shape.back() = cout;
  Tensor<T> out(out_shape);

  AlignedVector<T> cols(h * w * 9 * cin);
  detail::ConstMatMap<T> wmat(p.weights.raw(), 9 * cin, cout);
  Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> bias(p.bias.raw(), cout);
  for (std::size_t b = 0; b < n; ++b) {
    detail::im2col(input.raw() + b * h * w * cin, h, w, cin, cols.data());
    detail::ConstMatMap<T> cmat(cols.data(), h * w, 9 * cin);
    detail::MatMap<T> omat(out.raw() + b * h * w * cout, h * w, cout);
    omat.noalias() = cmat * wmat;
    omat.rowwise() += bias;
  }
  return out;
}

/// Backward pass given the gradient of the loss w.r.t. the output.
template <class T>
Conv2DGrads<T> conv2d_backward(const Tensor<T>& input, const Conv2D<T>& p, const Tensor<T>& grad_out,
                               bool want_input_grad = true) {
  const Shape in = detail::as_batch(input.shape());
  detail::check_conv(in, p.weights.shape());
  const std::size_t n = in[0], h = in[1], w = in[2], cin = in[3], cout = p.out_channels();
  require(grad_out.size() == n * h * w * cout, "conv output gradient has the wrong size");

  Conv2DGrads<T> g{want_input_grad ? Tensor<T>(input.shape()) : Tensor<T>{}, Tensor<T>(p.weights.shape()),
                   Tensor<T>(p.bias.shape())};
  AlignedVector<T> cols(h * w * 9 * cin);
  AlignedVector<T> dcols(want_input_grad ? h * w * 9 * cin : 0);
  detail::ConstMatMap<T> wmat(p.weights.raw(), 9 * cin, cout);
  detail::MatMap<T> dw(g.weights.raw(), 9 * cin, cout);
  Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> db(g.bias.raw(), cout);

  for (std::size_t b = 0; b < n; ++b) {
    detail::ConstMatMap<T> gmat(grad_out.raw() + b * h * w * cout, h * w, cout);
    detail::im2col(input.raw() + b * h * w * cin, h, w, cin, cols.data());
    detail::ConstMatMap<T> cmat(cols.data(), h * w, 9 * cin);
    dw.noalias() += cmat.transpose() * gmat;
    db += gmat.colwise().sum();
    if (want_input_grad) {
      detail::MatMap<T> dc(dcols.data(), h * w, 9 * cin);
      dc.noalias() = gmat * wmat.transpose();
      detail::col2im_add(dcols.data(), h, w, cin, g.input.raw() + b * h * w * cin);
    }
  }
  return g;
}

}  // namespace gaze9::nn
