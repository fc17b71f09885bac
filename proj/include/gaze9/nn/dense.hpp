#pragma once

#include <Eigen/Core>

#include "gaze9/core/tensor.hpp"

namespace gaze9::nn {

/// Fully connected layer y = W^T x + b with W stored D x M.
template <class T>
struct Dense {
  Tensor<T> weights;
  Tensor<T> bias;

  Dense() = default;
  Dense(std::size_t in, std::size_t out) : weights({in, out}), bias({out}) {}

  std::size_t in_features() const { return weights.dim(0); }
  std::size_t out_features() const { return weights.dim(1); }
};

template <class T>
struct DenseGrads {
  Tensor<T> input;
  Tensor<T> weights;
  Tensor<T> bias;
};

namespace detail {
template <class T>
using DenseMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class T>
std::size_t dense_rows(const Tensor<T>& x, const Dense<T>& p) {
  require(p.weights.rank() == 2, "dense weights must be D x M");
  require(p.bias.size() == p.out_features(), "dense bias length does not match M");
  require(x.rank() == 1 || x.rank() == 2, "dense input must be D or N x D");
  const std::size_t d = x.shape().back();
  require(d == p.in_features(), "dense input dimension " + std::to_string(d) + " does not match weights " +
                                    shape_string(p.weights.shape()));
  return x.rank() == 1 ? 1 : x.dim(0);
}
}  // namespace detail

/// Accepts a D vector (returns M) or an N x D batch (returns N x M).
template <class T>
Tensor<T> dense_forward(const Tensor<T>& x, const Dense<T>& p) {
  const std::size_t n = detail::dense_rows(x, p);
  const std::size_t d = p.in_features(), m = p.out_features();
  Tensor<T> y(x.rank() == 1 ? Shape{m} : Shape{n, m});
  Eigen::Map<const detail::DenseMat<T>> xm(x.raw(), n, d);
  Eigen::Map<const detail::DenseMat<T>> wm(p.weights.raw(), d, m);
  Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> bm(p.bias.raw(), m);
  Eigen::Map<detail::DenseMat<T>> ym(y.raw(), n, m);
  ym.noalias() = xm * wm;
  ym.rowwise() += bm;
  return y;
}

template <class T>
DenseGrads<T> dense_backward(const Tensor<T>& x, const Dense<T>& p, const Tensor<T>& grad_out) {
  const std::size_t n = detail::dense_rows(x, p);
  const std::size_t d = p.in_features(), m = p.out_features();
  require(grad_out.size() == n * m, "dense output gradient has the wrong size");
  DenseGrads<T> g{Tensor<T>(x.shape()), Tensor<T>(p.weights.shape()), Tensor<T>(p.bias.shape())};
  Eigen::Map<const detail::DenseMat<T>> xm(x.raw(), n, d);
  Eigen::Map<const detail::DenseMat<T>> wm(p.weights.raw(), d, m);
  Eigen::Map<const detail::DenseMat<T>> gm(grad_out.raw(), n, m);
  Eigen::Map<detail::DenseMat<T>>(g.weights.raw(), d, m).noalias() = xm.transpose() * gm;
  Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(g.bias.raw(), m) = gm.colwise().sum();
  Eigen::Map<detail::DenseMat<T>>(g.input.raw(), n, d).noalias() = gm * wm.transpose();
  return g;
}

}  // namespace gaze9::nn
