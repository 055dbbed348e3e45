#pragma once

// Single-head scaled dot-product attention over small dense matrices.

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>

namespace qasa {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Row-wise softmax; each row is shifted by its max before exponentiation.
template <typename Derived>
MatrixX<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> w = (logits.colwise() - logits.rowwise().maxCoeff()).array().exp().matrix();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sums = w.rowwise().sum();
  return sums.cwiseInverse().asDiagonal() * w;
}

/// softmax(Q K^T / sqrt(d_v)) with d_v = scale_dim.
template <typename DQ, typename DK>
MatrixX<typename DQ::Scalar> attention_weights(const Eigen::MatrixBase<DQ>& q, const Eigen::MatrixBase<DK>& k,
                                               Eigen::Index scale_dim) {
  using Scalar = typename DQ::Scalar;
  if (q.cols() != k.cols()) throw std::invalid_argument("attention: query and key widths differ");
  if (scale_dim < 1) throw std::invalid_argument("attention: value dimension must be positive");
  return softmax_rows((q * k.transpose()) / std::sqrt(Scalar(scale_dim)));
}

/// softmax(Q K^T / sqrt(d_v)) V.
template <typename DQ, typename DK, typename DV>
MatrixX<typename DQ::Scalar> attention(const Eigen::MatrixBase<DQ>& q, const Eigen::MatrixBase<DK>& k,
                                       const Eigen::MatrixBase<DV>& v) {
  if (k.rows() != v.rows()) throw std::invalid_argument("attention: key and value counts differ");
  if (q.rows() < 1) throw std::invalid_argument("attention: no tokens");
  return attention_weights(q, k, v.cols()) * v;
}

template <typename Scalar>
struct AttentionGrad {
  MatrixX<Scalar> dq, dk, dv;
};

/// Reverse pass of attention given the forward weights and dL/d(output).
template <typename DQ, typename DK, typename DV, typename DW, typename DO>
AttentionGrad<typename DQ::Scalar> attention_backward(const Eigen::MatrixBase<DQ>& q, const Eigen::MatrixBase<DK>& k,
                                                      const Eigen::MatrixBase<DV>& v, const Eigen::MatrixBase<DW>& weights,
                                                      const Eigen::MatrixBase<DO>& d_out) {
  using Scalar = typename DQ::Scalar;
  const Scalar inv_scale = Scalar(1) / std::sqrt(Scalar(v.cols()));
  AttentionGrad<Scalar> g;
  g.dv = weights.transpose() * d_out;
  const MatrixX<Scalar> d_w = d_out * v.transpose();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> row_dot = weights.cwiseProduct(d_w).rowwise().sum();
  const MatrixX<Scalar> d_logits = weights.cwiseProduct(d_w.colwise() - row_dot) * inv_scale;
  g.dq = d_logits * k;
  g.dk = d_logits.transpose() * q;
  return g;
}

}  // namespace qasa
