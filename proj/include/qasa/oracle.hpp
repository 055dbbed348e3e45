#pragma once

// Slow reference implementations for cross-checking: explicit gate matrices
// chained with Kronecker products, triple-loop attention, central finite
// differences. None of this is on a production path.

#include "qasa/qsim.hpp"

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <algorithm>
#include <functional>
#include <vector>

namespace qasa::oracle {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CMatrix ry_matrix(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  CMatrix m(2, 2);
  m << c, -s, s, c;
  return m;
}

inline CMatrix rz_matrix(double theta) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = std::polar(1.0, -theta / 2);
  m(1, 1) = std::polar(1.0, theta / 2);
  return m;
}

/// I (x) ... (x) U (x) ... (x) I with U on `target`; qubit 0 is the leftmost factor.
inline CMatrix embed(const CMatrix& u, int target, int n) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (int q = 0; q < n; ++q) out = kron(out, q == target ? u : CMatrix(CMatrix::Identity(2, 2)));
  return out;
}

/// |0><0|_c (x) I + |1><1|_c (x) X_t
inline CMatrix cnot_matrix(int control, int target, int n) {
  CMatrix p0 = CMatrix::Zero(2, 2), p1 = CMatrix::Zero(2, 2), x = CMatrix::Zero(2, 2);
  p0(0, 0) = 1;
  p1(1, 1) = 1;
  x(0, 1) = x(1, 0) = 1;
  CMatrix a = CMatrix::Identity(1, 1), b = CMatrix::Identity(1, 1);
  for (int q = 0; q < n; ++q) {
    const CMatrix id = CMatrix::Identity(2, 2);
    a = kron(a, q == control ? p0 : id);
    b = kron(b, q == control ? p1 : (q == target ? x : id));
  }
  return a + b;
}

inline CMatrix gate_matrix(const qsim::GateOp<double>& op, int n) {
  switch (op.kind) {
    case qsim::GateKind::RY: return embed(ry_matrix(op.angle), op.target, n);
    case qsim::GateKind::RZ: return embed(rz_matrix(op.angle), op.target, n);
    case qsim::GateKind::CNOT: return cnot_matrix(op.control, op.target, n);
  }
  return CMatrix::Identity(1 << n, 1 << n);
}

/// U_k ... U_1 |psi0>
inline CVector run_circuit(const CVector& psi0, const std::vector<qsim::GateOp<double>>& ops, int n) {
  CMatrix u = CMatrix::Identity(1 << n, 1 << n);
  for (const auto& op : ops) u = gate_matrix(op, n) * u;
  return u * psi0;
}

/// <psi| Z_q |psi> through the diagonal of the embedded Pauli-Z.
inline double expectation_z(const CVector& psi, int q, int n) {
  CMatrix z = CMatrix::Zero(2, 2);
  z(0, 0) = 1;
  z(1, 1) = -1;
  return (psi.adjoint() * embed(z, q, n) * psi)(0, 0).real();
}

inline Eigen::MatrixXd naive_attention_weights(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k) {
  const Eigen::Index T = q.rows(), d = q.cols();
  Eigen::MatrixXd w(T, T);
  for (Eigen::Index i = 0; i < T; ++i) {
    std::vector<double> s(static_cast<std::size_t>(T));
    double mx = -INFINITY;
    for (Eigen::Index j = 0; j < T; ++j) {
      double dot = 0;
      for (Eigen::Index c = 0; c < d; ++c) dot += q(i, c) * k(j, c);
      s[std::size_t(j)] = dot / std::sqrt(double(d));
      mx = std::max(mx, s[std::size_t(j)]);
    }
    double z = 0;
    for (auto& v : s) z += (v = std::exp(v - mx));
    for (Eigen::Index j = 0; j < T; ++j) w(i, j) = s[std::size_t(j)] / z;
  }
  return w;
}

inline Eigen::MatrixXd naive_attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k, const Eigen::MatrixXd& v) {
  const Eigen::MatrixXd w = naive_attention_weights(q, k);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(q.rows(), v.cols());
  for (Eigen::Index i = 0; i < q.rows(); ++i)
    for (Eigen::Index j = 0; j < k.rows(); ++j)
      for (Eigen::Index c = 0; c < v.cols(); ++c) out(i, c) += w(i, j) * v(j, c);
  return out;
}

/// Central difference of every entry of `x`.
inline Eigen::MatrixXd finite_difference(const std::function<double(const Eigen::MatrixXd&)>& f, const Eigen::MatrixXd& x,
                                         double h = 1e-5) {
  Eigen::MatrixXd g(x.rows(), x.cols());
  Eigen::MatrixXd y = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      y(i, j) = x(i, j) + h;
      const double up = f(y);
      y(i, j) = x(i, j) - h;
      const double down = f(y);
      y(i, j) = x(i, j);
      g(i, j) = (up - down) / (2 * h);
    }
  }
  return g;
}

}  // namespace qasa::oracle
