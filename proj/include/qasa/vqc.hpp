#pragma once

// Layered variational circuit: per layer an RY on every qubit followed by an
// open CNOT chain (0,1), (1,2), ..., (n-2,n-1); read out as <Z_i> per qubit.

#include "qasa/qsim.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace qasa::vqc {

using State = qsim::Statevector<double>;

enum class Encoding { Amplitude, Angle };

std::string to_string(Encoding e);
Encoding encoding_from_string(const std::string& s);

struct VqcParams {
  Eigen::MatrixXd thetas;  // n_layers x n_qubits, radians
  Encoding encoding = Encoding::Amplitude;
  std::uint64_t seed = 0;

  int n_qubits() const { return static_cast<int>(thetas.cols()); }
  int n_layers() const { return static_cast<int>(thetas.rows()); }
  void validate() const;
};

/// Per-qubit RY then RZ rotations applied to |0...0>.
struct AngleInput {
  Eigen::VectorXd ry;
  Eigen::VectorXd rz;
};

/// Uniform on [-pi, pi), deterministic per seed.
VqcParams init_params(int n_qubits, int n_layers, std::uint64_t seed, Encoding encoding = Encoding::Amplitude);

std::vector<qsim::GateOp<double>> ansatz_ops(const Eigen::MatrixXd& thetas);

State encode(const Eigen::VectorXd& x, const VqcParams& params);
State encode(const AngleInput& input, const VqcParams& params);
State angle_state(const AngleInput& input);

/// Ansatz applied to an already-encoded state, then every <Z_i>.
Eigen::VectorXd forward_state(const State& encoded, const Eigen::MatrixXd& thetas);

/// Encoded state after the ansatz, before measurement.
State evolve(const State& encoded, const Eigen::MatrixXd& thetas);

Eigen::VectorXd vqc_forward(const Eigen::VectorXd& x, const VqcParams& params);
Eigen::VectorXd vqc_forward(const AngleInput& input, const VqcParams& params);

/// d<Z_k>/d theta_(l,i) by the two-term shift rule; rows k, columns l*n + i.
Eigen::MatrixXd parameter_shift_jacobian(const State& encoded, const Eigen::MatrixXd& thetas);

/// sum_k adjoint_k * d<Z_k>/d theta, shaped like `thetas`.
Eigen::MatrixXd parameter_shift_grad(const State& encoded, const Eigen::MatrixXd& thetas, const Eigen::VectorXd& adjoint);
Eigen::MatrixXd parameter_shift_grad(const Eigen::VectorXd& x, const VqcParams& params, const Eigen::VectorXd& adjoint);
Eigen::MatrixXd parameter_shift_grad(const AngleInput& x, const VqcParams& params, const Eigen::VectorXd& adjoint);

}  // namespace qasa::vqc
