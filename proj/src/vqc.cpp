#include "qasa/vqc.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace qasa::vqc {

std::string to_string(Encoding e) { return e == Encoding::Amplitude ? "amplitude" : "angle"; }

Encoding encoding_from_string(const std::string& s) {
  if (s == "amplitude") return Encoding::Amplitude;
  if (s == "angle") return Encoding::Angle;
  throw std::invalid_argument("unknown encoding '" + s + "'");
}

void VqcParams::validate() const {
  if (thetas.rows() < 1 || thetas.cols() < 1) throw std::invalid_argument("VQC needs at least one layer and one qubit");
  if (thetas.cols() > qsim::kMaxQubits) throw std::invalid_argument("VQC register too wide");
  if (!thetas.allFinite()) throw std::invalid_argument("VQC angles must be finite");
}

VqcParams init_params(int n_qubits, int n_layers, std::uint64_t seed, Encoding encoding) {
  if (n_qubits < 1 || n_layers < 1) throw std::invalid_argument("VQC needs at least one layer and one qubit");
  if (n_qubits > qsim::kMaxQubits) throw std::invalid_argument("VQC register too wide");
  constexpr double pi = std::numbers::pi;
  std::mt19937_64 rng(seed);
  VqcParams p;
  p.thetas.resize(n_layers, n_qubits);
  p.encoding = encoding;
  p.seed = seed;
  for (Eigen::Index l = 0; l < n_layers; ++l) {
    for (Eigen::Index i = 0; i < n_qubits; ++i) {
      // 53-bit uniform in [0, 1); rounding can land on pi, which we fold back.
      const double u = double(rng() >> 11) * 0x1.0p-53;
      double theta = -pi + 2 * pi * u;
      if (theta >= pi) theta = -pi;
      p.thetas(l, i) = theta;
    }
  }
  return p;
}

std::vector<qsim::GateOp<double>> ansatz_ops(const Eigen::MatrixXd& thetas) {
  std::vector<qsim::GateOp<double>> ops;
  const int n = static_cast<int>(thetas.cols());
  for (Eigen::Index l = 0; l < thetas.rows(); ++l) {
    for (int i = 0; i < n; ++i) ops.push_back(qsim::GateOp<double>::ry(i, thetas(l, i)));
    for (int i = 0; i + 1 < n; ++i) ops.push_back(qsim::GateOp<double>::cnot(i, i + 1));
  }
  return ops;
}

namespace {

void apply_ansatz(State& s, const Eigen::MatrixXd& thetas) {
  const int n = static_cast<int>(thetas.cols());
  for (Eigen::Index l = 0; l < thetas.rows(); ++l) {
    for (int i = 0; i < n; ++i) s.ry(i, thetas(l, i));
    for (int i = 0; i + 1 < n; ++i) s.cnot(i, i + 1);
  }
}

}  // namespace

State angle_state(const AngleInput& input) {
  const auto n = input.ry.size();
  if (n < 1 || input.rz.size() != n) throw std::invalid_argument("angle input needs matching RY/RZ vectors");
  State s(static_cast<int>(n));
  for (Eigen::Index q = 0; q < n; ++q) {
    s.ry(int(q), input.ry(q));
    if (input.rz(q) != 0.0) s.rz(int(q), input.rz(q));
  }
  return s;
}

State encode(const Eigen::VectorXd& x, const VqcParams& params) {
  if (params.encoding != Encoding::Amplitude) throw std::invalid_argument("circuit expects angle-encoded input");
  if (x.size() > (Eigen::Index{1} << params.n_qubits())) {
    throw std::invalid_argument("input dimension " + std::to_string(x.size()) + " exceeds 2^" +
                                std::to_string(params.n_qubits()));
  }
  return qsim::amplitude_encode(x, params.n_qubits());
}

State encode(const AngleInput& input, const VqcParams& params) {
  if (params.encoding != Encoding::Angle) throw std::invalid_argument("circuit expects amplitude-encoded input");
  if (input.ry.size() != params.n_qubits()) throw std::invalid_argument("angle input width differs from register");
  return angle_state(input);
}

State evolve(const State& encoded, const Eigen::MatrixXd& thetas) {
  if (encoded.n_qubits() != thetas.cols()) throw std::invalid_argument("state width differs from circuit width");
  State s = encoded;
  apply_ansatz(s, thetas);
  return s;
}

Eigen::VectorXd forward_state(const State& encoded, const Eigen::MatrixXd& thetas) {
  return qsim::expectations_z(evolve(encoded, thetas));
}

Eigen::VectorXd vqc_forward(const Eigen::VectorXd& x, const VqcParams& params) {
  params.validate();
  return forward_state(encode(x, params), params.thetas);
}

Eigen::VectorXd vqc_forward(const AngleInput& input, const VqcParams& params) {
  params.validate();
  return forward_state(encode(input, params), params.thetas);
}

Eigen::MatrixXd parameter_shift_jacobian(const State& encoded, const Eigen::MatrixXd& thetas) {
  constexpr double shift = std::numbers::pi / 2;
  const Eigen::Index n = thetas.cols();
  Eigen::MatrixXd jac(n, thetas.size());
  Eigen::MatrixXd shifted = thetas;
  for (Eigen::Index l = 0; l < thetas.rows(); ++l) {
    for (Eigen::Index i = 0; i < n; ++i) {
      shifted(l, i) = thetas(l, i) + shift;
      const Eigen::VectorXd plus = forward_state(encoded, shifted);
      shifted(l, i) = thetas(l, i) - shift;
      const Eigen::VectorXd minus = forward_state(encoded, shifted);
      shifted(l, i) = thetas(l, i);
      jac.col(l * n + i) = (plus - minus) / 2;
    }
  }
  return jac;
}

Eigen::MatrixXd parameter_shift_grad(const State& encoded, const Eigen::MatrixXd& thetas, const Eigen::VectorXd& adjoint) {
  if (adjoint.size() != thetas.cols()) throw std::invalid_argument("adjoint length differs from register width");
  const Eigen::VectorXd flat = parameter_shift_jacobian(encoded, thetas).transpose() * adjoint;
  // Column l*n + i maps back to (l, i): a row-major reshape.
  Eigen::MatrixXd grad(thetas.rows(), thetas.cols());
  for (Eigen::Index l = 0; l < thetas.rows(); ++l) grad.row(l) = flat.segment(l * thetas.cols(), thetas.cols()).transpose();
  return grad;
}

Eigen::MatrixXd parameter_shift_grad(const Eigen::VectorXd& x, const VqcParams& params, const Eigen::VectorXd& adjoint) {
  params.validate();
  return parameter_shift_grad(encode(x, params), params.thetas, adjoint);
}

Eigen::MatrixXd parameter_shift_grad(const AngleInput& x, const VqcParams& params, const Eigen::VectorXd& adjoint) {
  params.validate();
  return parameter_shift_grad(encode(x, params), params.thetas, adjoint);
}

}  // namespace qasa::vqc
