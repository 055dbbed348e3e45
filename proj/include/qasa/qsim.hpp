#pragma once

// Dense statevector simulator for the small registers used by the attention
// circuits. Qubit 0 is the most significant bit of the basis index, so the
// basis state |q0 q1 ... q(n-1)> has index q0*2^(n-1) + ... + q(n-1).

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qasa::qsim {

inline constexpr int kMaxQubits = 12;

template <typename Scalar>
using Amplitudes = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

enum class GateKind { RY, RZ, CNOT };

template <typename Scalar = double>
struct GateOp {
  GateKind kind = GateKind::RY;
  int target = 0;
  int control = -1;  // CNOT only
  Scalar angle = 0;  // rotations only

  static GateOp ry(int target, Scalar theta) { return {GateKind::RY, target, -1, theta}; }
  static GateOp rz(int target, Scalar theta) { return {GateKind::RZ, target, -1, theta}; }
  static GateOp cnot(int control, int target) { return {GateKind::CNOT, target, control, 0}; }
};

template <typename Scalar = double>
class Statevector {
 public:
  using Complex = std::complex<Scalar>;
  using Vector = Amplitudes<Scalar>;

  /// |0...0> on n qubits.
  explicit Statevector(int n_qubits) : n_(checked_width(n_qubits)), amps_(Vector::Zero(Eigen::Index{1} << n_)) {
    amps_(0) = Complex(1, 0);
  }

  static Statevector basis(int n_qubits, Eigen::Index index) {
    Statevector s(n_qubits);
    if (index < 0 || index >= s.dim()) throw std::out_of_range("basis index outside register");
    s.amps_(0) = Complex(0, 0);
    s.amps_(index) = Complex(1, 0);
    return s;
  }

  /// Wraps an amplitude vector; length must be a power of two and the norm 1 within `tol`.
  static Statevector from_amplitudes(Vector amps, Scalar tol = Scalar(1e-10)) {
    const Eigen::Index d = amps.size();
    if (d < 2 || (d & (d - 1)) != 0) throw std::invalid_argument("amplitude vector length must be a power of two >= 2");
    int n = 0;
    while ((Eigen::Index{1} << n) < d) ++n;
    Statevector s(n);
    if (std::abs(amps.norm() - Scalar(1)) > tol) throw std::invalid_argument("amplitude vector is not normalized");
    s.amps_ = std::move(amps);
    return s;
  }

  int n_qubits() const { return n_; }
  Eigen::Index dim() const { return amps_.size(); }
  const Vector& amplitudes() const { return amps_; }
  Scalar norm() const { return amps_.norm(); }

  Statevector& ry(int qubit, Scalar theta) {
    const Eigen::Index mask = bit(qubit);
    const Scalar c = std::cos(theta / 2), s = std::sin(theta / 2);
    for (Eigen::Index i = 0; i < dim(); ++i) {
      if (i & mask) continue;
      const Complex a0 = amps_(i), a1 = amps_(i | mask);
      amps_(i) = c * a0 - s * a1;
      amps_(i | mask) = s * a0 + c * a1;
    }
    return *this;
  }

  Statevector& rz(int qubit, Scalar theta) {
    const Eigen::Index mask = bit(qubit);
    const Complex lo = std::polar(Scalar(1), -theta / 2), hi = std::polar(Scalar(1), theta / 2);
    for (Eigen::Index i = 0; i < dim(); ++i) amps_(i) *= (i & mask) ? hi : lo;
    return *this;
  }

  Statevector& cnot(int control, int target) {
    if (control == target) throw std::invalid_argument("CNOT control and target must differ");
    const Eigen::Index cm = bit(control), tm = bit(target);
    for (Eigen::Index i = 0; i < dim(); ++i) {
      if ((i & cm) && !(i & tm)) std::swap(amps_(i), amps_(i | tm));
    }
    return *this;
  }

  Statevector& apply(const GateOp<Scalar>& op) {
    switch (op.kind) {
      case GateKind::RY: return ry(op.target, op.angle);
      case GateKind::RZ: return rz(op.target, op.angle);
      case GateKind::CNOT: return cnot(op.control, op.target);
    }
    throw std::invalid_argument("unknown gate kind");
  }

  /// <Z_q> = P(bit q = 0) - P(bit q = 1).
  Scalar expectation_z(int qubit) const {
    const Eigen::Index mask = bit(qubit);
    Scalar acc = 0;
    for (Eigen::Index i = 0; i < dim(); ++i) acc += (i & mask) ? -std::norm(amps_(i)) : std::norm(amps_(i));
    return acc;
  }

 private:
  static int checked_width(int n) {
    if (n < 1 || n > kMaxQubits) throw std::invalid_argument("qubit count must be in [1, " + std::to_string(kMaxQubits) + "]");
    return n;
  }

  Eigen::Index bit(int qubit) const {
    if (qubit < 0 || qubit >= n_) throw std::out_of_range("qubit index " + std::to_string(qubit) + " outside register");
    return Eigen::Index{1} << (n_ - 1 - qubit);
  }

  int n_;
  Vector amps_;
};

/// Number of qubits needed to hold `d` amplitudes (at least one).
inline int qubits_for_dim(Eigen::Index d) {
  int n = 1;
  while ((Eigen::Index{1} << n) < d) ++n;
  return n;
}

/// Real amplitude encoding x/|x|, zero-padded to the next power of two.
/// `n_qubits` forces a wider register; 0 picks the smallest that fits.
template <typename Derived>
Statevector<typename Derived::Scalar> amplitude_encode(const Eigen::MatrixBase<Derived>& x, int n_qubits = 0) {
  using Scalar = typename Derived::Scalar;
  if (x.size() == 0) throw std::invalid_argument("amplitude encoding of an empty vector");
  const Scalar norm = x.norm();
  if (!(norm > Scalar(0)) || !std::isfinite(norm)) throw std::invalid_argument("amplitude encoding needs a finite non-zero vector");
  const int n = n_qubits > 0 ? n_qubits : qubits_for_dim(x.size());
  if ((Eigen::Index{1} << n) < x.size()) throw std::invalid_argument("input dimension exceeds register size");
  Amplitudes<Scalar> amps = Amplitudes<Scalar>::Zero(Eigen::Index{1} << n);
  for (Eigen::Index i = 0; i < x.size(); ++i) amps(i) = std::complex<Scalar>(x(i) / norm, 0);
  return Statevector<Scalar>::from_amplitudes(std::move(amps), Scalar(1e-10));
}

template <typename Scalar>
Statevector<Scalar> apply_ry(Statevector<Scalar> state, int qubit, Scalar theta) {
  state.ry(qubit, theta);
  return state;
}

template <typename Scalar>
Statevector<Scalar> apply_rz(Statevector<Scalar> state, int qubit, Scalar theta) {
  state.rz(qubit, theta);
  return state;
}

template <typename Scalar>
Statevector<Scalar> apply_cnot(Statevector<Scalar> state, int control, int target) {
  state.cnot(control, target);
  return state;
}

template <typename Scalar>
Scalar expectation_z(const Statevector<Scalar>& state, int qubit) {
  return state.expectation_z(qubit);
}

/// All single-qubit <Z_i>, i = 0..n-1, in one pass over the amplitudes.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> expectations_z(const Statevector<Scalar>& state) {
  const int n = state.n_qubits();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> z = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n);
  const auto& a = state.amplitudes();
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const Scalar p = std::norm(a(i));
    for (int q = 0; q < n; ++q) z(q) += ((i >> (n - 1 - q)) & 1) ? -p : p;
  }
  return z;
}

/// Applies `ops` left to right.
template <typename Scalar>
Statevector<Scalar> run_circuit(Statevector<Scalar> state, std::span<const GateOp<Scalar>> ops) {
  for (const auto& op : ops) state.apply(op);
  return state;
}

template <typename Scalar>
Statevector<Scalar> run_circuit(Statevector<Scalar> state, const std::vector<GateOp<Scalar>>& ops) {
  return run_circuit(std::move(state), std::span<const GateOp<Scalar>>(ops));
}

/// Shot-sampled estimate of every <Z_i>. Exact expectations are the default
/// everywhere else; this exists for finite-shot studies.
template <typename Scalar, typename Rng>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sample_expectations_z(const Statevector<Scalar>& state, int shots, Rng& rng) {
  if (shots < 1) throw std::invalid_argument("shots must be positive");
  const auto& a = state.amplitudes();
  std::vector<double> probs(static_cast<std::size_t>(a.size()));
  for (Eigen::Index i = 0; i < a.size(); ++i) probs[static_cast<std::size_t>(i)] = static_cast<double>(std::norm(a(i)));
  std::discrete_distribution<Eigen::Index> outcome(probs.begin(), probs.end());
  const int n = state.n_qubits();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> z = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n);
  for (int s = 0; s < shots; ++s) {
    const Eigen::Index i = outcome(rng);
    for (int q = 0; q < n; ++q) z(q) += ((i >> (n - 1 - q)) & 1) ? Scalar(-1) : Scalar(1);
  }
  return z / Scalar(shots);
}

}  // namespace qasa::qsim
