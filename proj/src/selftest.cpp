#include "qasa/selftest.hpp"

#include "qasa/attention.hpp"
#include "qasa/backtest.hpp"
#include "qasa/oracle.hpp"
#include "qasa/qsim.hpp"
#include "qasa/vqc.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

namespace qasa::selftest {

namespace {

using Op = qsim::GateOp<double>;

std::vector<Op> random_circuit(int n, int depth, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(-2 * std::numbers::pi, 2 * std::numbers::pi);
  std::uniform_int_distribution<int> kind(0, n > 1 ? 2 : 1), qubit(0, n - 1);
  std::vector<Op> ops;
  for (int d = 0; d < depth; ++d) {
    const int k = kind(rng);
    if (k == 0) {
      ops.push_back(Op::ry(qubit(rng), angle(rng)));
    } else if (k == 1) {
      ops.push_back(Op::rz(qubit(rng), angle(rng)));
    } else {
      const int c = qubit(rng);
      int t = qubit(rng);
      while (t == c) t = qubit(rng);
      ops.push_back(Op::cnot(c, t));
    }
  }
  return ops;
}

SuiteResult gate_suite(bool flip_ry) {
  SuiteResult r{"qsim gate oracle", true, "", 0};
  std::mt19937_64 rng(11);
  double worst = 0;
  for (int c = 0; c < 300; ++c) {
    const int n = 1 + c % 3;
    auto ops = random_circuit(n, 1 + c % 30, rng);
    qsim::Statevector<double> sim(n);
    for (auto op : ops) {
      // RY(-theta) is RY with the sign of its off-diagonal entries flipped.
      if (flip_ry && op.kind == qsim::GateKind::RY) op.angle = -op.angle;
      sim.apply(op);
    }
    oracle::CVector psi0 = oracle::CVector::Zero(1 << n);
    psi0(0) = 1;
    const oracle::CVector ref = oracle::run_circuit(psi0, ops, n);
    worst = std::max(worst, (sim.amplitudes() - ref).cwiseAbs().maxCoeff());
    for (int q = 0; q < n; ++q) worst = std::max(worst, std::abs(sim.expectation_z(q) - oracle::expectation_z(ref, q, n)));
  }
  r.passed = worst <= 1e-10;
  std::ostringstream s;
  s << "300 circuits, max error " << worst;
  r.detail = s.str();
  return r;
}

SuiteResult gradient_suite() {
  SuiteResult r{"parameter-shift vs finite differences", true, "", 0};
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0;
  for (int draw = 0; draw < 40; ++draw) {
    const int n = 1 + draw % 4, layers = 1 + draw % 3;
    const auto params = vqc::init_params(n, layers, 100 + std::uint64_t(draw));
    Eigen::VectorXd x(Eigen::Index(1) << n);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = u(rng);
    const auto encoded = vqc::encode(x, params);
    const Eigen::MatrixXd jac = vqc::parameter_shift_jacobian(encoded, params.thetas);
    for (int k = 0; k < n; ++k) {
      const auto f = [&](const Eigen::MatrixXd& th) { return vqc::forward_state(encoded, th)(k); };
      const Eigen::MatrixXd fd = oracle::finite_difference(f, params.thetas);
      for (int l = 0; l < layers; ++l)
        for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(jac(k, l * n + i) - fd(l, i)));
    }
  }
  // <Z> = cos(theta) after a single RY on |0>.
  for (double th : {-2.5, -0.3, 0.0, 0.7, 1.9}) {
    Eigen::MatrixXd t(1, 1);
    t(0, 0) = th;
    const auto j = vqc::parameter_shift_jacobian(qsim::Statevector<double>(1), t);
    worst = std::max(worst, std::abs(j(0, 0) + std::sin(th)));
  }
  r.passed = worst <= 1e-6;
  std::ostringstream s;
  s << "40 draws, max |shift - fd| " << worst;
  r.detail = s.str();
  return r;
}

SuiteResult attention_suite() {
  SuiteResult r{"attention", true, "", 0};
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1, 1);
  auto rnd = [&](Eigen::Index a, Eigen::Index b) {
    Eigen::MatrixXd m(a, b);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
  };
  double worst = 0, worst_grad = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index T = 1 + trial % 8, d = 1 + trial % 6;
    const Eigen::MatrixXd q = rnd(T, d), k = rnd(T, d), v = rnd(T, d);
    const Eigen::MatrixXd w = attention_weights(q, k, d);
    worst = std::max(worst, (w - oracle::naive_attention_weights(q, k)).cwiseAbs().maxCoeff());
    worst = std::max(worst, (attention(q, k, v) - oracle::naive_attention(q, k, v)).cwiseAbs().maxCoeff());
    worst = std::max(worst, (w.rowwise().sum().array() - 1).abs().maxCoeff());
    if (trial % 10 == 0) {
      const Eigen::MatrixXd g = rnd(T, d);
      const auto grad = attention_backward(q, k, v, w, g);
      const auto loss = [&](const Eigen::MatrixXd& qq, const Eigen::MatrixXd& kk, const Eigen::MatrixXd& vv) {
        return (oracle::naive_attention(qq, kk, vv).array() * g.array()).sum();
      };
      const auto fq = oracle::finite_difference([&](const Eigen::MatrixXd& x) { return loss(x, k, v); }, q);
      const auto fk = oracle::finite_difference([&](const Eigen::MatrixXd& x) { return loss(q, x, v); }, k);
      const auto fv = oracle::finite_difference([&](const Eigen::MatrixXd& x) { return loss(q, k, x); }, v);
      worst_grad = std::max({worst_grad, (grad.dq - fq).cwiseAbs().maxCoeff(), (grad.dk - fk).cwiseAbs().maxCoeff(),
                             (grad.dv - fv).cwiseAbs().maxCoeff()});
    }
  }
  r.passed = worst <= 1e-12 && worst_grad <= 1e-6;
  std::ostringstream s;
  s << "forward max error " << worst << ", backward max error " << worst_grad;
  r.detail = s.str();
  return r;
}

SuiteResult metrics_suite() {
  SuiteResult r{"backtest metrics", true, "", 0};
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const char* what) {
    if (!ok) failures.emplace_back(what);
  };

  Eigen::VectorXd eq(3);
  eq << 1, 2, 1;
  expect(backtest::max_drawdown(eq) == -0.5, "max_drawdown([1,2,1]) == -0.5");

  Eigen::VectorXd zero_mean(5);
  zero_mean << 1, 1.5, 0.75, 1.125, 0.5625;  // +50%, -50%, +50%, -50%
  expect(std::abs(backtest::sharpe(zero_mean).value) < 1e-12, "zero-mean Sharpe is 0");

  backtest::BacktestConfig cfg;
  cfg.fee_bps = 0;
  Eigen::VectorXd prices(5);
  prices << 1, 1.5, 2, 3, 4;
  const auto hold = backtest::simulate(prices, Eigen::VectorXd::Zero(5), cfg);
  expect(std::abs(hold.equity(4) - 2.0) < 1e-12, "LP value doubles when price quadruples");

  // Naive-loop Sharpe on an uneven curve.
  Eigen::VectorXd curve(6);
  curve << 1, 1.02, 0.99, 1.05, 1.04, 1.08;
  std::vector<double> ret;
  for (int i = 1; i < 6; ++i) ret.push_back(curve(i) / curve(i - 1) - 1);
  double mean = 0, ss = 0;
  for (double x : ret) mean += x / 5;
  for (double x : ret) ss += (x - mean) * (x - mean);
  const double naive = mean / std::sqrt(ss / 4) * std::sqrt(252.0);
  expect(std::abs(backtest::sharpe(curve).value - naive) < 1e-12, "Sharpe matches naive recomputation");

  const double cal = std::pow(1.2, 252.0 / 10) - 1;
  expect(std::abs(backtest::calmar(0.2, -0.1, 10).value - cal / 0.1) < 1e-9 * cal, "Calmar annualization");

  r.passed = failures.empty();
  r.detail = failures.empty() ? "5 checks" : "failed: " + failures.front();
  return r;
}

SuiteResult timed(const std::function<SuiteResult()>& suite) {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult r = suite();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

std::vector<SuiteResult> run_selftest(const SelftestOptions& options) {
  return {timed([&] { return gate_suite(options.inject_ry_sign_flip); }), timed(gradient_suite), timed(attention_suite),
          timed(metrics_suite)};
}

}  // namespace qasa::selftest
