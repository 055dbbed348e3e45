#include "qasa/backtest.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace qasa;
using namespace qasa::backtest;

namespace {

Eigen::VectorXd curve(std::initializer_list<double> v) {
  Eigen::VectorXd x(Eigen::Index(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

Eigen::VectorXd random_prices(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0, 0.02);
  Eigen::VectorXd p(n);
  p(0) = 100;
  for (Eigen::Index t = 1; t < n; ++t) p(t) = p(t - 1) * std::exp(z(rng));
  return p;
}

}  // namespace

TEST(Simulate, NoSignalsFlatPricesIsFlat) {
  const auto r = simulate(Eigen::VectorXd::Constant(10, 5), Eigen::VectorXd::Zero(10), {});
  EXPECT_TRUE((r.equity.array() == 1.0).all());
  EXPECT_TRUE(r.trades.empty());
  EXPECT_EQ(r.total_return, 0);
  EXPECT_TRUE(r.calmar.degenerate);
}

TEST(Simulate, NoSignalsIsSqrtPricePath) {
  const auto p = random_prices(60, 3);
  const auto r = simulate(p, Eigen::VectorXd::Zero(60), {});
  for (Eigen::Index t = 0; t < 60; ++t) EXPECT_NEAR(r.equity(t), std::sqrt(p(t) / p(0)), 1e-14);
  const auto quad = simulate(curve({1, 2, 4}), Eigen::VectorXd::Zero(3), {});
  EXPECT_NEAR(quad.equity(2), 2.0, 1e-12);
}

TEST(Simulate, FeeFreeRebalanceIsContinuous) {
  const Eigen::VectorXd p = curve({100, 110, 121, 90});
  Eigen::VectorXd pred = Eigen::VectorXd::Zero(4);
  pred(1) = 0.9;
  BacktestConfig cfg;
  cfg.fee_bps = 0;
  const auto r = simulate(p, pred, cfg);
  ASSERT_EQ(r.trades.size(), 1u);
  EXPECT_NEAR(r.equity(1), std::sqrt(1.1), 1e-15);
  EXPECT_NEAR(r.equity(2), std::sqrt(1.1) * std::sqrt(121.0 / 110), 1e-15);
  // Value-neutral re-anchoring: the LP path telescopes to sqrt(P_T/P_0).
  EXPECT_NEAR(r.equity(3), std::sqrt(0.9), 1e-15);
}

TEST(Simulate, FeeIsChargedOnHalfTheValue) {
  Eigen::VectorXd pred = Eigen::VectorXd::Zero(3);
  pred(1) = 1;
  BacktestConfig cfg;
  cfg.fee_bps = 100;
  const auto r = simulate(Eigen::VectorXd::Constant(3, 10), pred, cfg);
  ASSERT_EQ(r.trades.size(), 1u);
  EXPECT_NEAR(r.trades[0].fee_paid, 0.005, 1e-15);
  EXPECT_NEAR(r.equity(2), 0.995, 1e-15);
}

TEST(Simulate, FeeMonotonicity) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_prices(80, 100 + std::uint64_t(trial));
    const Eigen::VectorXd pred = testkit::random_vector(80, rng, 0, 1);
    double prev = INFINITY;
    for (double fee : {0.0, 10.0, 30.0, 100.0}) {
      BacktestConfig cfg;
      cfg.fee_bps = fee;
      const double ret = simulate(p, pred, cfg).total_return;
      EXPECT_LE(ret, prev);
      prev = ret;
    }
  }
}

TEST(Simulate, CooldownGapsOnTradeLog) {
  std::mt19937_64 rng(6);
  const auto p = random_prices(120, 7);
  const Eigen::VectorXd pred = testkit::random_vector(120, rng, 0, 1);
  for (int cooldown : {0, 1, 3, 7}) {
    BacktestConfig cfg;
    cfg.cooldown_bars = cooldown;
    const auto r = simulate(p, pred, cfg);
    ASSERT_FALSE(r.trades.empty());
    for (std::size_t i = 1; i < r.trades.size(); ++i) EXPECT_GE(r.trades[i].bar - r.trades[i - 1].bar, std::size_t(std::max(cooldown, 1)));
  }
  BacktestConfig cfg;
  cfg.cooldown_bars = 3;
  const auto r = simulate(Eigen::VectorXd::Constant(10, 1), Eigen::VectorXd::Ones(10), cfg);
  ASSERT_EQ(r.trades.size(), 4u);
  EXPECT_EQ(r.trades[1].bar, 3u);
}

TEST(Simulate, SwitchModeGoesFlatOnSignal) {
  const Eigen::VectorXd p = curve({100, 120, 60, 60, 90});
  const Eigen::VectorXd pred = curve({0, 0.8, 0.8, 0.1, 0.1});
  BacktestConfig cfg;
  cfg.mode = StrategyMode::SwitchFlatLong;
  cfg.fee_bps = 0;
  const auto r = simulate(p, pred, cfg);
  EXPECT_NEAR(r.equity(1), 1.2, 1e-15);
  EXPECT_NEAR(r.equity(2), 1.2, 1e-15);
  EXPECT_NEAR(r.equity(4), 1.8, 1e-15);
  EXPECT_EQ(r.trades.size(), 2u);
  EXPECT_EQ(strategy_from_string(to_string(cfg.mode)), cfg.mode);
}

TEST(Simulate, EquityStaysPositiveAndInputsChecked) {
  std::mt19937_64 rng(8);
  const auto p = random_prices(50, 9);
  const auto r = simulate(p, testkit::random_vector(50, rng, 0, 1), {});
  EXPECT_TRUE((r.equity.array() > 0).all());
  EXPECT_GE(r.max_drawdown, -1);
  EXPECT_LE(r.max_drawdown, 0);
  EXPECT_THROW(simulate(p, Eigen::VectorXd::Zero(49), {}), std::invalid_argument);
  BacktestConfig bad;
  bad.decision_threshold = 1;
  EXPECT_THROW(simulate(p, Eigen::VectorXd::Zero(50), bad), std::invalid_argument);
  bad = {};
  bad.fee_bps = -1;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Metrics, TotalReturn) {
  EXPECT_NEAR(total_return(curve({1.0, 1.10})), 0.10, 1e-15);
  EXPECT_NEAR(total_return(curve({1.0, 1.1399})), 0.1399, 1e-15);
  EXPECT_EQ(total_return(curve({2, 2, 2})), 0);
  EXPECT_THROW(total_return(Eigen::VectorXd(0)), std::invalid_argument);
}

TEST(Metrics, MaxDrawdown) {
  EXPECT_EQ(max_drawdown(curve({1, 2, 1})), -0.5);
  EXPECT_EQ(max_drawdown(curve({2, 1, 3})), -0.5);
  EXPECT_EQ(max_drawdown(curve({1, 2, 3, 4})), 0);
}

TEST(Metrics, DrawdownIsMonotoneUnderExtension) {
  const auto p = random_prices(100, 11);
  double prev = 0;
  for (Eigen::Index len = 1; len <= 100; ++len) {
    const double dd = max_drawdown(p.head(len));
    EXPECT_LE(dd, prev);
    prev = dd;
  }
}

TEST(Metrics, SharpeMatchesSpreadsheetRecomputation) {
  const auto eq = random_prices(50, 12);
  std::vector<double> r;
  for (int t = 1; t < 50; ++t) r.push_back(eq(t) / eq(t - 1) - 1);
  double mean = 0;
  for (double x : r) mean += x;
  mean /= double(r.size());
  double ss = 0;
  for (double x : r) ss += (x - mean) * (x - mean);
  const double want = mean / std::sqrt(ss / double(r.size() - 1)) * std::sqrt(252.0);
  const auto s = sharpe(eq);
  EXPECT_FALSE(s.degenerate);
  EXPECT_NEAR(s.value, want, 1e-10);
}

TEST(Metrics, SharpeDegenerateCases) {
  Eigen::VectorXd zero_mean(5);
  zero_mean << 1, 1.5, 0.75, 1.125, 0.5625;  // +50%, -50%, +50%, -50%
  EXPECT_NEAR(sharpe(zero_mean).value, 0, 1e-15);
  const auto constant_growth = sharpe(curve({1, 1.01, 1.0201, 1.030301}));
  EXPECT_TRUE(constant_growth.degenerate);
  EXPECT_EQ(constant_growth.value, 0);
  EXPECT_THROW(sharpe(curve({1, 2})), std::invalid_argument);
}

TEST(Metrics, CalmarConvention) {
  EXPECT_NEAR(calmar(0.10, -0.10, 252).value, 1.0, 1e-12);
  EXPECT_EQ(calmar(0.0, -0.2, 100).value, 0);
  EXPECT_TRUE(calmar(0.05, 0.0, 100).degenerate);
  EXPECT_TRUE(std::isinf(calmar(0.05, 0.0, 100).value));
  EXPECT_EQ(calmar(-0.05, 0.0, 100).value, 0);
  EXPECT_THROW(calmar(0.1, -0.1, 0), std::invalid_argument);
}

TEST(Metrics, CalmarOnShortWindowIsLarge) {
  // 13.99% over 38 bars with a 10.10% drawdown: annualizing lifts the ratio well past 1.39.
  const double c = calmar(0.1399, -0.1010, 38).value;
  EXPECT_GT(c, 10);
  EXPECT_NEAR(c, (std::pow(1.1399, 252.0 / 38) - 1) / 0.1010, 1e-12);
}
