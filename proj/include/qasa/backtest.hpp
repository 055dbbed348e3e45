#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <string>
#include <vector>

namespace qasa::backtest {

enum class StrategyMode {
  LpRebalance,     // constant-product LP value, re-anchored on each signal
  SwitchFlatLong,  // long the asset, flat while the signal is on
};

std::string to_string(StrategyMode m);
StrategyMode strategy_from_string(const std::string& s);

struct BacktestConfig {
  double fee_bps = 30;
  int cooldown_bars = 1;
  double decision_threshold = 0.5;
  double initial_value = 1.0;
  double periods_per_year = 252;
  StrategyMode mode = StrategyMode::LpRebalance;

  void validate() const;
};

struct Trade {
  std::size_t bar = 0;
  double fee_paid = 0;
};

/// A ratio that may be undefined (zero variance, zero drawdown).
struct Ratio {
  double value = 0;
  bool degenerate = false;
};

struct BacktestReport {
  Eigen::VectorXd equity;
  std::vector<Trade> trades;
  double total_return = 0;
  Ratio sharpe;
  double max_drawdown = 0;
  Ratio calmar;
};

/// Sequential fold over bars. LP mode: between rebalances the value scales by
/// sqrt(P_t / P_ref); a signal (prediction >= threshold with the cooldown
/// elapsed) resets P_ref to P_t and pays fee_bps on half the portfolio value.
BacktestReport simulate(const Eigen::VectorXd& prices, const Eigen::VectorXd& predictions, const BacktestConfig& config);

/// last / first - 1.
double total_return(const Eigen::VectorXd& equity);

/// mean / sample-sd of simple bar returns, times sqrt(periods_per_year).
/// Zero variance yields 0 flagged degenerate.
Ratio sharpe(const Eigen::VectorXd& equity, double periods_per_year = 252);

/// min_t (equity_t / running_max_t - 1), in [-1, 0].
double max_drawdown(const Eigen::VectorXd& equity);

/// ((1 + R)^(periods_per_year / bars) - 1) / |MaxDD|; zero drawdown is degenerate
/// (infinite for a positive return, 0 otherwise).
Ratio calmar(double total_return, double max_drawdown, std::size_t bars, double periods_per_year = 252);

}  // namespace qasa::backtest
