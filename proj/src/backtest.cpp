#include "qasa/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qasa::backtest {

std::string to_string(StrategyMode m) { return m == StrategyMode::LpRebalance ? "lp" : "switch"; }

StrategyMode strategy_from_string(const std::string& s) {
  if (s == "lp") return StrategyMode::LpRebalance;
  if (s == "switch") return StrategyMode::SwitchFlatLong;
  throw std::invalid_argument("unknown strategy mode '" + s + "' (expected lp or switch)");
}

void BacktestConfig::validate() const {
  if (!(fee_bps >= 0)) throw std::invalid_argument("fee_bps must be >= 0");
  if (cooldown_bars < 0) throw std::invalid_argument("cooldown_bars must be >= 0");
  if (!(decision_threshold > 0 && decision_threshold < 1)) throw std::invalid_argument("decision threshold must lie in (0, 1)");
  if (!(initial_value > 0)) throw std::invalid_argument("initial value must be positive");
  if (!(periods_per_year > 0)) throw std::invalid_argument("periods_per_year must be positive");
}

BacktestReport simulate(const Eigen::VectorXd& prices, const Eigen::VectorXd& predictions, const BacktestConfig& config) {
  config.validate();
  if (prices.size() != predictions.size()) throw std::invalid_argument("predictions are not aligned with prices");
  if (prices.size() < 1) throw std::invalid_argument("empty backtest window");
  if ((prices.array() <= 0).any() || !prices.allFinite()) throw std::invalid_argument("prices must be positive");

  const double fee_rate = config.fee_bps / 1e4;
  const Eigen::Index n = prices.size();
  BacktestReport rep;
  rep.equity.resize(n);

  double anchor_value = config.initial_value;
  double anchor_price = prices(0);
  bool flat = false;
  std::ptrdiff_t last_trade = -1;

  for (Eigen::Index t = 0; t < n; ++t) {
    double value;
    if (config.mode == StrategyMode::LpRebalance) {
      value = anchor_value * std::sqrt(prices(t) / anchor_price);
    } else {
      value = flat ? anchor_value : anchor_value * prices(t) / anchor_price;
    }

    const bool signal = predictions(t) >= config.decision_threshold;
    const bool cooled = last_trade < 0 || t - last_trade >= config.cooldown_bars;
    if (config.mode == StrategyMode::LpRebalance) {
      if (signal && cooled) {
        const double fee = fee_rate * value / 2;
        value -= fee;
        rep.trades.push_back({std::size_t(t), fee});
        last_trade = t;
        anchor_value = value;
        anchor_price = prices(t);
      }
    } else if (signal != flat && cooled) {
      const double fee = fee_rate * value;
      value -= fee;
      rep.trades.push_back({std::size_t(t), fee});
      last_trade = t;
      flat = signal;
      anchor_value = value;
      anchor_price = prices(t);
    }
    rep.equity(t) = value;
  }

  rep.total_return = total_return(rep.equity);
  rep.max_drawdown = max_drawdown(rep.equity);
  rep.sharpe = n >= 3 ? sharpe(rep.equity, config.periods_per_year) : Ratio{0, true};
  rep.calmar = n >= 2 ? calmar(rep.total_return, rep.max_drawdown, std::size_t(n - 1), config.periods_per_year) : Ratio{0, true};
  return rep;
}

double total_return(const Eigen::VectorXd& equity) {
  if (equity.size() == 0) throw std::invalid_argument("empty equity curve");
  return equity(equity.size() - 1) / equity(0) - 1;
}

Ratio sharpe(const Eigen::VectorXd& equity, double periods_per_year) {
  if (equity.size() < 3) throw std::invalid_argument("sharpe needs at least three equity points");
  const Eigen::Index m = equity.size() - 1;
  const Eigen::ArrayXd r = equity.tail(m).array() / equity.head(m).array() - 1;
  const double mean = r.mean();
  const double var = (r - mean).square().sum() / double(m - 1);
  const double sd = std::sqrt(var);
  if (sd == 0 || sd < 1e-15 * std::max(1.0, std::abs(mean))) return {0, true};
  return {mean / sd * std::sqrt(periods_per_year), false};
}

double max_drawdown(const Eigen::VectorXd& equity) {
  if (equity.size() == 0) throw std::invalid_argument("empty equity curve");
  double peak = equity(0), worst = 0;
  for (Eigen::Index t = 0; t < equity.size(); ++t) {
    peak = std::max(peak, equity(t));
    worst = std::min(worst, equity(t) / peak - 1);
  }
  return worst;
}

Ratio calmar(double total_return, double max_drawdown, std::size_t bars, double periods_per_year) {
  if (bars == 0) throw std::invalid_argument("calmar needs at least one period");
  const double annualized = std::pow(1 + total_return, periods_per_year / double(bars)) - 1;
  if (max_drawdown >= 0) {
    return {annualized > 0 ? std::numeric_limits<double>::infinity() : 0.0, true};
  }
  return {annualized / std::abs(max_drawdown), false};
}

}  // namespace qasa::backtest
