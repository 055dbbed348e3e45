#include "qasa/labeling.hpp"

#include "qasa/indicators.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qasa::labeling {

void LabelConfig::validate() const {
  if (!(tau > 0)) throw std::invalid_argument("label threshold tau must be positive");
  if (ma_window < 2) throw std::invalid_argument("label moving-average window must be >= 2");
}

std::size_t LabelSeries::positives() const {
  return static_cast<std::size_t>(std::accumulate(y.begin() + std::ptrdiff_t(valid_from), y.end(), 0));
}

LabelSeries label_series(const Eigen::VectorXd& prices, const LabelConfig& config) {
  config.validate();
  if (prices.size() < config.ma_window) throw std::invalid_argument("series shorter than the label moving-average window");
  const Eigen::VectorXd ma = indicators::sma(prices, config.ma_window);
  LabelSeries out;
  out.valid_from = static_cast<std::size_t>(config.ma_window - 1);
  out.y.assign(static_cast<std::size_t>(prices.size()), 0);
  for (Eigen::Index t = config.ma_window - 1; t < prices.size(); ++t) {
    // P/MA - 1 > tau in product form; P = 102 over MA = 100 stays exactly on the boundary.
    const double gap = prices(t) - ma(t);
    const double d = config.mode == LabelMode::TwoSided ? std::abs(gap) : gap;
    out.y[std::size_t(t)] = d > config.tau * ma(t) ? 1 : 0;
  }
  return out;
}

}  // namespace qasa::labeling
