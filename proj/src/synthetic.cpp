#include "qasa/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace qasa::synthetic {

namespace {

// Box-Muller over a 64-bit engine keeps the fixture identical across standard libraries.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}
  double uniform() { return (double(rng_() >> 11) + 0.5) * 0x1.0p-53; }
  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform(), u2 = uniform();
    const double r = std::sqrt(-2 * std::log(u1));
    spare_ = r * std::sin(2 * M_PI * u2);
    has_spare_ = true;
    return r * std::cos(2 * M_PI * u2);
  }

 private:
  std::mt19937_64 rng_;
  double spare_ = 0;
  bool has_spare_ = false;
};

}  // namespace

SyntheticFixture generate_regime_fixture(const SyntheticConfig& c) {
  if (c.bars < std::size_t(c.labels.ma_window) + 1) throw std::invalid_argument("synthetic fixture too short");
  if (c.ramp_bars < 1 || c.decay_bars < 1) throw std::invalid_argument("episode phases need at least one bar");
  Gaussian gauss(c.seed);
  const std::size_t n = c.bars;

  std::vector<int> regime(n, 0), phase(n, 0);
  Eigen::VectorXd injected = Eigen::VectorXd::Zero(Eigen::Index(n));
  Eigen::VectorXd logp(static_cast<Eigen::Index>(n));
  logp(0) = std::log(c.start_price);

  const double decay_step = c.decay_fraction * c.ramp_return * c.ramp_bars / c.decay_bars;
  int state = 0, remaining = 0, idle = c.min_gap_bars;
  double offset = 0;
  for (std::size_t t = 1; t < n; ++t) {
    regime[t] = regime[t - 1];
    if (gauss.uniform() < c.regime_switch_prob) regime[t] = 1 - regime[t];

    if (state == 0 && idle >= c.min_gap_bars && gauss.uniform() < c.episode_prob) {
      state = 1;
      remaining = c.ramp_bars;
    }
    double push = 0;
    if (state == 1) {
      push = c.ramp_return;
      if (--remaining == 0) {
        state = 2;
        remaining = c.decay_bars;
      }
      phase[t] = 1;
    } else if (state == 2) {
      push = -decay_step;
      if (--remaining == 0) {
        state = 0;
        idle = 0;
      }
      phase[t] = 2;
    } else {
      ++idle;
    }
    offset += push;
    injected(Eigen::Index(t)) = offset;
    const double vol = regime[t] ? c.turbulent_vol : c.calm_vol;
    logp(Eigen::Index(t)) = logp(Eigen::Index(t - 1)) + c.drift + push + vol * gauss();
  }

  std::vector<OhlcvBar> bars(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double close = std::exp(logp(Eigen::Index(t)));
    const double open = t == 0 ? close : bars[t - 1].close;
    const double vol = regime[t] ? c.turbulent_vol : c.calm_vol;
    const double wick_hi = std::abs(gauss()) * vol * 0.5, wick_lo = std::abs(gauss()) * vol * 0.5;
    auto& b = bars[t];
    b.timestamp = c.start_timestamp + std::int64_t(t) * c.bar_interval;
    b.open = open;
    b.close = close;
    b.high = std::max(open, close) * std::exp(wick_hi);
    b.low = std::min(open, close) * std::exp(-wick_lo);
    const double boost = phase[t] == 1 ? c.episode_volume_boost : 1.0;
    b.volume = c.base_volume * boost * std::exp(0.25 * gauss());
  }

  SyntheticFixture fx{OhlcvSeries(std::move(bars), c.bar_interval), regime, phase, injected, {}, {}, 0};
  fx.labels = labeling::label_series(fx.series.closes(), c.labels);
  Eigen::VectorXd clean(static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < n; ++t) clean(Eigen::Index(t)) = std::exp(c.drift * double(t) + injected(Eigen::Index(t)));
  const labeling::LabelSeries oracle = labeling::label_series(clean, c.labels);
  fx.oracle_prediction = oracle.y;
  std::size_t hits = 0;
  for (std::size_t t = fx.labels.valid_from; t < n; ++t) hits += fx.oracle_prediction[t] == fx.labels.y[t];
  fx.oracle_accuracy = double(hits) / double(n - fx.labels.valid_from);
  return fx;
}

}  // namespace qasa::synthetic
