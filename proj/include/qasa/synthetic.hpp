#pragma once

// Regime-switching geometric Brownian motion with injected MA-deviation
// episodes: a sharp run-up of a few bars followed by a slow give-back. The
// run-ups push the close above its moving average by more than the label
// threshold, so labels are driven mostly by the injected signal.

#include "qasa/labeling.hpp"
#include "qasa/marketdata.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace qasa::synthetic {

struct SyntheticConfig {
  std::size_t bars = 300;
  std::uint64_t seed = 2;
  std::int64_t start_timestamp = 1704067200;  // 2024-01-01T00:00:00Z
  std::int64_t bar_interval = 86400;
  double start_price = 100;
  double drift = 0.001;             // per-bar log drift
  double calm_vol = 0.003;          // per-bar log-return s.d. in the calm regime
  double turbulent_vol = 0.008;     // per-bar log-return s.d. in the turbulent regime
  double regime_switch_prob = 0.04;
  double episode_prob = 0.04;       // chance per idle bar that an episode starts
  int ramp_bars = 3;
  double ramp_return = 0.03;        // per-bar log-return during a run-up
  int decay_bars = 6;
  double decay_fraction = 0.9;      // share of the run-up given back over the decay
  int min_gap_bars = 10;            // idle bars between the end of one episode and the next start
  double base_volume = 1000;
  double episode_volume_boost = 1.5;
  labeling::LabelConfig labels;
};

struct SyntheticFixture {
  OhlcvSeries series;
  std::vector<int> regime;        // 0 calm, 1 turbulent
  std::vector<int> episode_phase; // 0 idle, 1 run-up, 2 give-back
  Eigen::VectorXd injected;       // cumulative injected log offset
  std::vector<int> oracle_prediction;
  labeling::LabelSeries labels;
  double oracle_accuracy = 0;     // oracle vs labels over bars from labels.valid_from
};

/// The oracle classifier sees the noise-free path: it applies the label rule
/// to exp(drift * t + injected) instead of the price.
SyntheticFixture generate_regime_fixture(const SyntheticConfig& config = {});

}  // namespace qasa::synthetic
