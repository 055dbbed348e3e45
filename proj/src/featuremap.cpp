#include "qasa/featuremap.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qasa::featuremap {

const std::array<std::string, kChannels>& channel_names() {
  static const std::array<std::string, kChannels> names{"s1_momentum",     "s2_ma_ratio",  "s3_vol_regime",
                                                        "s4a_rsi",         "s4b_macd_hist", "s5_volume_ratio",
                                                        "s6a_bb_position", "s6b_atr_rel"};
  return names;
}

ChannelSeries six_scalar_channels(const FeatureFrame& frame) {
  const auto& momentum = frame.column("momentum");
  const auto& ma_ratio = frame.column("ma_ratio");
  const auto& ewma_vol = frame.column("ewma_vol");
  const auto& lr_vol = frame.column("lr_vol");
  const auto& rsi = frame.column("rsi");
  const auto& macd = frame.column("macd_hist");
  const auto& vol_ratio = frame.column("vol_ratio");
  const auto& percent_b = frame.column("bb_percent_b");
  const auto& atr_rel = frame.column("atr_rel");

  const auto n = static_cast<Eigen::Index>(frame.rows());
  ChannelSeries out;
  out.values.setConstant(n, kChannels, std::numeric_limits<double>::quiet_NaN());
  out.valid_from = frame.valid_from();
  for (Eigen::Index t = Eigen::Index(out.valid_from); t < n; ++t) {
    double regime = 0;
    if (lr_vol(t) > 0 && ewma_vol(t) > 0) {
      regime = std::log(ewma_vol(t) / lr_vol(t));
    } else {
      ++out.degenerate_vol_bars;
    }
    out.values(t, S1) = momentum(t);
    out.values(t, S2) = ma_ratio(t);
    out.values(t, S3) = regime;
    out.values(t, S4A) = rsi(t) / 100.0;
    out.values(t, S4B) = macd(t);
    out.values(t, S5) = vol_ratio(t);
    out.values(t, S6A) = std::clamp(percent_b(t), 0.0, 1.0);
    out.values(t, S6B) = atr_rel(t);
  }
  if (out.degenerate_vol_bars > 0) {
    std::cerr << "warning: zero volatility on " << out.degenerate_vol_bars << " bar(s); vol regime set to 0\n";
  }
  return out;
}

MinMaxScaler::MinMaxScaler(std::array<ChannelBounds, kChannels> bounds) : bounds_(bounds), fitted_(true) {
  for (const auto& cb : bounds_) {
    if (!(cb.b >= cb.a) || !std::isfinite(cb.a) || !std::isfinite(cb.b)) throw std::invalid_argument("scaler bounds must satisfy a <= b");
  }
}

double MinMaxScaler::scale(int channel, double z) const {
  if (!fitted_) throw std::logic_error("scaler used before fit");
  const auto& cb = bounds_.at(static_cast<std::size_t>(channel));
  if (cb.degenerate()) return 0.5;
  return std::clamp((z - cb.a) / (cb.b - cb.a), 0.0, 1.0);
}

MinMaxScaler fit_minmax(const ChannelSeries& channels, const IndexRange& train) {
  if (train.size() == 0) throw std::invalid_argument("empty train range");
  if (train.end > static_cast<std::size_t>(channels.values.rows())) throw std::invalid_argument("train range outside series");
  if (train.begin < channels.valid_from) throw std::invalid_argument("train range starts inside the warm-up");
  const auto block = channels.values.middleRows(Eigen::Index(train.begin), Eigen::Index(train.size()));
  std::array<ChannelBounds, kChannels> bounds{};
  for (int c = 0; c < kChannels; ++c) bounds[std::size_t(c)] = {block.col(c).minCoeff(), block.col(c).maxCoeff()};
  return MinMaxScaler(bounds);
}

AngleVector encode_angles(const SixScalars& scalars, const MinMaxScaler& scaler) {
  if (!scaler.fitted()) throw std::logic_error("scaler used before fit");
  AngleVector theta;
  for (int c = 0; c < kChannels; ++c) theta(c) = 2 * std::numbers::pi * scaler.scale(c, scalars(c));
  return theta;
}

vqc::AngleInput to_angle_input(const AngleVector& angles) {
  vqc::AngleInput in{Eigen::VectorXd::Zero(kHybridQubits), Eigen::VectorXd::Zero(kHybridQubits)};
  in.ry << angles(S1), angles(S2), angles(S3), angles(S4A), angles(S5), angles(S6A);
  in.rz(3) = angles(S4B);
  in.rz(5) = angles(S6B);
  return in;
}

vqc::State prepare_hybrid_state(const AngleVector& angles) {
  vqc::State s(kHybridQubits);
  s.ry(0, angles(S1));
  s.ry(1, angles(S2));
  s.ry(2, angles(S3));
  s.ry(3, angles(S4A)).rz(3, angles(S4B));
  s.ry(4, angles(S5));
  s.ry(5, angles(S6A)).rz(5, angles(S6B));
  return s;
}

}  // namespace qasa::featuremap
