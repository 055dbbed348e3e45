#pragma once

#include "qasa/features.hpp"
#include "qasa/marketdata.hpp"
#include "qasa/vqc.hpp"

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <string>

namespace qasa::featuremap {

inline constexpr int kChannels = 8;
inline constexpr int kHybridQubits = 6;

/// Channel order: s1 momentum, s2 ma_ratio, s3 vol_regime, s4a rsi_norm,
/// s4b macd_hist, s5 volume_ratio, s6a bb_position, s6b atr_rel.
enum Channel : int { S1 = 0, S2, S3, S4A, S4B, S5, S6A, S6B };

const std::array<std::string, kChannels>& channel_names();

using SixScalars = Eigen::Matrix<double, kChannels, 1>;
using AngleVector = Eigen::Matrix<double, kChannels, 1>;

/// One row of SixScalars per bar; rows before `valid_from` are NaN.
struct ChannelSeries {
  Eigen::Matrix<double, Eigen::Dynamic, kChannels> values;
  std::size_t valid_from = 0;
  std::size_t degenerate_vol_bars = 0;  // bars where s3 fell back to 0
};

ChannelSeries six_scalar_channels(const FeatureFrame& frame);

struct ChannelBounds {
  double a = 0;  // train min
  double b = 0;  // train max
  bool degenerate() const { return a == b; }
};

class MinMaxScaler {
 public:
  MinMaxScaler() = default;
  explicit MinMaxScaler(std::array<ChannelBounds, kChannels> bounds);

  bool fitted() const { return fitted_; }
  const std::array<ChannelBounds, kChannels>& bounds() const { return bounds_; }

  /// clip((z - a)/(b - a), 0, 1); a degenerate channel maps to 0.5.
  double scale(int channel, double z) const;

 private:
  std::array<ChannelBounds, kChannels> bounds_{};
  bool fitted_ = false;
};

/// Per-channel min/max over rows [train.begin, train.end) only.
MinMaxScaler fit_minmax(const ChannelSeries& channels, const IndexRange& train);

/// theta = 2*pi*mm(z) for each channel.
AngleVector encode_angles(const SixScalars& scalars, const MinMaxScaler& scaler);

/// Slot assignment on six qubits: RY(s1), RY(s2), RY(s3), RY(s4a)RZ(s4b), RY(s5), RY(s6a)RZ(s6b).
vqc::AngleInput to_angle_input(const AngleVector& angles);

/// U_enc |000000>, RY before RZ on the composite qubits.
vqc::State prepare_hybrid_state(const AngleVector& angles);

}  // namespace qasa::featuremap
