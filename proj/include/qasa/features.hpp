#pragma once

#include "qasa/indicators.hpp"
#include "qasa/marketdata.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qasa {

/// Named, bar-aligned feature columns with a single warm-up boundary.
class FeatureFrame {
 public:
  FeatureFrame() = default;
  explicit FeatureFrame(std::size_t rows) : rows_(rows) {}

  void add(std::string name, Eigen::VectorXd column);

  bool has(std::string_view name) const;
  const Eigen::VectorXd& column(std::string_view name) const;
  const Eigen::VectorXd& column(std::size_t index) const { return columns_.at(index); }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t cols() const { return names_.size(); }
  std::size_t rows() const { return rows_; }

  /// First bar at which every column is finite (and stays finite).
  std::size_t valid_from() const { return valid_from_; }

 private:
  std::size_t rows_ = 0;
  std::size_t valid_from_ = 0;
  std::vector<std::string> names_;
  std::vector<Eigen::VectorXd> columns_;
};

/// Base indicator columns for a candle series.
FeatureFrame build_base_frame(const OhlcvSeries& series, const indicators::IndicatorConfig& config);

/// Appends lag copies of every existing column and pairwise products.
/// Lags shift by whole bars; the warm-up boundary grows by the largest lag.
FeatureFrame augment_lags_interactions(const FeatureFrame& frame, const std::vector<int>& lag_set,
                                       const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

/// Base columns plus the configured lags and interactions.
FeatureFrame build_feature_frame(const OhlcvSeries& series, const indicators::IndicatorConfig& config);

/// One header row (`bar_index,timestamp,<columns>[,label]`), one row per bar from valid_from.
void write_feature_csv(const std::filesystem::path& path, const FeatureFrame& frame, const OhlcvSeries& series,
                       const std::vector<int>* labels = nullptr);

struct FeatureTable {
  FeatureFrame frame;
  std::optional<std::vector<int>> labels;  // bar-aligned; rows before valid_from are 0
};

/// Reads a file written by write_feature_csv back into a frame of `n_bars` rows.
FeatureTable read_feature_csv(const std::filesystem::path& path, std::size_t n_bars);

}  // namespace qasa
