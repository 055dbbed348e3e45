#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qasa {

/// Raised for malformed or invalid market data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OhlcvBar {
  std::int64_t timestamp = 0;  // bar open time, epoch seconds UTC
  double open = 0;
  double high = 0;
  double low = 0;
  double close = 0;
  double volume = 0;
};

/// Validated, uniformly spaced candle series. Immutable after construction.
class OhlcvSeries {
 public:
  OhlcvSeries(std::vector<OhlcvBar> bars, std::int64_t bar_interval_seconds);

  std::size_t size() const { return bars_.size(); }
  std::int64_t bar_interval() const { return interval_; }
  const std::vector<OhlcvBar>& bars() const { return bars_; }
  const OhlcvBar& operator[](std::size_t i) const { return bars_[i]; }

  Eigen::VectorXd opens() const;
  Eigen::VectorXd highs() const;
  Eigen::VectorXd lows() const;
  Eigen::VectorXd closes() const;  // the price P_t used throughout
  Eigen::VectorXd volumes() const;

  /// Bars [begin, end) as a new series.
  OhlcvSeries slice(std::size_t begin, std::size_t end) const;

 private:
  std::vector<OhlcvBar> bars_;
  std::int64_t interval_;
};

struct LoadOptions {
  bool forward_fill = false;
  std::optional<std::int64_t> bar_interval;  // inferred from the smallest spacing when unset
};

/// Reads `timestamp,open,high,low,close,volume` CSV. Timestamps are epoch
/// seconds or ISO-8601 (date or date-time, UTC); the format is fixed per file.
OhlcvSeries load_ohlcv(const std::filesystem::path& path, const LoadOptions& options = {});

/// Writes the same CSV format with epoch-second timestamps.
void write_ohlcv(const std::filesystem::path& path, const OhlcvSeries& series);

std::int64_t parse_iso8601(const std::string& text);
std::string format_iso8601(std::int64_t epoch_seconds);

/// r_t = ln P_t - ln P_{t-1}; output has one fewer element than the input.
Eigen::VectorXd log_returns(const Eigen::VectorXd& prices);
Eigen::VectorXd log_returns(const OhlcvSeries& series);

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
};

struct SplitIndices {
  IndexRange train;
  IndexRange val;
  IndexRange test;
};

struct SplitFractions {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
};

inline constexpr std::size_t kMinSplitLength = 20;

/// floor(train*N), floor(val*N), remainder to test. Requires N >= 20.
SplitIndices chronological_split(std::size_t n, const SplitFractions& fractions = {});

}  // namespace qasa
