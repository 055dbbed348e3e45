#pragma once

#include "qasa/backtest.hpp"
#include "qasa/indicators.hpp"
#include "qasa/labeling.hpp"
#include "qasa/marketdata.hpp"
#include "qasa/model.hpp"
#include "qasa/trainer.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>

namespace qasa {

struct DataConfig {
  bool forward_fill = false;
  std::optional<std::int64_t> bar_interval;
  SplitFractions split;
};

/// Every stage setting in one document. Unknown keys are rejected on load.
struct RunConfig {
  DataConfig data;
  indicators::IndicatorConfig indicators;
  labeling::LabelConfig labels;
  model::ModelSpec model;
  train::TrainConfig train;
  backtest::BacktestConfig backtest;
  std::optional<double> periods_per_year;  // derived from the bar interval when unset
  int shots = 0;                            // 0: exact expectations

  void validate() const;

  /// Sharpe/Calmar annualization: 252 periods per year for daily bars, scaled by bar length.
  double resolved_periods_per_year(std::int64_t bar_interval_seconds) const;
};

nlohmann::json to_json(const RunConfig& config);

/// Overlays the keys present in `j` onto `base`.
RunConfig merge_config(const RunConfig& base, const nlohmann::json& j);

RunConfig load_config(const std::filesystem::path& path, const RunConfig& base = {});

}  // namespace qasa
