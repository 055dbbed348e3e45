#pragma once

// Glue between the stages: turns a candle series, its feature frame and its
// labels into a chronologically split sample set, and scores a trained model
// on one split.

#include "qasa/backtest.hpp"
#include "qasa/config.hpp"
#include "qasa/featuremap.hpp"
#include "qasa/features.hpp"
#include "qasa/labeling.hpp"
#include "qasa/trainer.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace qasa::pipeline {

struct PreparedData {
  train::Dataset dataset;  // one sample per bar, consecutive bars
  SplitIndices splits;     // rows of `dataset`
  std::optional<featuremap::MinMaxScaler> scaler;  // Hybrid only
  Eigen::VectorXd prices;  // closes on the full bar grid
  std::vector<std::int64_t> timestamps;
  std::size_t first_bar = 0;
};

/// First bar with a full context for either variant and a defined label.
/// Both variants use the same start so their test sets coincide.
std::size_t first_sample_bar(std::size_t frame_valid_from, std::size_t label_valid_from, int window);

/// Context for bar t: the W tokens ending at t (Sequence: windows of
/// log-returns or prices; Hybrid: per-bar angle vectors). The Hybrid scaler is
/// fitted on channel rows up to the last training bar.
PreparedData prepare_dataset(const OhlcvSeries& series, const FeatureFrame& frame, const std::vector<int>& labels,
                             std::size_t label_valid_from, const RunConfig& config);

/// Rebuilds the Hybrid contexts with an existing scaler (checkpoint reload).
void rescale_hybrid(PreparedData& data, const FeatureFrame& frame, const featuremap::MinMaxScaler& scaler, int window);

struct Evaluation {
  std::vector<std::size_t> bars;
  Eigen::VectorXd probabilities;
  std::vector<int> labels;
  double accuracy = 0;
  backtest::BacktestReport report;
};

/// Predictions over `rows` and the backtest on the matching bars. With
/// shots > 0 each circuit's expectations are estimated from samples.
Evaluation evaluate(const model::QasaModel& model, const PreparedData& data, const IndexRange& rows,
                    const backtest::BacktestConfig& config, int shots = 0, std::uint64_t shot_seed = 0);

/// total_return, sharpe, max_drawdown, calmar, accuracy.
train::MetricSet metrics_of(const Evaluation& e);

double accuracy(const Eigen::VectorXd& probabilities, const std::vector<int>& labels, double threshold = 0.5);

}  // namespace qasa::pipeline
