#include "qasa/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qasa::pipeline {

namespace {

Eigen::MatrixXd angle_rows(const featuremap::ChannelSeries& ch, const featuremap::MinMaxScaler& scaler) {
  Eigen::MatrixXd angles = Eigen::MatrixXd::Constant(ch.values.rows(), featuremap::kChannels, std::nan(""));
  for (Eigen::Index t = Eigen::Index(ch.valid_from); t < ch.values.rows(); ++t) {
    const featuremap::SixScalars z = ch.values.row(t).transpose();
    angles.row(t) = featuremap::encode_angles(z, scaler).transpose();
  }
  return angles;
}

void fill_hybrid_tokens(PreparedData& data, const Eigen::MatrixXd& angles, int window) {
  for (auto& s : data.dataset) {
    const auto first = Eigen::Index(s.bar) - window + 1;
    s.tokens = model::make_tokens_hybrid(angles.middleRows(first, window));
  }
}

}  // namespace

std::size_t first_sample_bar(std::size_t frame_valid_from, std::size_t label_valid_from, int window) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  const auto w = std::size_t(window);
  return std::max({frame_valid_from + w - 1, label_valid_from, 2 * w - 1});
}

PreparedData prepare_dataset(const OhlcvSeries& series, const FeatureFrame& frame, const std::vector<int>& labels,
                             std::size_t label_valid_from, const RunConfig& config) {
  const std::size_t n = series.size();
  if (frame.rows() != n) throw std::invalid_argument("feature frame is not aligned with the series");
  if (labels.size() != n) throw std::invalid_argument("labels are not aligned with the series");
  const int w = config.model.window;

  PreparedData data;
  data.prices = series.closes();
  for (const auto& b : series.bars()) data.timestamps.push_back(b.timestamp);
  data.first_bar = first_sample_bar(frame.valid_from(), label_valid_from, w);
  if (data.first_bar >= n) {
    throw DataError("series of " + std::to_string(n) + " bars leaves no sample after the warm-up of " +
                    std::to_string(data.first_bar) + " bars");
  }
  data.splits = chronological_split(n - data.first_bar, config.data.split);

  for (std::size_t t = data.first_bar; t < n; ++t) data.dataset.push_back({{}, labels[t], t});

  if (config.model.variant == model::Variant::Sequence) {
    const auto all = model::make_tokens_sequence(data.prices, w, config.model.raw_price_tokens);
    // Returns row j ends at bar j+W; price row j ends at bar j+W-1.
    const Eigen::Index shift = config.model.raw_price_tokens ? 2 * w - 2 : 2 * w - 1;
    for (auto& s : data.dataset) {
      s.tokens = {all.tokens.middleRows(Eigen::Index(s.bar) - shift, w), model::TokenOrigin::PriceWindow};
    }
    return data;
  }

  const auto channels = featuremap::six_scalar_channels(frame);
  const IndexRange fit_bars{channels.valid_from, data.first_bar + data.splits.train.end};
  data.scaler = featuremap::fit_minmax(channels, fit_bars);
  fill_hybrid_tokens(data, angle_rows(channels, *data.scaler), w);
  return data;
}

void rescale_hybrid(PreparedData& data, const FeatureFrame& frame, const featuremap::MinMaxScaler& scaler, int window) {
  data.scaler = scaler;
  fill_hybrid_tokens(data, angle_rows(featuremap::six_scalar_channels(frame), scaler), window);
}

double accuracy(const Eigen::VectorXd& probabilities, const std::vector<int>& labels, double threshold) {
  if (std::size_t(probabilities.size()) != labels.size()) throw std::invalid_argument("predictions and labels differ in length");
  if (labels.empty()) throw std::invalid_argument("accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += int(probabilities(Eigen::Index(i)) >= threshold) == labels[i];
  return double(hits) / double(labels.size());
}

Evaluation evaluate(const model::QasaModel& m, const PreparedData& data, const IndexRange& rows,
                    const backtest::BacktestConfig& config, int shots, std::uint64_t shot_seed) {
  if (rows.size() == 0 || rows.end > data.dataset.size()) throw std::invalid_argument("evaluation rows outside the dataset");
  m.validate();
  Evaluation e;
  e.probabilities.resize(Eigen::Index(rows.size()));
  std::mt19937_64 rng(shot_seed);
  for (std::size_t i = rows.begin; i < rows.end; ++i) {
    const auto& s = data.dataset[i];
    const auto states = model::encode_tokens(s.tokens, m);
    const double p = shots > 0 ? model::trace_forward_sampled(states, m, shots, rng).probability
                               : model::trace_forward(states, m).probability;
    e.probabilities(Eigen::Index(i - rows.begin)) = p;
    e.bars.push_back(s.bar);
    e.labels.push_back(s.label);
  }
  e.accuracy = accuracy(e.probabilities, e.labels, config.decision_threshold);
  const Eigen::VectorXd prices = data.prices.segment(Eigen::Index(e.bars.front()), Eigen::Index(e.bars.size()));
  e.report = backtest::simulate(prices, e.probabilities, config);
  return e;
}

train::MetricSet metrics_of(const Evaluation& e) {
  return {{"total_return", e.report.total_return},
          {"sharpe", e.report.sharpe.value},
          {"max_drawdown", e.report.max_drawdown},
          {"calmar", e.report.calmar.value},
          {"accuracy", e.accuracy}};
}

}  // namespace qasa::pipeline
