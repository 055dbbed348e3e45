#pragma once

#include "qasa/marketdata.hpp"
#include "qasa/model.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace qasa::train {

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 0.01;
  int batch_size = 16;
  std::uint64_t seed = 7;
  int n_repeats = 5;
  int patience = 15;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  bool class_weighting = true;

  void validate() const;
};

/// Thrown when a loss turns non-finite during training.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One prediction target: a context of tokens plus the label at `bar`.
struct Sample {
  model::TokenBatch tokens;
  int label = 0;
  std::size_t bar = 0;
};

using Dataset = std::vector<Sample>;

inline constexpr double kProbabilityClamp = 1e-7;

/// -[y ln p + (1-y) ln(1-p)], p clamped to [1e-7, 1 - 1e-7].
double bce_loss(double p, int y);

/// dL/dp of the unclamped loss.
double bce_grad(double p, int y);

struct RunArtifact {
  model::QasaModel model;  // best-validation checkpoint
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::uint64_t seed = 0;
  TrainConfig config;
  int best_epoch = -1;  // -1: the initial parameters were never beaten
  double positive_weight = 1;
};

/// Adam over head and circuit angles (circuit gradients by parameter shift)
/// on `splits.train`, early stopping on weighted validation BCE. `splits`
/// index into `data`; no row in `splits.test` is read.
RunArtifact train(model::QasaModel init, const Dataset& data, const SplitIndices& splits, const TrainConfig& config);

/// Weighted BCE of `m` over rows [range.begin, range.end).
double dataset_loss(const model::QasaModel& m, const Dataset& data, const IndexRange& range, double positive_weight);

/// negatives / positives over the range (1 when either class is absent).
double positive_class_weight(const Dataset& data, const IndexRange& range);

using MetricSet = std::map<std::string, double>;
using ModelFactory = std::function<model::QasaModel(std::uint64_t seed)>;
using RunEvaluator = std::function<MetricSet(const RunArtifact&)>;

struct MetricSummary {
  double mean = 0;
  double sd = 0;  // sample s.d.; 0 for a single run
  std::vector<double> values;
};

struct RepeatOutcome {
  std::vector<std::uint64_t> seeds;
  std::vector<RunArtifact> runs;
  std::vector<MetricSet> metrics;
  std::map<std::string, MetricSummary> summary;
};

MetricSummary summarize(const std::vector<double>& values);

/// Seeds base, base+1, ..., base+n_repeats-1; runs execute concurrently.
RepeatOutcome repeat_runs(const ModelFactory& factory, const Dataset& data, const SplitIndices& splits,
                          const TrainConfig& config, const RunEvaluator& evaluate, bool parallel = true);

}  // namespace qasa::train
