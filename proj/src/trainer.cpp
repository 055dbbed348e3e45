#include "qasa/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>

namespace qasa::train {

namespace {

using StateCache = std::vector<std::vector<vqc::State>>;

struct AdamMoments {
  model::ModelGradient m, v;
};

template <typename Block>
void adam_block(Block& param, const Block& g, Block& m, Block& v, const TrainConfig& c, double bias1, double bias2) {
  m = c.beta1 * m + (1 - c.beta1) * g;
  v = c.beta2 * v + (1 - c.beta2) * g.cwiseProduct(g);
  param -= (c.learning_rate * (m / bias1).array() / ((v / bias2).array().sqrt() + c.adam_eps)).matrix();
}

void adam_step(model::QasaModel& p, const model::ModelGradient& g, AdamMoments& s, const TrainConfig& c, int step) {
  const double bias1 = 1 - std::pow(c.beta1, step);
  const double bias2 = 1 - std::pow(c.beta2, step);
  adam_block(p.query.thetas, g.query, s.m.query, s.v.query, c, bias1, bias2);
  adam_block(p.key.thetas, g.key, s.m.key, s.v.key, c, bias1, bias2);
  adam_block(p.value.thetas, g.value, s.m.value, s.v.value, c, bias1, bias2);
  adam_block(p.head_weights, g.head_weights, s.m.head_weights, s.v.head_weights, c, bias1, bias2);
  s.m.head_bias = c.beta1 * s.m.head_bias + (1 - c.beta1) * g.head_bias;
  s.v.head_bias = c.beta2 * s.v.head_bias + (1 - c.beta2) * g.head_bias * g.head_bias;
  p.head_bias -= c.learning_rate * (s.m.head_bias / bias1) / (std::sqrt(s.v.head_bias / bias2) + c.adam_eps);
}

double weighted_bce(double p, int y, double positive_weight) {
  return y == 1 ? positive_weight * bce_loss(p, 1) : bce_loss(p, 0);
}

double cached_loss(const model::QasaModel& m, const Dataset& data, const StateCache& states, const IndexRange& range,
                   double positive_weight) {
  double total = 0;
  for (std::size_t i = range.begin; i < range.end; ++i) {
    const double p = model::trace_forward(states[i], m).probability;
    total += weighted_bce(p, data[i].label, positive_weight);
  }
  return total / double(range.size());
}

void check_range(const IndexRange& r, std::size_t n, const char* what) {
  if (r.size() == 0) throw std::invalid_argument(std::string("empty ") + what + " split");
  if (r.end > n || r.begin > r.end) throw std::invalid_argument(std::string(what) + " split outside the dataset");
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (!(learning_rate >= 0)) throw std::invalid_argument("learning rate must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (n_repeats < 1) throw std::invalid_argument("n_repeats must be >= 1");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) throw std::invalid_argument("Adam betas must lie in [0, 1)");
  if (!(adam_eps > 0)) throw std::invalid_argument("Adam epsilon must be positive");
}

double bce_loss(double p, int y) {
  if (!(p >= 0 && p <= 1)) throw std::invalid_argument("probability outside [0, 1]");
  const double q = std::clamp(p, kProbabilityClamp, 1 - kProbabilityClamp);
  return y == 1 ? -std::log(q) : -std::log(1 - q);
}

double bce_grad(double p, int y) { return y == 1 ? -1 / p : 1 / (1 - p); }

double positive_class_weight(const Dataset& data, const IndexRange& range) {
  std::size_t pos = 0;
  for (std::size_t i = range.begin; i < range.end; ++i) pos += data[i].label == 1;
  const std::size_t neg = range.size() - pos;
  if (pos == 0 || neg == 0) return 1.0;
  return double(neg) / double(pos);
}

double dataset_loss(const model::QasaModel& m, const Dataset& data, const IndexRange& range, double positive_weight) {
  check_range(range, data.size(), "evaluation");
  double total = 0;
  for (std::size_t i = range.begin; i < range.end; ++i) {
    total += weighted_bce(model::forward(data[i].tokens, m), data[i].label, positive_weight);
  }
  return total / double(range.size());
}

RunArtifact train(model::QasaModel init, const Dataset& data, const SplitIndices& splits, const TrainConfig& config) {
  config.validate();
  init.validate();
  check_range(splits.train, data.size(), "train");
  check_range(splits.val, data.size(), "validation");

  RunArtifact art;
  art.seed = config.seed;
  art.config = config;
  art.positive_weight = config.class_weighting ? positive_class_weight(data, splits.train) : 1.0;

  // Encoded inputs do not depend on trainable angles; test rows stay untouched.
  StateCache states(data.size());
  for (const auto& range : {splits.train, splits.val}) {
    for (std::size_t i = range.begin; i < range.end; ++i) states[i] = model::encode_tokens(data[i].tokens, init);
  }

  model::QasaModel current = init;
  art.model = init;
  double best_val = cached_loss(init, data, states, splits.val, art.positive_weight);
  AdamMoments moments{model::ModelGradient::zeros_like(init), model::ModelGradient::zeros_like(init)};
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(splits.train.size());
  int step = 0, since_best = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), splits.train.begin);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += std::size_t(config.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + std::size_t(config.batch_size));
      model::ModelGradient grad = model::ModelGradient::zeros_like(current);
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t i = order[b];
        const auto trace = model::trace_forward(states[i], current);
        const double p = trace.probability;
        // d(weighted BCE)/d(logit) for a sigmoid output.
        const double d_logit = data[i].label == 1 ? art.positive_weight * (p - 1) : p;
        grad += model::backward(states[i], current, trace, d_logit);
      }
      grad *= 1.0 / double(stop - start);
      adam_step(current, grad, moments, config, ++step);
    }

    const double tl = cached_loss(current, data, states, splits.train, art.positive_weight);
    const double vl = cached_loss(current, data, states, splits.val, art.positive_weight);
    if (!std::isfinite(tl) || !std::isfinite(vl)) {
      throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + " (seed " + std::to_string(config.seed) + ")");
    }
    art.train_loss.push_back(tl);
    art.val_loss.push_back(vl);
    if (vl < best_val) {
      best_val = vl;
      art.model = current;
      art.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return art;
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  s.values = values;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / double(values.size() - 1));
  }
  return s;
}

RepeatOutcome repeat_runs(const ModelFactory& factory, const Dataset& data, const SplitIndices& splits,
                          const TrainConfig& config, const RunEvaluator& evaluate, bool parallel) {
  config.validate();
  RepeatOutcome out;
  for (int r = 0; r < config.n_repeats; ++r) out.seeds.push_back(config.seed + std::uint64_t(r));

  auto one = [&](std::uint64_t seed) {
    TrainConfig c = config;
    c.seed = seed;
    return train(factory(seed), data, splits, c);
  };
  if (parallel && out.seeds.size() > 1) {
    std::vector<std::future<RunArtifact>> jobs;
    for (auto seed : out.seeds) jobs.push_back(std::async(std::launch::async, one, seed));
    for (auto& j : jobs) out.runs.push_back(j.get());
  } else {
    for (auto seed : out.seeds) out.runs.push_back(one(seed));
  }

  std::map<std::string, std::vector<double>> columns;
  for (const auto& run : out.runs) {
    out.metrics.push_back(evaluate(run));
    for (const auto& [k, v] : out.metrics.back()) columns[k].push_back(v);
  }
  for (const auto& [k, vals] : columns) out.summary[k] = summarize(vals);
  return out;
}

}  // namespace qasa::train
