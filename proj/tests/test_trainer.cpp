#include "qasa/pipeline.hpp"
#include "qasa/serialization.hpp"
#include "qasa/trainer.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qasa;

TEST(Bce, ValuesAndClamp) {
  EXPECT_NEAR(train::bce_loss(0.8, 1), -std::log(0.8), 1e-15);
  EXPECT_NEAR(train::bce_loss(0.8, 0), -std::log(0.2), 1e-15);
  EXPECT_NEAR(train::bce_loss(0.0, 1), -std::log(train::kProbabilityClamp), 1e-12);
  EXPECT_TRUE(std::isfinite(train::bce_loss(1.0, 0)));
  EXPECT_NEAR(train::bce_grad(0.25, 1), -4, 1e-15);
  EXPECT_NEAR(train::bce_grad(0.75, 0), 4, 1e-12);
}

TEST(ClassWeight, NegativesOverPositives) {
  train::Dataset d(10);
  for (std::size_t i = 0; i < 10; ++i) d[i].label = i < 2 ? 1 : 0;
  EXPECT_DOUBLE_EQ(train::positive_class_weight(d, {0, 10}), 4.0);
  EXPECT_DOUBLE_EQ(train::positive_class_weight(d, {2, 10}), 1.0);
}

TEST(Summary, MeanAndSampleSd) {
  const auto s = train::summarize({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.sd, std::sqrt(5.0 / 3), 1e-15);
  EXPECT_EQ(train::summarize({7}).sd, 0);
}

TEST(TrainConfig, Validation) {
  train::TrainConfig c;
  c.epochs = 0;
  EXPECT_NO_THROW(c.validate());
  c.epochs = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.learning_rate = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.beta1 = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

namespace {

struct Prepared {
  OhlcvSeries series;
  FeatureFrame frame;
  labeling::LabelSeries labels;
  pipeline::PreparedData data;
};

Prepared prepare(const OhlcvSeries& series, const RunConfig& cfg) {
  auto frame = build_feature_frame(series, cfg.indicators);
  auto labels = labeling::label_series(series.closes(), cfg.labels);
  auto data = pipeline::prepare_dataset(series, frame, labels.y, labels.valid_from, cfg);
  return {series, std::move(frame), std::move(labels), std::move(data)};
}

RunConfig small_config(model::Variant v) {
  RunConfig cfg;
  cfg.model = {v, 4, 1, false};
  cfg.train.epochs = 3;
  cfg.train.batch_size = 8;
  cfg.labels.tau = 0.01;
  return cfg;
}

OhlcvSeries perturb_from(const OhlcvSeries& s, std::size_t first) {
  auto bars = s.bars();
  for (std::size_t t = first; t < bars.size(); ++t) {
    bars[t].open *= 1.7;
    bars[t].high *= 1.9;
    bars[t].low *= 1.5;
    bars[t].close *= 1.8;
    bars[t].volume *= 3;
  }
  return OhlcvSeries(std::move(bars), s.bar_interval());
}

}  // namespace

TEST(Dataset, SampleContextsEndAtTheirBar) {
  const auto cfg = small_config(model::Variant::Sequence);
  const auto p = prepare(testkit::random_series(200, 51), cfg);
  const auto& d = p.data;
  EXPECT_EQ(d.first_bar, pipeline::first_sample_bar(p.frame.valid_from(), p.labels.valid_from, 4));
  ASSERT_EQ(d.dataset.size(), 200 - d.first_bar);
  const auto& s = d.dataset[10];
  // The last token holds the 4 log returns ending at the sample's bar.
  for (int k = 0; k < 4; ++k) {
    const auto t = Eigen::Index(s.bar) - 3 + k;
    EXPECT_NEAR(s.tokens.tokens(3, k), std::log(d.prices(t) / d.prices(t - 1)), 1e-15);
  }
  EXPECT_EQ(s.label, p.labels.y[s.bar]);
  EXPECT_EQ(d.splits.test.end, d.dataset.size());
}

TEST(Training, DeterministicPerSeedAndLossesRecorded) {
  const auto cfg = small_config(model::Variant::Sequence);
  const auto p = prepare(testkit::random_series(200, 53), cfg);
  const auto init = model::init_model(cfg.model, 5);
  const auto a = train::train(init, p.data.dataset, p.data.splits, cfg.train);
  const auto b = train::train(init, p.data.dataset, p.data.splits, cfg.train);
  EXPECT_EQ(io::to_json(io::Checkpoint{a.model, {}}).dump(), io::to_json(io::Checkpoint{b.model, {}}).dump());
  EXPECT_EQ(a.train_loss.size(), 3u);
  EXPECT_EQ(a.val_loss, b.val_loss);
  if (a.best_epoch >= 0) {
    const double best = train::dataset_loss(a.model, p.data.dataset, p.data.splits.val, a.positive_weight);
    EXPECT_NEAR(best, a.val_loss[std::size_t(a.best_epoch)], 1e-12);
  }
}

TEST(Training, ReducesTrainingLossOnLearnableData) {
  auto cfg = small_config(model::Variant::Sequence);
  cfg.train.epochs = 15;
  cfg.train.learning_rate = 0.05;
  const auto p = prepare(testkit::random_series(220, 55, 0.015), cfg);
  const auto art = train::train(model::init_model(cfg.model, 3), p.data.dataset, p.data.splits, cfg.train);
  EXPECT_LT(art.train_loss.back(), art.train_loss.front());
}

TEST(Training, EarlyStoppingHonoursPatience) {
  auto cfg = small_config(model::Variant::Sequence);
  cfg.train.epochs = 40;
  cfg.train.patience = 2;
  cfg.train.learning_rate = 0.5;
  const auto p = prepare(testkit::random_series(200, 57), cfg);
  const auto art = train::train(model::init_model(cfg.model, 4), p.data.dataset, p.data.splits, cfg.train);
  ASSERT_LT(art.val_loss.size(), 40u);
  const std::size_t last_best = art.best_epoch < 0 ? 0 : std::size_t(art.best_epoch) + 1;
  EXPECT_EQ(art.val_loss.size() - last_best, 2u);
}

TEST(Leakage, TestPricesNeverReachParametersOrScaler) {
  for (auto variant : {model::Variant::Sequence, model::Variant::Hybrid}) {
    const auto cfg = small_config(variant);
    const auto series = testkit::random_series(200, 59);
    const auto base = prepare(series, cfg);
    const std::size_t first_test_bar = base.data.first_bar + base.data.splits.test.begin;
    const auto shifted = prepare(perturb_from(series, first_test_bar), cfg);
    ASSERT_EQ(base.data.splits.test.begin, shifted.data.splits.test.begin);

    const auto init = model::init_model(cfg.model, 9);
    const auto a = train::train(init, base.data.dataset, base.data.splits, cfg.train);
    const auto b = train::train(init, shifted.data.dataset, shifted.data.splits, cfg.train);
    const auto ja = io::to_json(io::Checkpoint{a.model, base.data.scaler});
    const auto jb = io::to_json(io::Checkpoint{b.model, shifted.data.scaler});
    EXPECT_EQ(std::hash<std::string>{}(ja.dump()), std::hash<std::string>{}(jb.dump()));
    EXPECT_EQ(ja, jb);
    EXPECT_NE(base.data.prices(Eigen::Index(first_test_bar)), shifted.data.prices(Eigen::Index(first_test_bar)));
  }
}

TEST(RepeatRuns, SeedsAreConsecutiveAndParallelMatchesSerial) {
  auto cfg = small_config(model::Variant::Sequence);
  cfg.train.epochs = 2;
  cfg.train.n_repeats = 3;
  cfg.train.seed = 20;
  const auto p = prepare(testkit::random_series(200, 61), cfg);
  const auto factory = [&](std::uint64_t seed) { return model::init_model(cfg.model, seed); };
  const auto evaluate = [&](const train::RunArtifact& run) {
    return pipeline::metrics_of(pipeline::evaluate(run.model, p.data, p.data.splits.test, cfg.backtest));
  };
  const auto par = train::repeat_runs(factory, p.data.dataset, p.data.splits, cfg.train, evaluate, true);
  const auto ser = train::repeat_runs(factory, p.data.dataset, p.data.splits, cfg.train, evaluate, false);
  EXPECT_EQ(par.seeds, (std::vector<std::uint64_t>{20, 21, 22}));
  ASSERT_EQ(par.runs.size(), 3u);
  EXPECT_EQ(par.runs[1].seed, 21u);
  EXPECT_EQ(par.metrics, ser.metrics);
  EXPECT_EQ(par.summary.at("total_return").values.size(), 3u);
}

TEST(Evaluate, BacktestsTheTestBars) {
  const auto cfg = small_config(model::Variant::Sequence);
  const auto p = prepare(testkit::random_series(200, 63), cfg);
  const auto m = model::init_model(cfg.model, 1);
  const auto e = pipeline::evaluate(m, p.data, p.data.splits.test, cfg.backtest);
  ASSERT_EQ(e.bars.size(), p.data.splits.test.size());
  EXPECT_EQ(e.bars.front(), p.data.first_bar + p.data.splits.test.begin);
  EXPECT_EQ(e.bars.back(), 199u);
  EXPECT_EQ(e.report.equity.size(), Eigen::Index(e.bars.size()));
  const auto metrics = pipeline::metrics_of(e);
  EXPECT_EQ(metrics.count("calmar"), 1u);
  EXPECT_GE(e.accuracy, 0);
  EXPECT_LE(e.accuracy, 1);
}

TEST(Bce, AnalyticPoints) {
  EXPECT_NEAR(train::bce_loss(0.5, 0), std::log(2.0), 1e-15);
  EXPECT_NEAR(train::bce_loss(0.5, 1), std::log(2.0), 1e-15);
  EXPECT_NEAR(train::bce_grad(0.5, 1), -2, 1e-15);
  EXPECT_LT(train::bce_loss(1 - 1e-9, 1), 1e-6);
}

namespace {

// Label 1 tokens point along the first basis direction, label 0 along the second.
train::Dataset separable(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-0.2, 0.2);
  train::Dataset d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = int(rng() % 2);
    Eigen::MatrixXd t(2, 4);
    for (Eigen::Index r = 0; r < 2; ++r) {
      for (Eigen::Index k = 0; k < 4; ++k) t(r, k) = noise(rng);
      t(r, y ? 0 : 1) = 1;
    }
    d[i] = {{t, model::TokenOrigin::PriceWindow}, y, i};
  }
  return d;
}

}  // namespace

TEST(Training, ZeroLearningRateIsIdentity) {
  const auto data = separable(60, 1);
  train::TrainConfig cfg;
  cfg.learning_rate = 0;
  cfg.epochs = 4;
  const auto init = model::init_model({model::Variant::Sequence, 4, 2, false}, 2);
  const auto art = train::train(init, data, chronological_split(60), cfg);
  EXPECT_EQ(art.model.query.thetas, init.query.thetas);
  EXPECT_EQ(art.model.head_weights, init.head_weights);
  EXPECT_EQ(art.model.head_bias, init.head_bias);
}

TEST(Training, SeparableDataIsLearned) {
  const auto data = separable(100, 3);
  train::TrainConfig cfg;
  cfg.epochs = 200;
  cfg.patience = 200;
  cfg.learning_rate = 0.05;
  const auto splits = chronological_split(100);
  const auto art = train::train(model::init_model({model::Variant::Sequence, 4, 1, false}, 4), data, splits, cfg);
  std::size_t hits = 0;
  for (std::size_t i = splits.train.begin; i < splits.train.end; ++i)
    hits += int(model::forward(data[i].tokens, art.model) >= 0.5) == data[i].label;
  EXPECT_GE(double(hits) / double(splits.train.size()), 0.95);
}

TEST(Leakage, TruncatingTestRowsChangesNothing) {
  const auto data = separable(80, 5);
  const auto splits = chronological_split(80);
  train::TrainConfig cfg;
  cfg.epochs = 5;
  const auto init = model::init_model({model::Variant::Sequence, 4, 1, false}, 6);
  const auto full = train::train(init, data, splits, cfg);
  const train::Dataset head(data.begin(), data.begin() + std::ptrdiff_t(splits.val.end));
  const auto cut = train::train(init, head, splits, cfg);
  EXPECT_EQ(io::to_json(io::Checkpoint{full.model, {}}), io::to_json(io::Checkpoint{cut.model, {}}));
  EXPECT_EQ(full.val_loss, cut.val_loss);
}

TEST(RepeatRuns, SingleRunHasZeroSd) {
  const auto data = separable(40, 7);
  train::TrainConfig cfg;
  cfg.epochs = 1;
  cfg.n_repeats = 1;
  const auto out = train::repeat_runs([](std::uint64_t s) { return model::init_model({model::Variant::Sequence, 4, 1, false}, s); },
                                      data, chronological_split(40), cfg,
                                      [](const train::RunArtifact& r) { return train::MetricSet{{"loss", r.val_loss.back()}}; });
  EXPECT_EQ(out.runs.size(), 1u);
  EXPECT_EQ(out.summary.at("loss").sd, 0);
}
