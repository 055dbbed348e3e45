#include "qasa/config.hpp"
#include "qasa/serialization.hpp"
#include "qasa/synthetic.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace qasa;
using nlohmann::json;

TEST(Config, RoundTripsThroughJson) {
  RunConfig c;
  c.model = {model::Variant::Hybrid, 6, 3, false};
  c.labels.tau = 0.03;
  c.labels.mode = labeling::LabelMode::TwoSided;
  c.train.seed = 99;
  c.backtest.fee_bps = 12.5;
  c.backtest.mode = backtest::StrategyMode::SwitchFlatLong;
  c.indicators.lag_set = {1, 4};
  c.data.bar_interval = 3600;
  c.periods_per_year = 365;
  c.shots = 256;
  const auto back = merge_config({}, to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.model.variant, model::Variant::Hybrid);
  EXPECT_EQ(back.labels.mode, labeling::LabelMode::TwoSided);
  EXPECT_EQ(back.shots, 256);
}

TEST(Config, PartialOverlayKeepsOtherValues) {
  RunConfig base;
  base.train.epochs = 33;
  const auto c = merge_config(base, json::parse(R"({"train": {"seed": 3}, "labels": {"tau": 0.05}})"));
  EXPECT_EQ(c.train.seed, 3u);
  EXPECT_EQ(c.train.epochs, 33);
  EXPECT_DOUBLE_EQ(c.labels.tau, 0.05);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  try {
    merge_config({}, json::parse(R"({"train": {"sed": 3}})"));
    FAIL() << "unknown key accepted";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("train.sed"), std::string::npos);
  }
  EXPECT_THROW(merge_config({}, json::parse(R"({"optimizer": {}})")), std::invalid_argument);
  EXPECT_THROW(merge_config({}, json::parse(R"({"labels": {"tau": -1}})")), std::invalid_argument);
  EXPECT_THROW(merge_config({}, json::parse(R"({"data": {"split": {"train": 0.9}}})")), std::invalid_argument);
}

TEST(Config, PeriodsPerYearFollowsBarInterval) {
  RunConfig c;
  EXPECT_DOUBLE_EQ(c.resolved_periods_per_year(86400), 252);
  EXPECT_DOUBLE_EQ(c.resolved_periods_per_year(3600), 252 * 24);
  c.periods_per_year = 365;
  EXPECT_DOUBLE_EQ(c.resolved_periods_per_year(3600), 365);
}

TEST(Config, LoadsFromFile) {
  testkit::TempDir dir("cfg");
  std::ofstream(dir.path() / "c.json") << R"({"model": {"window": 4}})";
  EXPECT_EQ(load_config(dir.path() / "c.json").model.window, 4);
  EXPECT_ANY_THROW(load_config(dir.path() / "missing.json"));
}

TEST(Serialization, VqcParamsRoundTrip) {
  const auto p = vqc::init_params(3, 2, 17, vqc::Encoding::Angle);
  const auto j = io::to_json(p);
  EXPECT_EQ(j["thetas"].size(), 6u);
  EXPECT_EQ(j["thetas"][3].get<double>(), p.thetas(1, 0));
  const auto back = io::vqc_from_json(j);
  EXPECT_EQ(back.thetas, p.thetas);
  EXPECT_EQ(back.encoding, p.encoding);
  EXPECT_EQ(back.seed, 17u);
}

TEST(Serialization, CheckpointRoundTripIsExact) {
  const auto m = model::init_model({model::Variant::Hybrid, 5, 2, false}, 8);
  std::array<featuremap::ChannelBounds, featuremap::kChannels> b{};
  for (int c = 0; c < featuremap::kChannels; ++c) b[std::size_t(c)] = {-0.1 * c, 0.3 + c};
  const io::Checkpoint ck{m, featuremap::MinMaxScaler(b)};
  testkit::TempDir dir("ck");
  io::write_json(dir.path() / "ck.json", io::to_json(ck));
  const auto back = io::checkpoint_from_json(io::read_json(dir.path() / "ck.json"));
  EXPECT_EQ(back.model.query.thetas, m.query.thetas);
  EXPECT_EQ(back.model.value.thetas, m.value.thetas);
  EXPECT_EQ(back.model.head_weights, m.head_weights);
  EXPECT_EQ(back.model.window, 5);
  ASSERT_TRUE(back.scaler.has_value());
  EXPECT_EQ(back.scaler->bounds()[3].b, 3.3);
  EXPECT_EQ(io::to_json(back), io::to_json(ck));
}

TEST(Serialization, HybridCheckpointNeedsScaler) {
  const auto m = model::init_model({model::Variant::Hybrid, 5, 1, false}, 8);
  auto j = io::to_json(io::Checkpoint{m, std::nullopt});
  EXPECT_ANY_THROW(io::checkpoint_from_json(j));
}

TEST(Serialization, ReportWritesNonFiniteAsNull) {
  backtest::BacktestReport r;
  r.equity = Eigen::VectorXd::Ones(3);
  r.calmar = {std::numeric_limits<double>::infinity(), true};
  r.sharpe = {0, true};
  r.trades.push_back({1, 0.25});
  const auto j = io::to_json(r);
  EXPECT_TRUE(j["calmar"]["value"].is_null());
  EXPECT_TRUE(j["calmar"]["degenerate"].get<bool>());
  EXPECT_EQ(j["n_trades"].get<int>(), 1);
  EXPECT_NO_THROW((void)j.dump());
}

TEST(Synthetic, DeterministicAndLearnableByConstruction) {
  const auto a = synthetic::generate_regime_fixture();
  const auto b = synthetic::generate_regime_fixture();
  ASSERT_EQ(a.series.size(), 300u);
  EXPECT_EQ(a.series.closes(), b.series.closes());
  EXPECT_GE(a.oracle_accuracy, 0.85);
  EXPECT_GT(a.labels.positives(), 20u);
  EXPECT_EQ(a.labels.y, labeling::label_series(a.series.closes(), {}).y);
  synthetic::SyntheticConfig other;
  other.seed = 3;
  EXPECT_NE(synthetic::generate_regime_fixture(other).series.closes(), a.series.closes());
}

TEST(Synthetic, BundledFixtureMatchesGenerator) {
  const auto bundled = load_ohlcv(QASA_DATA_DIR "/synthetic_300.csv");
  const auto gen = synthetic::generate_regime_fixture();
  ASSERT_EQ(bundled.size(), gen.series.size());
  for (std::size_t t = 0; t < bundled.size(); ++t) {
    EXPECT_EQ(bundled[t].timestamp, gen.series[t].timestamp);
    EXPECT_NEAR(bundled[t].close, gen.series[t].close, 1e-9 * gen.series[t].close);
  }
}
