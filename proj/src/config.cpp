#include "qasa/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <stdexcept>
#include <string>

namespace qasa {

using nlohmann::json;

namespace {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void allow_only(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError("config section '" + where + "' must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, _] : j.items()) {
    if (!allowed.count(k)) throw ConfigError("unknown config key '" + where + "." + k + "'");
  }
}

template <typename T>
void take(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + where + "." + key + "' has the wrong type");
  }
}

std::string label_mode_name(labeling::LabelMode m) { return m == labeling::LabelMode::UpperOnly ? "upper-only" : "two-sided"; }

labeling::LabelMode label_mode_from(const std::string& s) {
  if (s == "upper-only") return labeling::LabelMode::UpperOnly;
  if (s == "two-sided") return labeling::LabelMode::TwoSided;
  throw ConfigError("unknown label mode '" + s + "'");
}

}  // namespace

void RunConfig::validate() const {
  indicators.validate();
  labels.validate();
  train.validate();
  backtest.validate();
  if (model.window < 1 || model.layers < 1) throw std::invalid_argument("model window and layers must be >= 1");
  if (shots < 0) throw std::invalid_argument("shots must be >= 0");
  if (periods_per_year && !(*periods_per_year > 0)) throw std::invalid_argument("periods_per_year must be positive");
  if (data.bar_interval && *data.bar_interval <= 0) throw std::invalid_argument("bar interval must be positive");
  const auto& s = data.split;
  if (s.train <= 0 || s.val <= 0 || s.test <= 0 || std::abs(s.train + s.val + s.test - 1) > 1e-9) {
    throw std::invalid_argument("split fractions must be positive and sum to 1");
  }
}

double RunConfig::resolved_periods_per_year(std::int64_t bar_interval_seconds) const {
  if (periods_per_year) return *periods_per_year;
  return 252.0 * 86400.0 / double(bar_interval_seconds);
}

json to_json(const RunConfig& c) {
  json pairs = json::array();
  for (const auto& [a, b] : c.indicators.interaction_pairs) pairs.push_back({a, b});
  return {
      {"data",
       {{"forward_fill", c.data.forward_fill},
        {"bar_interval_seconds", c.data.bar_interval ? json(*c.data.bar_interval) : json(nullptr)},
        {"split", {{"train", c.data.split.train}, {"val", c.data.split.val}, {"test", c.data.split.test}}}}},
      {"indicators",
       {{"n_ma", c.indicators.n_ma},
        {"k_m", c.indicators.k_m},
        {"n_bb", c.indicators.n_bb},
        {"k_bb", c.indicators.k_bb},
        {"n_atr", c.indicators.n_atr},
        {"n_v", c.indicators.n_v},
        {"n_lr", c.indicators.n_lr},
        {"n_vol", c.indicators.n_vol},
        {"lambda_ewma", c.indicators.lambda_ewma},
        {"n_rsi", c.indicators.n_rsi},
        {"macd", {{"fast", c.indicators.macd.fast}, {"slow", c.indicators.macd.slow}, {"signal", c.indicators.macd.signal}}},
        {"eps", c.indicators.eps},
        {"lag_set", c.indicators.lag_set},
        {"interaction_pairs", pairs}}},
      {"labels", {{"ma_window", c.labels.ma_window}, {"tau", c.labels.tau}, {"mode", label_mode_name(c.labels.mode)}}},
      {"model",
       {{"variant", model::to_string(c.model.variant)},
        {"window", c.model.window},
        {"layers", c.model.layers},
        {"raw_price_tokens", c.model.raw_price_tokens}}},
      {"train",
       {{"epochs", c.train.epochs},
        {"learning_rate", c.train.learning_rate},
        {"batch_size", c.train.batch_size},
        {"seed", c.train.seed},
        {"n_repeats", c.train.n_repeats},
        {"patience", c.train.patience},
        {"beta1", c.train.beta1},
        {"beta2", c.train.beta2},
        {"adam_eps", c.train.adam_eps},
        {"class_weighting", c.train.class_weighting}}},
      {"backtest",
       {{"fee_bps", c.backtest.fee_bps},
        {"cooldown_bars", c.backtest.cooldown_bars},
        {"decision_threshold", c.backtest.decision_threshold},
        {"initial_value", c.backtest.initial_value},
        {"periods_per_year", c.periods_per_year ? json(*c.periods_per_year) : json(nullptr)},
        {"mode", backtest::to_string(c.backtest.mode)},
        {"shots", c.shots}}},
  };
}

RunConfig merge_config(const RunConfig& base, const json& j) {
  RunConfig c = base;
  allow_only(j, "<root>", {"data", "indicators", "labels", "model", "train", "backtest"});

  if (j.contains("data")) {
    const auto& d = j["data"];
    allow_only(d, "data", {"forward_fill", "bar_interval_seconds", "split"});
    take(d, "forward_fill", c.data.forward_fill, "data");
    if (d.contains("bar_interval_seconds")) {
      c.data.bar_interval = d["bar_interval_seconds"].is_null() ? std::nullopt
                                                                 : std::optional<std::int64_t>(d["bar_interval_seconds"].get<std::int64_t>());
    }
    if (d.contains("split")) {
      const auto& s = d["split"];
      allow_only(s, "data.split", {"train", "val", "test"});
      take(s, "train", c.data.split.train, "data.split");
      take(s, "val", c.data.split.val, "data.split");
      take(s, "test", c.data.split.test, "data.split");
    }
  }
  if (j.contains("indicators")) {
    const auto& s = j["indicators"];
    auto& i = c.indicators;
    allow_only(s, "indicators", {"n_ma", "k_m", "n_bb", "k_bb", "n_atr", "n_v", "n_lr", "n_vol", "lambda_ewma", "n_rsi", "macd",
                                 "eps", "lag_set", "interaction_pairs"});
    take(s, "n_ma", i.n_ma, "indicators");
    take(s, "k_m", i.k_m, "indicators");
    take(s, "n_bb", i.n_bb, "indicators");
    take(s, "k_bb", i.k_bb, "indicators");
    take(s, "n_atr", i.n_atr, "indicators");
    take(s, "n_v", i.n_v, "indicators");
    take(s, "n_lr", i.n_lr, "indicators");
    take(s, "n_vol", i.n_vol, "indicators");
    take(s, "lambda_ewma", i.lambda_ewma, "indicators");
    take(s, "n_rsi", i.n_rsi, "indicators");
    take(s, "eps", i.eps, "indicators");
    take(s, "lag_set", i.lag_set, "indicators");
    if (s.contains("macd")) {
      allow_only(s["macd"], "indicators.macd", {"fast", "slow", "signal"});
      take(s["macd"], "fast", i.macd.fast, "indicators.macd");
      take(s["macd"], "slow", i.macd.slow, "indicators.macd");
      take(s["macd"], "signal", i.macd.signal, "indicators.macd");
    }
    if (s.contains("interaction_pairs")) {
      i.interaction_pairs.clear();
      for (const auto& p : s["interaction_pairs"]) {
        if (!p.is_array() || p.size() != 2) throw ConfigError("interaction pairs must be [name, name]");
        i.interaction_pairs.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
      }
    }
  }
  if (j.contains("labels")) {
    const auto& s = j["labels"];
    allow_only(s, "labels", {"ma_window", "tau", "mode"});
    take(s, "ma_window", c.labels.ma_window, "labels");
    take(s, "tau", c.labels.tau, "labels");
    if (s.contains("mode")) c.labels.mode = label_mode_from(s["mode"].get<std::string>());
  }
  if (j.contains("model")) {
    const auto& s = j["model"];
    allow_only(s, "model", {"variant", "window", "layers", "raw_price_tokens"});
    if (s.contains("variant")) c.model.variant = model::variant_from_string(s["variant"].get<std::string>());
    take(s, "window", c.model.window, "model");
    take(s, "layers", c.model.layers, "model");
    take(s, "raw_price_tokens", c.model.raw_price_tokens, "model");
  }
  if (j.contains("train")) {
    const auto& s = j["train"];
    auto& t = c.train;
    allow_only(s, "train", {"epochs", "learning_rate", "batch_size", "seed", "n_repeats", "patience", "beta1", "beta2",
                            "adam_eps", "class_weighting"});
    take(s, "epochs", t.epochs, "train");
    take(s, "learning_rate", t.learning_rate, "train");
    take(s, "batch_size", t.batch_size, "train");
    take(s, "seed", t.seed, "train");
    take(s, "n_repeats", t.n_repeats, "train");
    take(s, "patience", t.patience, "train");
    take(s, "beta1", t.beta1, "train");
    take(s, "beta2", t.beta2, "train");
    take(s, "adam_eps", t.adam_eps, "train");
    take(s, "class_weighting", t.class_weighting, "train");
  }
  if (j.contains("backtest")) {
    const auto& s = j["backtest"];
    auto& b = c.backtest;
    allow_only(s, "backtest", {"fee_bps", "cooldown_bars", "decision_threshold", "initial_value", "periods_per_year", "mode", "shots"});
    take(s, "fee_bps", b.fee_bps, "backtest");
    take(s, "cooldown_bars", b.cooldown_bars, "backtest");
    take(s, "decision_threshold", b.decision_threshold, "backtest");
    take(s, "initial_value", b.initial_value, "backtest");
    if (s.contains("periods_per_year")) {
      c.periods_per_year = s["periods_per_year"].is_null() ? std::nullopt : std::optional<double>(s["periods_per_year"].get<double>());
    }
    if (s.contains("mode")) b.mode = backtest::strategy_from_string(s["mode"].get<std::string>());
    take(s, "shots", c.shots, "backtest");
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return merge_config(base, j);
}

}  // namespace qasa
