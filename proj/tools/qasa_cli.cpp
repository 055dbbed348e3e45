// qasa: ingest -> features -> label -> train -> backtest -> report, plus
// selftest and a synthetic fixture generator. Every stage reads and writes
// files under one run directory.

#include "qasa/config.hpp"
#include "qasa/features.hpp"
#include "qasa/labeling.hpp"
#include "qasa/marketdata.hpp"
#include "qasa/pipeline.hpp"
#include "qasa/selftest.hpp"
#include "qasa/serialization.hpp"
#include "qasa/synthetic.hpp"
#include "qasa/trainer.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qasa;

namespace {

class MissingArtifact : public std::runtime_error {
 public:
  MissingArtifact(const fs::path& path, const std::string& producer)
      : std::runtime_error("missing prerequisite " + path.string() + " (run `" + producer + "` first)") {}
};

struct Globals {
  std::string dir;
  std::string config;
};

fs::path run_dir(const Globals& g) {
  if (!g.dir.empty()) return g.dir;
  if (const char* env = std::getenv("QASA_RUN_DIR"); env && *env) return env;
  throw std::invalid_argument("no run directory: pass --dir or set QASA_RUN_DIR");
}

void require(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path)) throw MissingArtifact(path, producer);
}

/// defaults <- DIR/config.json <- --config FILE; command flags are applied by the caller.
RunConfig resolve_config(const fs::path& dir, const Globals& g) {
  RunConfig c;
  if (fs::exists(dir / "config.json")) c = load_config(dir / "config.json", c);
  if (!g.config.empty()) c = load_config(g.config, c);
  return c;
}

OhlcvSeries load_series(const fs::path& dir, const RunConfig& c) {
  require(dir / "series.csv", "ingest");
  return load_ohlcv(dir / "series.csv", {c.data.forward_fill, c.data.bar_interval});
}

backtest::BacktestConfig backtest_config(const RunConfig& c, const OhlcvSeries& series) {
  auto b = c.backtest;
  b.periods_per_year = c.resolved_periods_per_year(series.bar_interval());
  return b;
}

std::string fmt(double v, int precision = 4) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(precision);
  s << v;
  return s.str();
}

json summary_json(const std::map<std::string, train::MetricSummary>& summary) {
  json out = json::object();
  for (const auto& [k, s] : summary) {
    json vals = json::array();
    for (double v : s.values) vals.push_back(std::isfinite(v) ? json(v) : json(nullptr));
    out[k] = {{"mean", std::isfinite(s.mean) ? json(s.mean) : json(nullptr)},
              {"sd", std::isfinite(s.sd) ? json(s.sd) : json(nullptr)},
              {"values", vals}};
  }
  return out;
}

/// Return and MaxDD in percent, Sharpe and Calmar as ratios, each "mean ± sd".
json table_row(const std::string& model, const std::map<std::string, train::MetricSummary>& s) {
  auto cell = [&](const char* key, double scale, int prec) {
    const auto& m = s.at(key);
    return fmt(m.mean * scale, prec) + " ± " + fmt(m.sd * scale, prec);
  };
  return {{"Model", model},
          {"Return", cell("total_return", 100, 2) + "%"},
          {"Sharpe", cell("sharpe", 1, 2)},
          {"MaxDD", cell("max_drawdown", 100, 2) + "%"},
          {"Calmar", cell("calmar", 1, 2)}};
}

std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char ch : s) n += (ch & 0xC0) != 0x80;
  return n;
}

std::string model_label(const std::string& variant) { return variant == "sequence" ? "QASA-Sequence" : "QASA-Hybrid"; }

void print_table(const std::vector<json>& rows) {
  const std::vector<std::string> cols{"Model", "Return", "Sharpe", "MaxDD", "Calmar"};
  std::vector<std::size_t> width;
  for (const auto& c : cols) {
    std::size_t w = c.size();
    for (const auto& r : rows) w = std::max(w, display_width(r[c].get<std::string>()));
    width.push_back(w);
  }
  auto line = [&](auto cell) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      std::string v = cell(i);
      std::cout << (i ? " | " : "") << v << std::string(width[i] - std::min(width[i], display_width(v)), ' ');
    }
    std::cout << '\n';
  };
  line([&](std::size_t i) { return cols[i]; });
  line([&](std::size_t i) { return std::string(width[i], '-'); });
  for (const auto& r : rows) line([&](std::size_t i) { return r[cols[i]].get<std::string>(); });
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string csv;
  std::string out;
  bool forward_fill = false;
  std::int64_t bar_interval = 0;
};

int cmd_ingest(const Globals& g, const IngestArgs& a) {
  const fs::path dir = a.out.empty() ? run_dir(g) : fs::path(a.out);
  RunConfig c;
  if (!g.config.empty()) c = load_config(g.config, c);
  if (a.forward_fill) c.data.forward_fill = true;
  if (a.bar_interval > 0) c.data.bar_interval = a.bar_interval;
  c.validate();
  if (!fs::exists(a.csv)) throw std::invalid_argument("no such file " + a.csv);
  const OhlcvSeries series = load_ohlcv(a.csv, {c.data.forward_fill, c.data.bar_interval});
  c.data.bar_interval = series.bar_interval();
  fs::create_directories(dir);
  write_ohlcv(dir / "series.csv", series);
  io::write_json(dir / "config.json", to_json(c));
  std::cout << "ingested " << series.size() << " bars (interval " << series.bar_interval() << " s) into " << dir.string()
            << '\n';
  return 0;
}

int cmd_features(const Globals& g) {
  const fs::path dir = run_dir(g);
  const RunConfig c = resolve_config(dir, g);
  const OhlcvSeries series = load_series(dir, c);
  const FeatureFrame frame = build_feature_frame(series, c.indicators);
  write_feature_csv(dir / "features.csv", frame, series);
  const auto channels = featuremap::six_scalar_channels(frame);
  io::write_json(dir / "features.json", {{"columns", frame.names()},
                                         {"valid_from", frame.valid_from()},
                                         {"rows", frame.rows() - frame.valid_from()},
                                         {"degenerate_vol_bars", channels.degenerate_vol_bars},
                                         {"config", to_json(c)}});
  std::cout << "wrote " << frame.cols() << " feature columns for bars " << frame.valid_from() << ".." << frame.rows() - 1
            << '\n';
  return 0;
}

struct LabelArgs {
  std::optional<double> tau;
  std::optional<int> ma_window;
  bool two_sided = false;
};

int cmd_label(const Globals& g, const LabelArgs& a) {
  const fs::path dir = run_dir(g);
  RunConfig c = resolve_config(dir, g);
  if (a.tau) c.labels.tau = *a.tau;
  if (a.ma_window) c.labels.ma_window = *a.ma_window;
  if (a.two_sided) c.labels.mode = labeling::LabelMode::TwoSided;
  c.validate();
  const OhlcvSeries series = load_series(dir, c);
  require(dir / "features.csv", "features");
  const FeatureTable table = read_feature_csv(dir / "features.csv", series.size());
  const auto labels = labeling::label_series(series.closes(), c.labels);
  write_feature_csv(dir / "features.csv", table.frame, series, &labels.y);
  io::write_json(dir / "config.json", to_json(c));
  std::size_t pos = 0, n = 0;
  for (std::size_t t = table.frame.valid_from(); t < series.size(); ++t, ++n) pos += labels.y[t];
  std::cout << "labelled " << n << " bars: " << pos << " positive\n";
  return 0;
}

struct Inputs {
  RunConfig config;
  OhlcvSeries series;
  FeatureFrame frame;
  pipeline::PreparedData data;
};

Inputs load_inputs(const fs::path& dir, const RunConfig& c) {
  OhlcvSeries series = load_series(dir, c);
  require(dir / "features.csv", "features");
  FeatureTable table = read_feature_csv(dir / "features.csv", series.size());
  if (!table.labels) throw MissingArtifact(dir / "features.csv [label column]", "label");
  auto data = pipeline::prepare_dataset(series, table.frame, *table.labels, std::size_t(c.labels.ma_window - 1), c);
  return {c, std::move(series), std::move(table.frame), std::move(data)};
}

struct TrainArgs {
  std::string variant;
  std::optional<std::uint64_t> seed;
  std::optional<int> repeats;
  std::optional<int> epochs;
  std::optional<int> window;
  std::optional<int> layers;
  bool raw_prices = false;
  bool serial = false;
};

void write_losses(const fs::path& path, const train::RunArtifact& run) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "epoch,train_loss,val_loss\n";
  char buf[128];
  for (std::size_t e = 0; e < run.train_loss.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", e, run.train_loss[e], run.val_loss[e]);
    out << buf;
  }
}

int cmd_train(const Globals& g, const TrainArgs& a) {
  const fs::path dir = run_dir(g);
  RunConfig c = resolve_config(dir, g);
  if (!a.variant.empty()) c.model.variant = model::variant_from_string(a.variant);
  if (a.seed) c.train.seed = *a.seed;
  if (a.repeats) c.train.n_repeats = *a.repeats;
  if (a.epochs) c.train.epochs = *a.epochs;
  if (a.window) c.model.window = *a.window;
  if (a.layers) c.model.layers = *a.layers;
  if (a.raw_prices) c.model.raw_price_tokens = true;
  c.validate();

  const Inputs in = load_inputs(dir, c);
  const auto bt = backtest_config(c, in.series);
  const auto& data = in.data;
  const auto spec = c.model;
  const auto outcome = train::repeat_runs(
      [&](std::uint64_t seed) { return model::init_model(spec, seed); }, data.dataset, data.splits, c.train,
      [&](const train::RunArtifact& run) {
        return pipeline::metrics_of(pipeline::evaluate(run.model, data, data.splits.test, bt));
      },
      !a.serial);

  const std::string name = model::to_string(c.model.variant);
  const fs::path vdir = dir / "train" / name;
  fs::create_directories(vdir);
  json runs = json::array();
  for (std::size_t r = 0; r < outcome.runs.size(); ++r) {
    const auto& run = outcome.runs[r];
    const fs::path rdir = vdir / ("run_" + std::to_string(run.seed));
    fs::create_directories(rdir);
    RunConfig rc = c;
    rc.train.seed = run.seed;
    json ck = io::to_json(io::Checkpoint{run.model, data.scaler});
    ck["seed"] = run.seed;
    ck["best_epoch"] = run.best_epoch;
    ck["epochs_run"] = run.train_loss.size();
    ck["positive_weight"] = run.positive_weight;
    ck["config"] = to_json(rc);
    io::write_json(rdir / "checkpoint.json", ck);
    write_losses(rdir / "losses.csv", run);
    json m = json::object();
    for (const auto& [k, v] : outcome.metrics[r]) m[k] = std::isfinite(v) ? json(v) : json(nullptr);
    runs.push_back({{"seed", run.seed}, {"best_epoch", run.best_epoch}, {"epochs_run", run.train_loss.size()}, {"test", m}});
  }
  const json row = table_row(model_label(name), outcome.summary);
  io::write_json(vdir / "summary.json", {{"variant", name},
                                         {"seeds", outcome.seeds},
                                         {"samples", {{"first_bar", data.first_bar},
                                                      {"train", data.splits.train.size()},
                                                      {"val", data.splits.val.size()},
                                                      {"test", data.splits.test.size()}}},
                                         {"runs", runs},
                                         {"summary", summary_json(outcome.summary)},
                                         {"table", row},
                                         {"config", to_json(c)}});
  print_table({row});
  std::cout << "mean test accuracy " << fmt(outcome.summary.at("accuracy").mean) << " over " << outcome.runs.size()
            << " runs; artifacts in " << vdir.string() << '\n';
  return 0;
}

std::vector<std::string> trained_variants(const fs::path& dir, const std::string& only) {
  std::vector<std::string> out;
  for (const std::string v : {"sequence", "hybrid"}) {
    if (!only.empty() && only != v) continue;
    if (fs::exists(dir / "train" / v / "summary.json")) out.push_back(v);
  }
  if (out.empty()) throw MissingArtifact(dir / "train" / (only.empty() ? "<variant>" : only) / "summary.json", "train");
  return out;
}

std::vector<fs::path> run_dirs(const fs::path& vdir) {
  const json summary = io::read_json(vdir / "summary.json");
  std::vector<fs::path> out;
  for (const auto& seed : summary.at("seeds")) out.push_back(vdir / ("run_" + std::to_string(seed.get<std::uint64_t>())));
  return out;
}

struct BacktestArgs {
  std::string variant;
  std::optional<double> fee_bps;
  std::optional<int> cooldown;
  std::string mode;
  std::optional<int> shots;
  std::uint64_t shot_seed = 0;
};

int cmd_backtest(const Globals& g, const BacktestArgs& a) {
  const fs::path dir = run_dir(g);
  for (const auto& variant : trained_variants(dir, a.variant)) {
    const fs::path vdir = dir / "train" / variant;
    std::map<std::string, std::vector<double>> columns;
    for (const auto& rdir : run_dirs(vdir)) {
      require(rdir / "checkpoint.json", "train");
      const json ck = io::read_json(rdir / "checkpoint.json");
      RunConfig c = merge_config(RunConfig{}, ck.at("config"));
      if (!g.config.empty()) c = load_config(g.config, c);
      if (a.fee_bps) c.backtest.fee_bps = *a.fee_bps;
      if (a.cooldown) c.backtest.cooldown_bars = *a.cooldown;
      if (!a.mode.empty()) c.backtest.mode = backtest::strategy_from_string(a.mode);
      if (a.shots) c.shots = *a.shots;
      c.validate();

      const io::Checkpoint checkpoint = io::checkpoint_from_json(ck);
      Inputs in = load_inputs(dir, c);
      if (checkpoint.scaler) pipeline::rescale_hybrid(in.data, in.frame, *checkpoint.scaler, c.model.window);
      const auto bt = backtest_config(c, in.series);
      const auto eval = pipeline::evaluate(checkpoint.model, in.data, in.data.splits.test, bt, c.shots, a.shot_seed);

      json rep = io::to_json(eval.report);
      rep["accuracy"] = eval.accuracy;
      rep["seed"] = ck.at("seed");
      rep["test_bars"] = {eval.bars.front(), eval.bars.back()};
      rep["periods_per_year"] = bt.periods_per_year;
      rep["calmar_convention"] = "((1 + total_return)^(periods_per_year / (test bars - 1)) - 1) / |max_drawdown|";
      rep["shots"] = c.shots;
      rep["config"] = to_json(c);
      io::write_json(rdir / "report.json", rep);

      std::ofstream eq(rdir / "equity.csv");
      eq << "bar_index,timestamp,equity\n";
      char buf[128];
      for (std::size_t i = 0; i < eval.bars.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%lld,%.17g\n", eval.bars[i], static_cast<long long>(in.data.timestamps[eval.bars[i]]),
                      eval.report.equity(Eigen::Index(i)));
        eq << buf;
      }
      for (const auto& [k, v] : pipeline::metrics_of(eval)) columns[k].push_back(v);
    }
    std::map<std::string, train::MetricSummary> summary;
    for (const auto& [k, v] : columns) summary[k] = train::summarize(v);
    print_table({table_row(model_label(variant), summary)});
  }
  return 0;
}

int cmd_report(const Globals& g) {
  const fs::path dir = run_dir(g);
  std::vector<json> rows;
  json models = json::array();
  json config;
  for (const auto& variant : trained_variants(dir, "")) {
    const fs::path vdir = dir / "train" / variant;
    std::map<std::string, std::vector<double>> columns;
    json per_run = json::array();
    for (const auto& rdir : run_dirs(vdir)) {
      require(rdir / "report.json", "backtest");
      const json rep = io::read_json(rdir / "report.json");
      auto num = [](const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); };
      columns["total_return"].push_back(num(rep.at("total_return")));
      columns["sharpe"].push_back(num(rep.at("sharpe").at("value")));
      columns["max_drawdown"].push_back(num(rep.at("max_drawdown")));
      columns["calmar"].push_back(num(rep.at("calmar").at("value")));
      columns["accuracy"].push_back(num(rep.at("accuracy")));
      per_run.push_back({{"seed", rep.at("seed")},
                         {"total_return", rep.at("total_return")},
                         {"sharpe", rep.at("sharpe")},
                         {"max_drawdown", rep.at("max_drawdown")},
                         {"calmar", rep.at("calmar")},
                         {"accuracy", rep.at("accuracy")}});
      if (config.is_null()) config = rep.at("config");
    }
    std::map<std::string, train::MetricSummary> summary;
    for (const auto& [k, v] : columns) summary[k] = train::summarize(v);
    const std::string label = model_label(variant);
    rows.push_back(table_row(label, summary));
    models.push_back({{"model", label}, {"runs", per_run}, {"summary", summary_json(summary)}, {"table", rows.back()}});
  }
  io::write_json(dir / "report.json", {{"columns", {"Model", "Return", "Sharpe", "MaxDD", "Calmar"}},
                                       {"rows", rows},
                                       {"models", models},
                                       {"config", config}});
  print_table(rows);
  return 0;
}

int cmd_selftest(const std::string& fault) {
  selftest::SelftestOptions opts;
  if (fault == "ry-sign") {
    opts.inject_ry_sign_flip = true;
  } else if (!fault.empty()) {
    throw std::invalid_argument("unknown fault '" + fault + "'");
  }
  bool ok = true;
  for (const auto& r : selftest::run_selftest(opts)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ", " << fmt(r.seconds, 2) << " s)\n";
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

struct SynthArgs {
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> bars;
};

int cmd_synth(const SynthArgs& a) {
  synthetic::SyntheticConfig sc;
  if (a.seed) sc.seed = *a.seed;
  if (a.bars) sc.bars = *a.bars;
  const auto fx = synthetic::generate_regime_fixture(sc);
  write_ohlcv(a.out, fx.series);
  std::cout << "wrote " << sc.bars << " bars to " << a.out << "; oracle accuracy " << fmt(fx.oracle_accuracy) << ", "
            << fx.labels.positives() << " positive labels\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum self-attention rebalancing pipeline"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--dir", g.dir, "Run directory (default: $QASA_RUN_DIR)");
  app.add_option("--config", g.config, "JSON config overlay");

  IngestArgs ia;
  auto* ingest = app.add_subcommand("ingest", "Validate an OHLCV CSV and start a run directory");
  ingest->add_option("--csv", ia.csv, "Input CSV")->required();
  ingest->add_option("--out", ia.out, "Run directory to create");
  ingest->add_flag("--forward-fill", ia.forward_fill, "Fill missing bars with the last close and zero volume");
  ingest->add_option("--bar-interval", ia.bar_interval, "Bar length in seconds (default: smallest spacing)");

  auto* features = app.add_subcommand("features", "Compute indicator features");

  LabelArgs la;
  auto* label = app.add_subcommand("label", "Append rebalance labels to the feature table");
  label->add_option("--tau", la.tau, "MA deviation threshold");
  label->add_option("--ma-window", la.ma_window, "Moving-average window");
  label->add_flag("--two-sided", la.two_sided, "Label |deviation| > tau");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train repeated runs and summarize test metrics");
  train->add_option("--variant", ta.variant, "sequence or hybrid")->check(CLI::IsMember({"sequence", "hybrid"}));
  train->add_option("--seed", ta.seed, "Base seed");
  train->add_option("--repeats", ta.repeats, "Number of runs (seeds base .. base+K-1)");
  train->add_option("--epochs", ta.epochs, "Maximum epochs");
  train->add_option("--window", ta.window, "Context window W");
  train->add_option("--layers", ta.layers, "Ansatz layers L");
  train->add_flag("--raw-prices", ta.raw_prices, "Sequence tokens from prices instead of log-returns");
  train->add_flag("--serial", ta.serial, "Run repeats one after another");

  BacktestArgs ba;
  auto* bt = app.add_subcommand("backtest", "Backtest every trained run on the test split");
  bt->add_option("--variant", ba.variant, "Restrict to one variant")->check(CLI::IsMember({"sequence", "hybrid"}));
  bt->add_option("--fee-bps", ba.fee_bps, "Fee on rebalanced notional, basis points");
  bt->add_option("--cooldown", ba.cooldown, "Minimum bars between rebalances");
  bt->add_option("--mode", ba.mode, "lp or switch")->check(CLI::IsMember({"lp", "switch"}));
  bt->add_option("--shots", ba.shots, "Estimate expectations from this many shots (0: exact)");
  bt->add_option("--shot-seed", ba.shot_seed, "Seed for shot sampling");

  auto* report = app.add_subcommand("report", "Aggregate backtests into one table");

  std::string fault;
  auto* st = app.add_subcommand("selftest", "Run oracle suites");
  st->add_option("--inject-fault", fault)->group("");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Write the synthetic regime-switching fixture");
  synth->add_option("--out", sa.out, "Output CSV")->required();
  synth->add_option("--seed", sa.seed, "Generator seed");
  synth->add_option("--bars", sa.bars, "Number of bars");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*ingest) return cmd_ingest(g, ia);
    if (*features) return cmd_features(g);
    if (*label) return cmd_label(g, la);
    if (*train) return cmd_train(g, ta);
    if (*bt) return cmd_backtest(g, ba);
    if (*report) return cmd_report(g);
    if (*st) return cmd_selftest(fault);
    if (*synth) return cmd_synth(sa);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
