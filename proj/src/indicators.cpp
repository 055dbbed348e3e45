#include "qasa/features.hpp"
#include "qasa/indicators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace qasa {

namespace indicators {

void IndicatorConfig::validate() const {
  for (int w : {n_ma, n_bb, n_atr, n_v, n_lr, n_vol, n_rsi, k_m + 1}) {
    if (w < 2) throw std::invalid_argument("indicator windows must be >= 2");
  }
  if (macd.fast < 1 || macd.slow < 1 || macd.signal < 1) throw std::invalid_argument("MACD windows must be >= 1");
  if (!(lambda_ewma > 0 && lambda_ewma < 1)) throw std::invalid_argument("lambda_ewma must lie in (0, 1)");
  if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
  if (!(k_bb > 0)) throw std::invalid_argument("k_bb must be positive");
  for (int lag : lag_set) {
    if (lag < 1) throw std::invalid_argument("lags must be >= 1");
  }
}

AverageTrueRange atr(const OhlcvSeries& series, int n_atr) {
  if (series.size() < 2) throw std::invalid_argument("atr: series too short");
  if (n_atr < 1) throw std::invalid_argument("atr: window must be >= 1");
  const auto n = static_cast<Eigen::Index>(series.size());
  AverageTrueRange out;
  out.true_range.resize(n);
  out.true_range(0) = series[0].high - series[0].low;
  for (Eigen::Index t = 1; t < n; ++t) {
    const auto& b = series[std::size_t(t)];
    const double prev = series[std::size_t(t - 1)].close;
    out.true_range(t) = std::max({b.high - b.low, std::abs(b.high - prev), std::abs(b.low - prev)});
  }
  out.atr = ema(out.true_range, n_atr);
  out.relative = (out.atr.array() / series.closes().array()).matrix();
  return out;
}

Eigen::VectorXd aligned_log_returns(const Eigen::VectorXd& prices) {
  Eigen::VectorXd out(prices.size());
  out(0) = std::numeric_limits<double>::quiet_NaN();
  out.tail(prices.size() - 1) = log_returns(prices);
  return out;
}

Eigen::Index first_defined(const Eigen::VectorXd& column) {
  Eigen::Index i = column.size();
  while (i > 0 && std::isfinite(column(i - 1))) --i;
  return i;
}

}  // namespace indicators

namespace {

/// Places `v` (computed on returns, which start at bar 1) back on the bar grid.
Eigen::VectorXd on_bar_grid(const Eigen::VectorXd& v) {
  Eigen::VectorXd out(v.size() + 1);
  out(0) = std::numeric_limits<double>::quiet_NaN();
  out.tail(v.size()) = v;
  return out;
}

Eigen::VectorXd lagged(const Eigen::VectorXd& x, int lag) {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(x.size(), std::numeric_limits<double>::quiet_NaN());
  if (lag < x.size()) out.tail(x.size() - lag) = x.head(x.size() - lag);
  return out;
}

}  // namespace

void FeatureFrame::add(std::string name, Eigen::VectorXd column) {
  if (names_.empty() && rows_ == 0) rows_ = static_cast<std::size_t>(column.size());
  if (static_cast<std::size_t>(column.size()) != rows_) throw std::invalid_argument("column '" + name + "' has wrong length");
  if (has(name)) throw std::invalid_argument("duplicate column '" + name + "'");
  valid_from_ = std::max(valid_from_, static_cast<std::size_t>(indicators::first_defined(column)));
  names_.push_back(std::move(name));
  columns_.push_back(std::move(column));
}

bool FeatureFrame::has(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const Eigen::VectorXd& FeatureFrame::column(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw std::invalid_argument("missing feature column '" + std::string(name) + "'");
  return columns_[static_cast<std::size_t>(it - names_.begin())];
}

FeatureFrame build_base_frame(const OhlcvSeries& series, const indicators::IndicatorConfig& cfg) {
  using namespace indicators;
  cfg.validate();
  const Eigen::VectorXd p = series.closes();
  const Eigen::VectorXd v = series.volumes();
  const Eigen::VectorXd r = log_returns(p);  // r(i) belongs to bar i+1
  const Eigen::VectorXd v_r = v.tail(v.size() - 1);

  FeatureFrame f(series.size());
  f.add("log_return", on_bar_grid(r));
  f.add("momentum", momentum(p, cfg.k_m));
  f.add("ma_ratio", ma_ratio(p, cfg.n_ma));
  f.add("rolling_vol", on_bar_grid(rolling_volatility(r, cfg.n_vol)));
  f.add("lr_vol", on_bar_grid(rolling_volatility(r, cfg.n_lr)));
  f.add("ewma_vol", on_bar_grid(ewma_volatility(r, cfg.lambda_ewma)));
  f.add("rsi", rsi(p, cfg.n_rsi));
  f.add("macd_hist", macd_histogram(p, cfg.macd.fast, cfg.macd.slow, cfg.macd.signal));
  const auto vol = volume_features(v_r, r, cfg.n_v, cfg.eps);
  f.add("vol_ratio", on_bar_grid(vol.ratio));
  f.add("signed_vol_ratio", on_bar_grid(vol.signed_ratio));
  f.add("amihud", on_bar_grid(amihud(r, v_r, cfg.n_v, cfg.eps)));
  const auto bands = bollinger(p, cfg.n_bb, cfg.k_bb);
  f.add("bb_percent_b", bands.percent_b);
  f.add("bb_z", bands.z);
  const auto range = indicators::atr(series, cfg.n_atr);
  f.add("atr", range.atr);
  f.add("atr_rel", range.relative);
  return f;
}

FeatureFrame augment_lags_interactions(const FeatureFrame& frame, const std::vector<int>& lag_set,
                                       const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  const std::size_t base = frame.cols();
  for (const auto& [i, j] : pairs) {
    if (i >= base || j >= base) throw std::invalid_argument("interaction pair refers to a missing column");
  }
  int max_lag = 0;
  for (int lag : lag_set) {
    if (lag < 1) throw std::invalid_argument("lags must be >= 1");
    max_lag = std::max(max_lag, lag);
  }
  if (frame.valid_from() + static_cast<std::size_t>(max_lag) >= frame.rows() && max_lag > 0) {
    throw std::invalid_argument("lag " + std::to_string(max_lag) + " exceeds usable history");
  }
  FeatureFrame out(frame.rows());
  for (std::size_t c = 0; c < base; ++c) out.add(frame.names()[c], frame.column(c));
  for (std::size_t c = 0; c < base; ++c) {
    for (int lag : lag_set) out.add(frame.names()[c] + "_lag" + std::to_string(lag), lagged(frame.column(c), lag));
  }
  for (const auto& [i, j] : pairs) {
    out.add(frame.names()[i] + "_x_" + frame.names()[j], frame.column(i).cwiseProduct(frame.column(j)));
  }
  return out;
}

FeatureFrame build_feature_frame(const OhlcvSeries& series, const indicators::IndicatorConfig& config) {
  const FeatureFrame base = build_base_frame(series, config);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  auto index_of = [&](const std::string& name) {
    const auto& names = base.names();
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::invalid_argument("interaction refers to unknown column '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
  };
  for (const auto& [a, b] : config.interaction_pairs) pairs.emplace_back(index_of(a), index_of(b));
  FeatureFrame out = augment_lags_interactions(base, config.lag_set, pairs);
  if (out.valid_from() >= out.rows()) throw std::invalid_argument("series too short: no bar has every feature defined");
  return out;
}

void write_feature_csv(const std::filesystem::path& path, const FeatureFrame& frame, const OhlcvSeries& series,
                       const std::vector<int>* labels) {
  if (frame.rows() != series.size()) throw std::invalid_argument("feature frame and series differ in length");
  if (labels && labels->size() != series.size()) throw std::invalid_argument("labels and series differ in length");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "bar_index,timestamp";
  for (const auto& n : frame.names()) out << ',' << n;
  if (labels) out << ",label";
  out << '\n';
  char buf[40];
  for (std::size_t t = frame.valid_from(); t < frame.rows(); ++t) {
    out << t << ',' << series[t].timestamp;
    for (std::size_t c = 0; c < frame.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", frame.column(c)(Eigen::Index(t)));
      out << ',' << buf;
    }
    if (labels) out << ',' << (*labels)[t];
    out << '\n';
  }
}

FeatureTable read_feature_csv(const std::filesystem::path& path, std::size_t n_bars) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": missing header");
  std::vector<std::string> header;
  for (std::size_t start = 0;;) {
    const auto pos = line.find(',', start);
    header.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (!header.empty() && !header.back().empty() && header.back().back() == '\r') header.back().pop_back();
  if (header.size() < 3 || header[0] != "bar_index" || header[1] != "timestamp") {
    throw DataError(path.string() + ": not a feature table");
  }
  const bool has_label = header.back() == "label";
  const std::size_t n_features = header.size() - 2 - (has_label ? 1 : 0);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<Eigen::VectorXd> cols(n_features, Eigen::VectorXd::Constant(Eigen::Index(n_bars), nan));
  std::vector<int> labels(n_bars, 0);

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1)) {
      fields.push_back(rest.substr(0, pos));
    }
    if (!rest.empty() && rest.back() == '\r') rest.remove_suffix(1);
    fields.push_back(rest);
    if (fields.size() != header.size()) throw DataError(path.string() + ": row " + std::to_string(line_no) + " has wrong width");
    std::size_t bar = 0;
    std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), bar);
    if (bar >= n_bars) throw DataError(path.string() + ": bar index beyond series length");
    for (std::size_t c = 0; c < n_features; ++c) {
      const auto f = fields[c + 2];
      double v = nan;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw DataError(path.string() + ": row " + std::to_string(line_no) + " has a bad number");
      }
      cols[c](Eigen::Index(bar)) = v;
    }
    if (has_label) labels[bar] = fields.back() == "1" ? 1 : 0;
  }

  FeatureTable table{FeatureFrame(n_bars), std::nullopt};
  for (std::size_t c = 0; c < n_features; ++c) table.frame.add(header[c + 2], std::move(cols[c]));
  if (has_label) table.labels = std::move(labels);
  return table;
}

}  // namespace qasa
