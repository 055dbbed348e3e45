#include "qasa/marketdata.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qasa {

namespace {

constexpr const char* kHeader = "timestamp,open,high,low,close,volume";

std::string row_tag(std::size_t line) { return "row " + std::to_string(line) + ": "; }

void validate_bar(const OhlcvBar& b, const std::string& where) {
  for (double v : {b.open, b.high, b.low, b.close}) {
    if (!std::isfinite(v) || v <= 0) throw DataError(where + "prices must be finite and strictly positive");
  }
  if (!std::isfinite(b.volume) || b.volume < 0) throw DataError(where + "volume must be finite and non-negative");
  if (b.low > b.high) throw DataError(where + "low > high");
  if (b.low > std::min(b.open, b.close)) throw DataError(where + "low above open/close");
  if (b.high < std::max(b.open, b.close)) throw DataError(where + "high below open/close");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view field, const std::string& where) {
  field = trim(field);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw DataError(where + "cannot parse number '" + std::string(field) + "'");
  }
  return v;
}

std::int64_t parse_epoch(std::string_view field, const std::string& where) {
  field = trim(field);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw DataError(where + "cannot parse epoch timestamp '" + std::string(field) + "'");
  }
  return v;
}

int parse_fixed(std::string_view s, std::size_t pos, std::size_t len) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, v);
  if (ec != std::errc() || ptr != s.data() + pos + len) throw DataError("bad ISO-8601 field in '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::int64_t parse_iso8601(const std::string& text) {
  using namespace std::chrono;
  std::string_view s = trim(text);
  if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
  if (s.size() != 10 && s.size() != 19) throw DataError("unsupported ISO-8601 timestamp '" + text + "'");
  if (s[4] != '-' || s[7] != '-') throw DataError("unsupported ISO-8601 timestamp '" + text + "'");
  const year_month_day ymd{year{parse_fixed(s, 0, 4)}, month{static_cast<unsigned>(parse_fixed(s, 5, 2))},
                           day{static_cast<unsigned>(parse_fixed(s, 8, 2))}};
  if (!ymd.ok()) throw DataError("invalid calendar date '" + text + "'");
  std::int64_t secs = duration_cast<seconds>(sys_days{ymd}.time_since_epoch()).count();
  if (s.size() == 19) {
    if ((s[10] != 'T' && s[10] != ' ') || s[13] != ':' || s[16] != ':') {
      throw DataError("unsupported ISO-8601 timestamp '" + text + "'");
    }
    const int hh = parse_fixed(s, 11, 2), mm = parse_fixed(s, 14, 2), ss = parse_fixed(s, 17, 2);
    if (hh > 23 || mm > 59 || ss > 59) throw DataError("invalid time of day '" + text + "'");
    secs += hh * 3600 + mm * 60 + ss;
  }
  return secs;
}

std::string format_iso8601(std::int64_t epoch_seconds) {
  using namespace std::chrono;
  const sys_seconds tp{seconds{epoch_seconds}};
  const auto day_point = floor<days>(tp);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{tp - day_point};
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long long>(hms.hours().count()), static_cast<long long>(hms.minutes().count()),
                static_cast<long long>(hms.seconds().count()));
  return buf;
}

OhlcvSeries::OhlcvSeries(std::vector<OhlcvBar> bars, std::int64_t bar_interval_seconds)
    : bars_(std::move(bars)), interval_(bar_interval_seconds) {
  if (bars_.empty()) throw DataError("empty series");
  if (interval_ <= 0) throw DataError("bar interval must be positive");
  for (std::size_t i = 0; i < bars_.size(); ++i) {
    validate_bar(bars_[i], "bar " + std::to_string(i) + ": ");
    if (i > 0) {
      const std::int64_t gap = bars_[i].timestamp - bars_[i - 1].timestamp;
      if (gap <= 0) throw DataError("bar " + std::to_string(i) + ": timestamps must be strictly increasing");
      if (gap != interval_) {
        throw DataError("bar " + std::to_string(i) + ": spacing " + std::to_string(gap) + "s differs from bar interval " +
                        std::to_string(interval_) + "s");
      }
    }
  }
}

#define QASA_COLUMN(name, field)                                                   \
  Eigen::VectorXd OhlcvSeries::name() const {                                      \
    Eigen::VectorXd out(static_cast<Eigen::Index>(bars_.size()));                  \
    for (std::size_t i = 0; i < bars_.size(); ++i) out(Eigen::Index(i)) = bars_[i].field; \
    return out;                                                                    \
  }
QASA_COLUMN(opens, open)
QASA_COLUMN(highs, high)
QASA_COLUMN(lows, low)
QASA_COLUMN(closes, close)
QASA_COLUMN(volumes, volume)
#undef QASA_COLUMN

OhlcvSeries OhlcvSeries::slice(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > bars_.size()) throw std::out_of_range("series slice out of range");
  return OhlcvSeries(std::vector<OhlcvBar>(bars_.begin() + std::ptrdiff_t(begin), bars_.begin() + std::ptrdiff_t(end)),
                     interval_);
}

OhlcvSeries load_ohlcv(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": missing header");
  if (trim(line) != kHeader) throw DataError(path.string() + ": header must be '" + std::string(kHeader) + "'");

  enum class Stamp { Unknown, Epoch, Iso } stamp = Stamp::Unknown;
  std::vector<std::pair<std::size_t, OhlcvBar>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = row_tag(line_no);
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1)) {
      fields.push_back(rest.substr(0, pos));
    }
    fields.push_back(rest);
    if (fields.size() != 6) throw DataError(where + "expected 6 fields, got " + std::to_string(fields.size()));

    const std::string_view ts = trim(fields[0]);
    if (stamp == Stamp::Unknown) stamp = ts.find('-', 1) != std::string_view::npos ? Stamp::Iso : Stamp::Epoch;
    OhlcvBar bar;
    if (stamp == Stamp::Iso) {
      try {
        bar.timestamp = parse_iso8601(std::string(ts));
      } catch (const DataError& e) {
        throw DataError(where + e.what());
      }
    } else {
      bar.timestamp = parse_epoch(ts, where);
    }
    bar.open = parse_double(fields[1], where);
    bar.high = parse_double(fields[2], where);
    bar.low = parse_double(fields[3], where);
    bar.close = parse_double(fields[4], where);
    bar.volume = parse_double(fields[5], where);
    validate_bar(bar, where);
    rows.emplace_back(line_no, bar);
  }
  if (rows.empty()) throw DataError(path.string() + ": empty series (header only)");

  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.second.timestamp < b.second.timestamp; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].second.timestamp == rows[i - 1].second.timestamp) {
      throw DataError(row_tag(rows[i].first) + "duplicate timestamp " + std::to_string(rows[i].second.timestamp));
    }
  }

  std::int64_t interval = 0;
  if (options.bar_interval) {
    interval = *options.bar_interval;
  } else if (rows.size() == 1) {
    interval = 86400;
  } else {
    interval = rows[1].second.timestamp - rows[0].second.timestamp;
    for (std::size_t i = 2; i < rows.size(); ++i) {
      interval = std::min(interval, rows[i].second.timestamp - rows[i - 1].second.timestamp);
    }
  }
  if (interval <= 0) throw DataError("bar interval must be positive");

  std::vector<OhlcvBar> bars;
  bars.reserve(rows.size());
  for (const auto& [ln, bar] : rows) {
    if (!bars.empty()) {
      const std::int64_t gap = bar.timestamp - bars.back().timestamp;
      if (gap % interval != 0) {
        throw DataError(row_tag(ln) + "timestamp is not aligned to the " + std::to_string(interval) + "s bar grid");
      }
      if (gap != interval && !options.forward_fill) {
        throw DataError(row_tag(ln) + "gap of " + std::to_string(gap / interval - 1) +
                        " missing bar(s); use forward fill to repeat the last close");
      }
      while (bar.timestamp - bars.back().timestamp > interval) {
        const double c = bars.back().close;
        bars.push_back({bars.back().timestamp + interval, c, c, c, c, 0.0});
      }
    }
    bars.push_back(bar);
  }
  return OhlcvSeries(std::move(bars), interval);
}

void write_ohlcv(const std::filesystem::path& path, const OhlcvSeries& series) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << kHeader << '\n';
  out.precision(17);
  for (const auto& b : series.bars()) {
    out << b.timestamp << ',' << b.open << ',' << b.high << ',' << b.low << ',' << b.close << ',' << b.volume << '\n';
  }
}

Eigen::VectorXd log_returns(const Eigen::VectorXd& prices) {
  if (prices.size() < 2) throw std::invalid_argument("log returns need at least two prices");
  const Eigen::ArrayXd logp = prices.array().log();
  return (logp.tail(prices.size() - 1) - logp.head(prices.size() - 1)).matrix();
}

Eigen::VectorXd log_returns(const OhlcvSeries& series) { return log_returns(series.closes()); }

SplitIndices chronological_split(std::size_t n, const SplitFractions& f) {
  if (f.train <= 0 || f.val <= 0 || f.test <= 0 || std::abs(f.train + f.val + f.test - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must be positive and sum to 1");
  }
  if (n < kMinSplitLength) {
    throw std::invalid_argument("series of length " + std::to_string(n) + " is too short to split (need >= " +
                                std::to_string(kMinSplitLength) + ")");
  }
  // The small offset keeps products like 0.7 * 20 from flooring to 13.
  const auto n_train = static_cast<std::size_t>(std::floor(f.train * double(n) + 1e-9));
  const auto n_val = static_cast<std::size_t>(std::floor(f.val * double(n) + 1e-9));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= n) throw std::invalid_argument("split would leave an empty range");
  return {{0, n_train}, {n_train, n_train + n_val}, {n_train + n_val, n}};
}

}  // namespace qasa
