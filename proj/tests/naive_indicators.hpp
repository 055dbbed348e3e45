#pragma once

// Loop-by-loop recomputation of every base feature column. EMAs are expanded
// into explicit weighted sums rather than run as recursions.

#include "qasa/indicators.hpp"
#include "qasa/marketdata.hpp"

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace qasa::testkit {

namespace naive {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline double mean(const Eigen::VectorXd& x, Eigen::Index end, int n) {
  double s = 0;
  for (Eigen::Index i = end - n + 1; i <= end; ++i) s += x(i);
  return s / n;
}

inline double sample_sd(const Eigen::VectorXd& x, Eigen::Index end, int n) {
  const double m = mean(x, end, n);
  double ss = 0;
  for (Eigen::Index i = end - n + 1; i <= end; ++i) ss += (x(i) - m) * (x(i) - m);
  return std::sqrt(ss / (n - 1));
}

inline Eigen::VectorXd ema(const Eigen::VectorXd& x, int n) {
  const double a = 2.0 / (n + 1);
  Eigen::VectorXd out(x.size());
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    double s = std::pow(1 - a, double(t)) * x(0);
    for (Eigen::Index k = 0; k < t; ++k) s += a * std::pow(1 - a, double(k)) * x(t - k);
    out(t) = s;
  }
  return out;
}

}  // namespace naive

inline std::map<std::string, Eigen::VectorXd> naive_base_columns(const OhlcvSeries& s, const indicators::IndicatorConfig& c) {
  using naive::kNaN;
  const Eigen::Index n = Eigen::Index(s.size());
  const Eigen::VectorXd p = s.closes(), v = s.volumes();
  std::map<std::string, Eigen::VectorXd> out;
  auto col = [&](const char* name) -> Eigen::VectorXd& { return out[name] = Eigen::VectorXd::Constant(n, kNaN); };

  Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
  for (Eigen::Index t = 1; t < n; ++t) r(t) = std::log(p(t) / p(t - 1));

  auto& lr = col("log_return");
  for (Eigen::Index t = 1; t < n; ++t) lr(t) = r(t);
  auto& mom = col("momentum");
  for (Eigen::Index t = c.k_m; t < n; ++t) mom(t) = std::log(p(t) / p(t - c.k_m));
  auto& mar = col("ma_ratio");
  for (Eigen::Index t = c.n_ma - 1; t < n; ++t) mar(t) = p(t) / naive::mean(p, t, c.n_ma) - 1;
  auto& rv = col("rolling_vol");
  for (Eigen::Index t = c.n_vol; t < n; ++t) rv(t) = naive::sample_sd(r, t, c.n_vol);
  auto& lv = col("lr_vol");
  for (Eigen::Index t = c.n_lr; t < n; ++t) lv(t) = naive::sample_sd(r, t, c.n_lr);
  auto& ew = col("ewma_vol");
  for (Eigen::Index t = 1; t < n; ++t) {
    double var = std::pow(c.lambda_ewma, double(t - 1)) * r(1) * r(1);
    for (Eigen::Index k = 2; k <= t; ++k) var += (1 - c.lambda_ewma) * std::pow(c.lambda_ewma, double(t - k)) * r(k) * r(k);
    ew(t) = std::sqrt(var);
  }

  auto& rs = col("rsi");
  double gain = 0, loss = 0;
  for (Eigen::Index t = 1; t < n; ++t) {
    const double up = std::max(p(t) - p(t - 1), 0.0), down = std::max(p(t - 1) - p(t), 0.0);
    if (t <= c.n_rsi) {
      gain += up / c.n_rsi;
      loss += down / c.n_rsi;
    } else {
      gain += (up - gain) / c.n_rsi;
      loss += (down - loss) / c.n_rsi;
    }
    if (t >= c.n_rsi) rs(t) = gain + loss == 0 ? 50 : 100 * gain / (gain + loss);
  }

  const Eigen::VectorXd line = naive::ema(p, c.macd.fast) - naive::ema(p, c.macd.slow);
  out["macd_hist"] = line - naive::ema(line, c.macd.signal);

  auto& vr = col("vol_ratio");
  auto& svr = col("signed_vol_ratio");
  auto& ami = col("amihud");
  for (Eigen::Index t = c.n_v; t < n; ++t) {
    double abs_signed = 0, illiq = 0;
    for (Eigen::Index k = t - c.n_v + 1; k <= t; ++k) {
      abs_signed += (r(k) == 0 ? 0.0 : v(k)) / c.n_v;
      illiq += std::abs(r(k)) / (v(k) + c.eps) / c.n_v;
    }
    const double sign = r(t) > 0 ? 1 : (r(t) < 0 ? -1 : 0);
    vr(t) = v(t) / naive::mean(v, t, c.n_v) - 1;
    svr(t) = sign * v(t) / (abs_signed + c.eps);
    ami(t) = illiq;
  }

  auto& pb = col("bb_percent_b");
  auto& bz = col("bb_z");
  for (Eigen::Index t = c.n_bb - 1; t < n; ++t) {
    const double m = naive::mean(p, t, c.n_bb), sd = naive::sample_sd(p, t, c.n_bb);
    if (sd == 0) {
      pb(t) = 0.5;
      bz(t) = 0;
      continue;
    }
    const double up = m + c.k_bb * sd, lo = m - c.k_bb * sd;
    pb(t) = (p(t) - lo) / (up - lo);
    bz(t) = (p(t) - m) / (c.k_bb * sd);
  }

  Eigen::VectorXd tr(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto& b = s[std::size_t(t)];
    tr(t) = b.high - b.low;
    if (t > 0) {
      const double pc = s[std::size_t(t - 1)].close;
      tr(t) = std::max({tr(t), std::abs(b.high - pc), std::abs(b.low - pc)});
    }
  }
  out["atr"] = naive::ema(tr, c.n_atr);
  out["atr_rel"] = (out["atr"].array() / p.array()).matrix();
  return out;
}

/// Largest relative error between two bar-aligned columns; a NaN on only one
/// side counts as infinite.
inline double column_error(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  double worst = 0;
  for (Eigen::Index t = 0; t < want.size(); ++t) {
    const bool gn = std::isnan(got(t)), wn = std::isnan(want(t));
    if (gn || wn) {
      if (gn != wn) return std::numeric_limits<double>::infinity();
      continue;
    }
    worst = std::max(worst, std::abs(got(t) - want(t)) / std::max(1.0, std::abs(want(t))));
  }
  return worst;
}

}  // namespace qasa::testkit
