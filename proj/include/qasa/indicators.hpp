#pragma once

// Technical indicators over dense Eigen vectors. Every output has the same
// length as its input and is bar-aligned; entries before the indicator is
// defined (its warm-up) are NaN. All indicators are causal.

#include "qasa/marketdata.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qasa::indicators {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct MacdConfig {
  int fast = 12;
  int slow = 26;
  int signal = 9;
};

struct IndicatorConfig {
  int n_ma = 20;
  int k_m = 5;
  int n_bb = 20;
  double k_bb = 2.0;
  int n_atr = 14;
  int n_v = 20;
  int n_lr = 60;
  int n_vol = 20;  // short rolling volatility window
  double lambda_ewma = 0.94;
  int n_rsi = 14;
  MacdConfig macd;
  double eps = 1e-12;
  std::vector<int> lag_set{1, 2, 3, 5};
  std::vector<std::pair<std::string, std::string>> interaction_pairs{
      {"momentum", "ma_ratio"}, {"rsi", "macd_hist"}, {"vol_ratio", "signed_vol_ratio"}};

  void validate() const;
};

namespace detail {

template <typename Scalar>
VectorX<Scalar> undefined(Eigen::Index n) {
  return VectorX<Scalar>::Constant(n, std::numeric_limits<Scalar>::quiet_NaN());
}

inline void require_window(Eigen::Index len, int n, int min_window, const char* what) {
  if (n < min_window) throw std::invalid_argument(std::string(what) + ": window must be >= " + std::to_string(min_window));
  if (len < n) throw std::invalid_argument(std::string(what) + ": window " + std::to_string(n) + " exceeds series length " +
                                           std::to_string(len));
}

}  // namespace detail

/// Simple moving average; defined from index n-1.
template <typename Derived>
VectorX<typename Derived::Scalar> sma(const Eigen::MatrixBase<Derived>& x, int n) {
  using Scalar = typename Derived::Scalar;
  detail::require_window(x.size(), n, 1, "sma");
  VectorX<Scalar> out = detail::undefined<Scalar>(x.size());
  for (Eigen::Index t = n - 1; t < x.size(); ++t) out(t) = x.segment(t - n + 1, n).mean();
  return out;
}

/// EMA with alpha = 2/(n+1), seeded with the first observation.
template <typename Derived>
VectorX<typename Derived::Scalar> ema(const Eigen::MatrixBase<Derived>& x, int n) {
  using Scalar = typename Derived::Scalar;
  if (n < 1) throw std::invalid_argument("ema: window must be >= 1");
  if (x.size() == 0) throw std::invalid_argument("ema: empty series");
  const Scalar alpha = Scalar(2) / Scalar(n + 1);
  VectorX<Scalar> out(x.size());
  out(0) = x(0);
  for (Eigen::Index t = 1; t < x.size(); ++t) out(t) = alpha * x(t) + (1 - alpha) * out(t - 1);
  return out;
}

/// Trailing sample standard deviation (divisor n-1); defined from index n-1.
template <typename Derived>
VectorX<typename Derived::Scalar> rolling_volatility(const Eigen::MatrixBase<Derived>& r, int n) {
  using Scalar = typename Derived::Scalar;
  detail::require_window(r.size(), n, 2, "rolling_volatility");
  VectorX<Scalar> out = detail::undefined<Scalar>(r.size());
  for (Eigen::Index t = n - 1; t < r.size(); ++t) {
    const auto w = r.segment(t - n + 1, n).array();
    out(t) = std::sqrt((w - w.mean()).square().sum() / Scalar(n - 1));
  }
  return out;
}

/// sqrt of the EWMA variance recursion, seeded with the first squared return.
template <typename Derived>
VectorX<typename Derived::Scalar> ewma_volatility(const Eigen::MatrixBase<Derived>& r, double lambda) {
  using Scalar = typename Derived::Scalar;
  if (!(lambda > 0 && lambda < 1)) throw std::invalid_argument("ewma_volatility: lambda must lie in (0, 1)");
  if (r.size() == 0) throw std::invalid_argument("ewma_volatility: empty series");
  VectorX<Scalar> out(r.size());
  Scalar var = r(0) * r(0);
  out(0) = std::sqrt(var);
  for (Eigen::Index t = 1; t < r.size(); ++t) {
    var = (1 - lambda) * r(t) * r(t) + lambda * var;
    out(t) = std::sqrt(var);
  }
  return out;
}

/// P_t / MA_n(P_t) - 1.
template <typename Derived>
VectorX<typename Derived::Scalar> ma_ratio(const Eigen::MatrixBase<Derived>& p, int n) {
  return (p.derived().array() / sma(p, n).array() - 1).matrix();
}

/// ln(P_t / P_{t-k}); defined from index k.
template <typename Derived>
VectorX<typename Derived::Scalar> momentum(const Eigen::MatrixBase<Derived>& p, int k) {
  using Scalar = typename Derived::Scalar;
  if (k < 1) throw std::invalid_argument("momentum: horizon must be >= 1");
  if (p.size() < k + 1) throw std::invalid_argument("momentum: horizon exceeds series length");
  VectorX<Scalar> out = detail::undefined<Scalar>(p.size());
  for (Eigen::Index t = k; t < p.size(); ++t) out(t) = std::log(p(t) / p(t - k));
  return out;
}

template <typename Scalar>
struct Bands {
  VectorX<Scalar> mean, stdev, upper, lower, percent_b, z;
};

/// Bollinger bands with a sample-std width. A flat window (s = 0) gives
/// %b = 0.5 and z = 0.
template <typename Derived>
Bands<typename Derived::Scalar> bollinger(const Eigen::MatrixBase<Derived>& p, int n, double k) {
  using Scalar = typename Derived::Scalar;
  detail::require_window(p.size(), n, 2, "bollinger");
  if (!(k > 0)) throw std::invalid_argument("bollinger: width must be positive");
  Bands<Scalar> b;
  b.mean = sma(p, n);
  b.stdev = rolling_volatility(p, n);
  b.upper = b.mean + Scalar(k) * b.stdev;
  b.lower = b.mean - Scalar(k) * b.stdev;
  b.percent_b = detail::undefined<Scalar>(p.size());
  b.z = detail::undefined<Scalar>(p.size());
  for (Eigen::Index t = n - 1; t < p.size(); ++t) {
    if (b.stdev(t) == Scalar(0)) {
      b.percent_b(t) = Scalar(0.5);
      b.z(t) = 0;
    } else {
      b.percent_b(t) = (p(t) - b.lower(t)) / (b.upper(t) - b.lower(t));
      b.z(t) = (p(t) - b.mean(t)) / (Scalar(k) * b.stdev(t));
    }
  }
  return b;
}

/// Wilder RSI on [0, 100]; defined from index n. No movement maps to 50.
template <typename Derived>
VectorX<typename Derived::Scalar> rsi(const Eigen::MatrixBase<Derived>& p, int n) {
  using Scalar = typename Derived::Scalar;
  if (n < 2) throw std::invalid_argument("rsi: window must be >= 2");
  if (p.size() < n + 1) throw std::invalid_argument("rsi: series too short");
  VectorX<Scalar> out = detail::undefined<Scalar>(p.size());
  auto value = [](Scalar gain, Scalar loss) -> Scalar {
    if (gain == 0 && loss == 0) return 50;
    if (loss == 0) return 100;
    return 100 - 100 / (1 + gain / loss);
  };
  Scalar gain = 0, loss = 0;
  for (Eigen::Index t = 1; t <= n; ++t) {
    const Scalar d = p(t) - p(t - 1);
    gain += std::max(d, Scalar(0));
    loss += std::max(-d, Scalar(0));
  }
  gain /= n;
  loss /= n;
  out(n) = value(gain, loss);
  for (Eigen::Index t = n + 1; t < p.size(); ++t) {
    const Scalar d = p(t) - p(t - 1);
    gain = (gain * (n - 1) + std::max(d, Scalar(0))) / n;
    loss = (loss * (n - 1) + std::max(-d, Scalar(0))) / n;
    out(t) = value(gain, loss);
  }
  return out;
}

/// MACD histogram: (EMA_fast - EMA_slow) - EMA_signal(EMA_fast - EMA_slow).
template <typename Derived>
VectorX<typename Derived::Scalar> macd_histogram(const Eigen::MatrixBase<Derived>& p, int fast, int slow, int signal) {
  using Scalar = typename Derived::Scalar;
  if (fast < 1 || slow < 1 || signal < 1) throw std::invalid_argument("macd: windows must be >= 1");
  if (p.size() < slow + signal) throw std::invalid_argument("macd: series too short");
  const VectorX<Scalar> line = ema(p, fast) - ema(p, slow);
  return line - ema(line, signal);
}

template <typename Scalar>
struct VolumeRatios {
  VectorX<Scalar> ratio;         // V_t / MA_n(V_t) - 1
  VectorX<Scalar> signed_ratio;  // S_t / (MA_n(|S_t|) + eps), S_t = sgn(r_t) V_t
};

/// `volumes` and `returns` must be aligned element for element.
template <typename DV, typename DR>
VolumeRatios<typename DV::Scalar> volume_features(const Eigen::MatrixBase<DV>& volumes, const Eigen::MatrixBase<DR>& returns,
                                                  int n, double eps) {
  using Scalar = typename DV::Scalar;
  if (volumes.size() != returns.size()) throw std::invalid_argument("volume_features: misaligned inputs");
  detail::require_window(volumes.size(), n, 1, "volume_features");
  VectorX<Scalar> signed_volume(volumes.size());
  for (Eigen::Index t = 0; t < volumes.size(); ++t) {
    const Scalar s = returns(t) > 0 ? Scalar(1) : (returns(t) < 0 ? Scalar(-1) : Scalar(0));
    signed_volume(t) = s * volumes(t);
  }
  VolumeRatios<Scalar> out;
  out.ratio = (volumes.derived().array() / sma(volumes, n).array() - 1).matrix();
  const VectorX<Scalar> abs_ma = sma(signed_volume.cwiseAbs(), n);
  out.signed_ratio = (signed_volume.array() / (abs_ma.array() + Scalar(eps))).matrix();
  return out;
}

/// Trailing mean of |r| / (V + eps) over n bars.
template <typename DR, typename DV>
VectorX<typename DR::Scalar> amihud(const Eigen::MatrixBase<DR>& returns, const Eigen::MatrixBase<DV>& volumes, int n,
                                    double eps) {
  using Scalar = typename DR::Scalar;
  if (volumes.size() != returns.size()) throw std::invalid_argument("amihud: misaligned inputs");
  detail::require_window(returns.size(), n, 1, "amihud");
  const VectorX<Scalar> ratio = (returns.derived().array().abs() / (volumes.derived().array() + Scalar(eps))).matrix();
  return sma(ratio, n);
}

struct AverageTrueRange {
  Eigen::VectorXd true_range;
  Eigen::VectorXd atr;
  Eigen::VectorXd relative;  // ATR / close
};

/// TR uses H-L alone on the first bar; ATR is the EMA of TR.
AverageTrueRange atr(const OhlcvSeries& series, int n_atr);

/// Bar-aligned log returns: element 0 is NaN.
Eigen::VectorXd aligned_log_returns(const Eigen::VectorXd& prices);

/// Index of the first element from which the column is finite through the end;
/// the column length when no such element exists.
Eigen::Index first_defined(const Eigen::VectorXd& column);

}  // namespace qasa::indicators
