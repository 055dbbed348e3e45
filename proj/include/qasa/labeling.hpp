#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace qasa::labeling {

enum class LabelMode { UpperOnly, TwoSided };

struct LabelConfig {
  int ma_window = 20;
  double tau = 0.02;
  LabelMode mode = LabelMode::UpperOnly;

  void validate() const;
};

/// y_t = 1 iff P_t / MA(P_t) - 1 > tau (two-sided: |.| > tau). Bars before
/// `valid_from` carry 0 and must not be consumed.
struct LabelSeries {
  std::vector<int> y;
  std::size_t valid_from = 0;

  std::size_t positives() const;
};

LabelSeries label_series(const Eigen::VectorXd& prices, const LabelConfig& config = {});

}  // namespace qasa::labeling
