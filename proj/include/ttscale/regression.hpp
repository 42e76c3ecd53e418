#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>

namespace ttscale {

struct DataPoint {
  double x = 0.0;
  double y = 0.0;
};

class FitRefused : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Ordinary least squares line with a mean-response confidence band.
struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// sqrt(SSE / (n - 2))
  double residual_se = 0.0;
  std::size_t n = 0;
  double x_mean = 0.0;
  /// Sum of squared deviations of x from its mean.
  double sxx = 0.0;
  /// Two-sided Student-t quantile with n - 2 degrees of freedom.
  double t_critical = 0.0;
  double confidence = 0.95;

  [[nodiscard]] double predict(double x) const { return intercept + slope * x; }

  /// t * s * sqrt(1/n + (x - mean)^2 / Sxx); smallest at the mean of x.
  [[nodiscard]] double half_width(double x) const;

  [[nodiscard]] std::pair<double, double> band(double x) const {
    const double h = half_width(x);
    return {predict(x) - h, predict(x) + h};
  }
};

/// Needs at least 3 points and nonconstant x; throws FitRefused otherwise.
RegressionFit fit_linear_with_ci(std::span<const DataPoint> points, double confidence = 0.95);

}  // namespace ttscale
