#include "ttscale/regression.hpp"

#include <cmath>
#include <string>

#include <boost/math/distributions/students_t.hpp>

namespace ttscale {

double RegressionFit::half_width(double x) const {
  const double dx = x - x_mean;
  return t_critical * residual_se * std::sqrt(1.0 / static_cast<double>(n) + dx * dx / sxx);
}

RegressionFit fit_linear_with_ci(std::span<const DataPoint> points, double confidence) {
  if (points.size() < 3) {
    throw FitRefused("linear fit needs at least 3 points, got " + std::to_string(points.size()));
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("confidence must lie in (0, 1)");
  }
  const auto n = static_cast<double>(points.size());
  double x_mean = 0.0;
  double y_mean = 0.0;
  for (const auto& p : points) {
    x_mean += p.x;
    y_mean += p.y;
  }
  x_mean /= n;
  y_mean /= n;

  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& p : points) {
    sxx += (p.x - x_mean) * (p.x - x_mean);
    sxy += (p.x - x_mean) * (p.y - y_mean);
  }
  if (sxx == 0.0) throw FitRefused("linear fit needs nonconstant x");

  RegressionFit fit;
  fit.n = points.size();
  fit.x_mean = x_mean;
  fit.sxx = sxx;
  fit.slope = sxy / sxx;
  fit.intercept = y_mean - fit.slope * x_mean;
  fit.confidence = confidence;

  double sse = 0.0;
  for (const auto& p : points) {
    const double r = p.y - fit.predict(p.x);
    sse += r * r;
  }
  fit.residual_se = std::sqrt(sse / (n - 2.0));

  const boost::math::students_t dist(n - 2.0);
  fit.t_critical = boost::math::quantile(dist, 0.5 + confidence / 2.0);
  return fit;
}

}  // namespace ttscale
