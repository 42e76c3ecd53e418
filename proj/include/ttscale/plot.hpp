#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ttscale/eval.hpp"
#include "ttscale/regression.hpp"

namespace ttscale {

enum class PlotFormat { csv, svg };

class UnknownFormat : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// "csv" or "svg"; anything else throws UnknownFormat.
PlotFormat parse_plot_format(std::string_view name);

struct PlotOptions {
  std::string title;
  /// Defaults to the sweep's x_name.
  std::string x_label;
  std::string y_label = "Accuracy (%)";
  /// Embedded verbatim (escaped) in the SVG <metadata> element.
  std::string metadata;
};

/// Renders a sweep, accuracy in percent. CSV columns are
/// x,accuracy,n,ci_low,ci_high; the CI fields are empty without a fit. SVG
/// draws the points, the fit as one dotted path and the band as one polygon.
/// Output depends only on the arguments.
std::string emit_plot(const SweepResult& sweep, const std::optional<RegressionFit>& fit,
                      PlotFormat format, const PlotOptions& options = {});

}  // namespace ttscale
