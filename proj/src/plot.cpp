#include "ttscale/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace ttscale {

PlotFormat parse_plot_format(std::string_view name) {
  if (name == "csv") return PlotFormat::csv;
  if (name == "svg") return PlotFormat::svg;
  throw UnknownFormat("unknown plot format: " + std::string(name));
}

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  // Avoid "-0.00" so that tiny negative noise cannot change the bytes.
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string general(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string emit_csv(const SweepResult& sweep, const std::optional<RegressionFit>& fit) {
  std::string out = "x,accuracy,n,ci_low,ci_high\n";
  for (const auto& p : sweep.points) {
    out += general(p.x) + ',' + fixed(p.accuracy * 100.0, 4) + ',' + std::to_string(p.n) + ',';
    if (fit) {
      const auto [lo, hi] = fit->band(p.x);
      out += fixed(lo, 4) + ',' + fixed(hi, 4);
    } else {
      out += ',';
    }
    out += '\n';
  }
  return out;
}

constexpr double kWidth = 640;
constexpr double kHeight = 400;
constexpr double kLeft = 64;
constexpr double kRight = 24;
constexpr double kTop = 40;
constexpr double kBottom = 56;
constexpr int kBandSamples = 41;

struct Frame {
  double x_min;
  double x_max;

  [[nodiscard]] double px(double x) const {
    return kLeft + (x - x_min) / (x_max - x_min) * (kWidth - kLeft - kRight);
  }
  [[nodiscard]] static double py(double percent) {
    return kTop + (100.0 - percent) / 100.0 * (kHeight - kTop - kBottom);
  }
};

std::string emit_svg(const SweepResult& sweep, const std::optional<RegressionFit>& fit,
                     const PlotOptions& options) {
  double x_min = sweep.points.front().x;
  double x_max = sweep.points.back().x;
  for (const auto& p : sweep.points) {
    x_min = std::min(x_min, p.x);
    x_max = std::max(x_max, p.x);
  }
  if (x_max == x_min) {
    x_min -= 1.0;
    x_max += 1.0;
  }
  const Frame f{x_min, x_max};
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << general(kWidth) << "\" height=\""
    << general(kHeight) << "\" viewBox=\"0 0 " << general(kWidth) << ' ' << general(kHeight)
    << "\">\n";
  if (!options.metadata.empty()) {
    s << "<metadata>" << xml_escape(options.metadata) << "</metadata>\n";
  }
  s << "<defs><clipPath id=\"plot-area\"><rect x=\"" << fixed(kLeft, 2) << "\" y=\""
    << fixed(kTop, 2) << "\" width=\"" << fixed(plot_w, 2) << "\" height=\"" << fixed(plot_h, 2)
    << "\"/></clipPath></defs>\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << general(kWidth) << "\" height=\"" << general(kHeight)
    << "\" fill=\"white\"/>\n";

  // Axes, gridlines and tick labels.
  s << "<g stroke=\"black\" stroke-width=\"1\">\n";
  s << "<line x1=\"" << fixed(kLeft, 2) << "\" y1=\"" << fixed(kTop + plot_h, 2) << "\" x2=\""
    << fixed(kLeft + plot_w, 2) << "\" y2=\"" << fixed(kTop + plot_h, 2) << "\"/>\n";
  s << "<line x1=\"" << fixed(kLeft, 2) << "\" y1=\"" << fixed(kTop, 2) << "\" x2=\""
    << fixed(kLeft, 2) << "\" y2=\"" << fixed(kTop + plot_h, 2) << "\"/>\n";
  s << "</g>\n";
  s << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"black\">\n";
  for (int pct = 0; pct <= 100; pct += 20) {
    const double y = Frame::py(pct);
    s << "<line x1=\"" << fixed(kLeft - 4, 2) << "\" y1=\"" << fixed(y, 2) << "\" x2=\""
      << fixed(kLeft, 2) << "\" y2=\"" << fixed(y, 2) << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << fixed(kLeft - 8, 2) << "\" y=\"" << fixed(y + 4, 2)
      << "\" text-anchor=\"end\">" << pct << "</text>\n";
  }
  for (const auto& p : sweep.points) {
    const double x = f.px(p.x);
    s << "<line x1=\"" << fixed(x, 2) << "\" y1=\"" << fixed(kTop + plot_h, 2) << "\" x2=\""
      << fixed(x, 2) << "\" y2=\"" << fixed(kTop + plot_h + 4, 2) << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << fixed(x, 2) << "\" y=\"" << fixed(kTop + plot_h + 18, 2)
      << "\" text-anchor=\"middle\">" << general(p.x) << "</text>\n";
  }
  const std::string x_label = options.x_label.empty() ? sweep.x_name : options.x_label;
  s << "<text x=\"" << fixed(kLeft + plot_w / 2, 2) << "\" y=\"" << fixed(kHeight - 12, 2)
    << "\" text-anchor=\"middle\">" << xml_escape(x_label) << "</text>\n";
  s << "<text x=\"16\" y=\"" << fixed(kTop + plot_h / 2, 2)
    << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << fixed(kTop + plot_h / 2, 2)
    << ")\">" << xml_escape(options.y_label) << "</text>\n";
  const std::string title = options.title.empty() ? sweep.dataset : options.title;
  s << "<text x=\"" << fixed(kWidth / 2, 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << xml_escape(title) << "</text>\n";
  s << "</g>\n";

  if (fit) {
    s << "<g clip-path=\"url(#plot-area)\">\n";
    s << "<polygon class=\"ci-band\" fill=\"steelblue\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (int i = 0; i < kBandSamples; ++i) {
      const double x = x_min + (x_max - x_min) * i / (kBandSamples - 1);
      if (i > 0) s << ' ';
      s << fixed(f.px(x), 2) << ',' << fixed(Frame::py(fit->band(x).second), 2);
    }
    for (int i = kBandSamples - 1; i >= 0; --i) {
      const double x = x_min + (x_max - x_min) * i / (kBandSamples - 1);
      s << ' ' << fixed(f.px(x), 2) << ',' << fixed(Frame::py(fit->band(x).first), 2);
    }
    s << "\"/>\n";
    s << "<path class=\"fit\" d=\"M " << fixed(f.px(x_min), 2) << ' '
      << fixed(Frame::py(fit->predict(x_min)), 2) << " L " << fixed(f.px(x_max), 2) << ' '
      << fixed(Frame::py(fit->predict(x_max)), 2)
      << "\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" stroke-dasharray=\"2,4\"/>\n";
    s << "</g>\n";
  }

  s << "<g fill=\"steelblue\">\n";
  for (const auto& p : sweep.points) {
    s << "<circle cx=\"" << fixed(f.px(p.x), 2) << "\" cy=\"" << fixed(Frame::py(p.accuracy * 100.0), 2)
      << "\" r=\"4\"/>\n";
  }
  s << "</g>\n</svg>\n";
  return s.str();
}

}  // namespace

std::string emit_plot(const SweepResult& sweep, const std::optional<RegressionFit>& fit,
                      PlotFormat format, const PlotOptions& options) {
  if (sweep.points.empty()) throw std::invalid_argument("cannot plot an empty sweep");
  switch (format) {
    case PlotFormat::csv: return emit_csv(sweep, fit);
    case PlotFormat::svg: return emit_svg(sweep, fit, options);
  }
  throw UnknownFormat("unknown plot format");
}

}  // namespace ttscale
