#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "varbif/numfmt.hpp"

namespace varbif::cli {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

// Fixed two-decimal-ish pixel coordinates keep the output byte stable.
std::string px(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.setf(std::ios::fixed);
  os.precision(2);
  os << v;
  return os.str();
}

double nice_step(double span, int target) {
  const double raw = span / std::max(1, target);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  const double f = r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0;
  return f * mag;
}

std::string tick_label(double v, double step) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  const int digits = std::max(0, static_cast<int>(-std::floor(std::log10(step) + 1e-9)));
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << (std::abs(v) < 0.5 * step ? 0.0 : v);
  return os.str();
}

}  // namespace

std::string palette(std::size_t k) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                 "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};
  return colors[k % (sizeof(colors) / sizeof(colors[0]))];
}

std::string render_svg(const Figure& fig) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : fig.series)
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (!std::isfinite(xmin)) {
    xmin = 0.0;
    xmax = 1.0;
    ymin = 0.0;
    ymax = 1.0;
  }
  if (fig.zero_axis) {
    ymin = std::min(ymin, 0.0);
    ymax = std::max(ymax, 0.0);
  }
  if (xmax - xmin <= 0.0) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax - ymin <= 0.0) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double xpad = 0.04 * (xmax - xmin), ypad = 0.06 * (ymax - ymin);
  xmin -= xpad;
  xmax += xpad;
  ymin -= ypad;
  ymax += ypad;

  const double left = 80, right = 170, top = 40, bottom = 60;
  const double pw = fig.width - left - right, ph = fig.height - top - bottom;
  auto X = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto Y = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fig.width << "\" height=\"" << fig.height
     << "\" viewBox=\"0 0 " << fig.width << ' ' << fig.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << px(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(fig.title)
     << "</text>\n";
  os << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\"" << px(pw) << "\" height=\"" << px(ph)
     << "\" fill=\"none\" stroke=\"#333\"/>\n";

  const double xs = nice_step(xmax - xmin, 8), ys = nice_step(ymax - ymin, 6);
  for (double v = std::ceil(xmin / xs) * xs; v <= xmax; v += xs) {
    os << "<line x1=\"" << px(X(v)) << "\" y1=\"" << px(top + ph) << "\" x2=\"" << px(X(v)) << "\" y2=\""
       << px(top + ph + 5) << "\" stroke=\"#333\"/>";
    os << "<text x=\"" << px(X(v)) << "\" y=\"" << px(top + ph + 18) << "\" text-anchor=\"middle\">"
       << tick_label(v, xs) << "</text>\n";
  }
  for (double v = std::ceil(ymin / ys) * ys; v <= ymax; v += ys) {
    os << "<line x1=\"" << px(left - 5) << "\" y1=\"" << px(Y(v)) << "\" x2=\"" << px(left) << "\" y2=\""
       << px(Y(v)) << "\" stroke=\"#333\"/>";
    os << "<text x=\"" << px(left - 8) << "\" y=\"" << px(Y(v) + 4) << "\" text-anchor=\"end\">" << tick_label(v, ys)
       << "</text>\n";
  }
  os << "<text x=\"" << px(left + pw / 2) << "\" y=\"" << px(fig.height - 15.0) << "\" text-anchor=\"middle\">"
     << escape(fig.x_label) << "</text>\n";
  os << "<text x=\"18\" y=\"" << px(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << px(top + ph / 2) << ")\">" << escape(fig.y_label) << "</text>\n";
  if (fig.zero_axis)
    os << "<line x1=\"" << px(left) << "\" y1=\"" << px(Y(0.0)) << "\" x2=\"" << px(left + pw) << "\" y2=\""
       << px(Y(0.0)) << "\" stroke=\"#000\" stroke-width=\"1.5\"/>\n";

  for (std::size_t k = 0; k < fig.series.size(); ++k) {
    const Series& s = fig.series[k];
    const std::string color = s.color.empty() ? palette(k) : s.color;
    if (s.points.size() > 1) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\"";
      if (s.dashed) os << " stroke-dasharray=\"6 4\"";
      os << " points=\"";
      for (std::size_t i = 0; i < s.points.size(); ++i)
        os << (i ? " " : "") << px(X(s.points[i].first)) << ',' << px(Y(s.points[i].second));
      os << "\"/>\n";
    }
    if (s.markers || s.points.size() == 1)
      for (const auto& [x, y] : s.points)
        os << "<circle cx=\"" << px(X(x)) << "\" cy=\"" << px(Y(y)) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(k);
    os << "<line x1=\"" << px(left + pw + 12) << "\" y1=\"" << px(ly) << "\" x2=\"" << px(left + pw + 36) << "\" y2=\""
       << px(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>";
    os << "<text x=\"" << px(left + pw + 42) << "\" y=\"" << px(ly + 4) << "\">" << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace varbif::cli
