#include "tlreg/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tlreg {

namespace {

constexpr std::array<const char*, 6> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

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

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) ticks.push_back(t);
  return ticks;
}

struct Axis {
  double lo, hi;
  bool log;
  [[nodiscard]] double map(double v) const {
    const double a = log ? std::log10(lo) : lo;
    const double b = log ? std::log10(hi) : hi;
    const double x = log ? std::log10(v) : v;
    return (x - a) / (b - a);
  }
  [[nodiscard]] std::vector<double> ticks() const {
    if (!log) return linear_ticks(lo, hi);
    std::vector<double> t;
    for (double e = std::floor(std::log10(lo)); e <= std::ceil(std::log10(hi)); e += 1.0) {
      const double v = std::pow(10.0, e);
      if (v >= lo * (1 - 1e-9) && v <= hi * (1 + 1e-9)) t.push_back(v);
    }
    if (t.size() < 2) {
      t = linear_ticks(lo, hi);
      std::erase_if(t, [](double v) { return v <= 0.0; });
    }
    return t;
  }
};

Axis make_axis(double lo, double hi, bool log) {
  if (log && lo <= 0.0) throw std::invalid_argument("plot: log scale needs positive values");
  if (hi == lo) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    lo -= pad;
    hi += pad;
    if (log && lo <= 0.0) lo = hi / 100.0;
  } else if (!log) {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  return {lo, hi, log};
}

}  // namespace

std::string render_svg(const CsvFrame& table, const PlotSpec& spec) {
  const int xc = table.column_index(spec.x_column);
  const int yc = table.column_index(spec.y_column);
  const int gc = spec.group_column.empty() ? -1 : table.column_index(spec.group_column);
  if (xc < 0) throw std::invalid_argument("plot: no column '" + spec.x_column + "'");
  if (yc < 0) throw std::invalid_argument("plot: no column '" + spec.y_column + "'");
  if (!spec.group_column.empty() && gc < 0) throw std::invalid_argument("plot: no column '" + spec.group_column + "'");
  if (spec.width < 100 || spec.height < 100) throw std::invalid_argument("plot: output must be at least 100x100");

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& row : table.rows) {
    const std::string group = gc >= 0 ? row[static_cast<std::size_t>(gc)] : std::string("series");
    const double x = parse_double(row[static_cast<std::size_t>(xc)]);
    const double y = parse_double(row[static_cast<std::size_t>(yc)]);
    if (!series.contains(group)) order.push_back(group);
    series[group].emplace_back(x, y);
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  if (order.empty()) throw std::invalid_argument("plot: table has no rows");

  const Axis ax = make_axis(xmin, xmax, spec.log_x);
  const Axis ay = make_axis(ymin, ymax, spec.log_y);
  const double left = 70, right = 150, top = 40, bottom = 55;
  const double pw = spec.width - left - right;
  const double ph = spec.height - top - bottom;
  auto px = [&](double x) { return left + ax.map(x) * pw; };
  auto py = [&](double y) { return top + (1.0 - ay.map(y)) * ph; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << spec.width << "\" height=\""
      << spec.height << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!spec.title.empty()) {
    svg << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"15\">" << escape(spec.title) << "</text>\n";
  }
  svg << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n"
      << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph << "\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\"/>\n"
      << "</g>\n<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double t : ax.ticks()) {
    const double x = px(t);
    svg << "<line x1=\"" << x << "\" y1=\"" << top + ph << "\" x2=\"" << x << "\" y2=\"" << top + ph + 5
        << "\" stroke=\"black\"/>\n<text x=\"" << x << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
        << fmt(t) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double y = py(t);
    svg << "<line x1=\"" << left - 5 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
        << "\" stroke=\"black\"/>\n<text x=\"" << left - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
        << fmt(t) << "</text>\n";
  }
  svg << "</g>\n";
  const std::string xl = spec.x_label.empty() ? spec.x_column : spec.x_label;
  const std::string yl = spec.y_label.empty() ? spec.y_column : spec.y_label;
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << spec.height - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << escape(xl) << "</text>\n"
      << "<text transform=\"translate(18," << top + ph / 2
      << ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << escape(yl)
      << "</text>\n";

  for (std::size_t i = 0; i < order.size(); ++i) {
    auto pts = series[order[i]];
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    const char* color = kPalette[i % kPalette.size()];
    svg << "<path class=\"series\" data-group=\"" << escape(order[i]) << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" d=\"";
    for (std::size_t k = 0; k < pts.size(); ++k) {
      svg << (k == 0 ? 'M' : 'L') << px(pts[k].first) << ',' << py(pts[k].second) << (k + 1 < pts.size() ? " " : "");
    }
    svg << "\"/>\n";
    for (const auto& [x, y] : pts) {
      svg << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = top + 12 + 20.0 * static_cast<double>(i);
    svg << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 40 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n<text x=\"" << left + pw + 46 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(order[i]) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace tlreg
