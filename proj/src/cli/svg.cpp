#include "isac/cli/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace isac::cli {
namespace {

constexpr std::array<const char*, 10> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr std::array<const char*, 5> kViridis{"#440154", "#3b528b", "#21918c", "#5ec962", "#fde725"};

constexpr double kLeft = 80.0;
constexpr double kRight = 190.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 60.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  std::string s(buf);
  return s == "-0.00" ? "0.00" : s;
}

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

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range padded(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = std::max(0.5, std::abs(lo) * 0.05);
    return {lo - pad, hi + pad};
  }
  return {lo, hi};
}

double nice_step(double span) {
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double m = f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0;
  return m * mag;
}

std::string tick_label(double v, double step) {
  const int decimals = std::max(0, static_cast<int>(-std::floor(std::log10(step) + 1e-9)));
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, std::abs(v) < step * 1e-9 ? 0.0 : v);
  return buf;
}

struct Frame {
  double width;
  double height;
  Range x;
  Range y;
  double px(double v) const { return kLeft + (v - x.lo) / (x.hi - x.lo) * (width - kLeft - kRight); }
  double py(double v) const { return height - kBottom - (v - y.lo) / (y.hi - y.lo) * (height - kTop - kBottom); }
};

void header(std::ostringstream& os, int width, int height, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"#ffffff\"/>\n";
  os << "<text x=\"" << num(width / 2.0) << "\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
     << "</text>\n";
}

void axes(std::ostringstream& os, const Frame& f, const std::string& x_label, const std::string& y_label) {
  const double x0 = kLeft;
  const double x1 = f.width - kRight;
  const double y0 = f.height - kBottom;
  const double y1 = kTop;
  os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\"" << num(x1 - x0) << "\" height=\""
     << num(y0 - y1) << "\" fill=\"none\" stroke=\"#000000\"/>\n";
  const double xs = nice_step(f.x.hi - f.x.lo);
  for (double v = std::ceil(f.x.lo / xs - 1e-9) * xs; v <= f.x.hi + xs * 1e-9; v += xs) {
    const double p = f.px(v);
    os << "<line x1=\"" << num(p) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(p) << "\" y2=\"" << num(y0 + 5)
       << "\" stroke=\"#000000\"/>\n";
    os << "<text x=\"" << num(p) << "\" y=\"" << num(y0 + 18) << "\" text-anchor=\"middle\">" << tick_label(v, xs)
       << "</text>\n";
  }
  const double ys = nice_step(f.y.hi - f.y.lo);
  for (double v = std::ceil(f.y.lo / ys - 1e-9) * ys; v <= f.y.hi + ys * 1e-9; v += ys) {
    const double p = f.py(v);
    os << "<line x1=\"" << num(x0 - 5) << "\" y1=\"" << num(p) << "\" x2=\"" << num(x0) << "\" y2=\"" << num(p)
       << "\" stroke=\"#000000\"/>\n";
    os << "<line x1=\"" << num(x0) << "\" y1=\"" << num(p) << "\" x2=\"" << num(x1) << "\" y2=\"" << num(p)
       << "\" stroke=\"#e0e0e0\"/>\n";
    os << "<text x=\"" << num(x0 - 8) << "\" y=\"" << num(p + 4) << "\" text-anchor=\"end\">" << tick_label(v, ys)
       << "</text>\n";
  }
  os << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(f.height - 18) << "\" text-anchor=\"middle\">"
     << escape(x_label) << "</text>\n";
  os << "<text x=\"20\" y=\"" << num((y0 + y1) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << num((y0 + y1) / 2) << ")\">" << escape(y_label) << "</text>\n";
}

std::string lerp_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * static_cast<double>(kViridis.size() - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(pos), kViridis.size() - 2);
  const double w = pos - static_cast<double>(i);
  auto channel = [](const char* hex, int k) {
    return static_cast<double>(std::stoi(std::string(hex + 1 + 2 * k, 2), nullptr, 16));
  };
  char buf[8];
  int c[3];
  for (int k = 0; k < 3; ++k)
    c[k] = static_cast<int>(std::lround(channel(kViridis[i], k) * (1 - w) + channel(kViridis[i + 1], k) * w));
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

}  // namespace

std::string write_svg(std::span<const Series> series, const PlotStyle& style) {
  if (series.empty()) throw InvalidParameter("svg: need at least one series");
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& s : series) {
    if (s.x.empty() || s.x.size() != s.y.size())
      throw InvalidParameter("svg: series '" + s.name + "' is empty or has mismatched x/y lengths");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  if (!std::isfinite(xlo)) throw InvalidParameter("svg: no finite points");
  if (style.y_min) ylo = *style.y_min;
  if (style.y_max) yhi = *style.y_max;
  Frame f{static_cast<double>(style.width), static_cast<double>(style.height), padded(xlo, xhi), padded(ylo, yhi)};

  std::ostringstream os;
  header(os, style.width, style.height, style.title);
  axes(os, f, style.x_label, style.y_label);

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % kPalette.size()];
    std::string points;
    auto flush = [&] {
      if (points.empty()) return;
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << points
         << "\"/>\n";
      points.clear();
    };
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        flush();
        continue;
      }
      const double y = std::clamp(s.y[i], f.y.lo, f.y.hi);
      points += (points.empty() ? "" : " ") + num(f.px(s.x[i])) + "," + num(f.py(y));
    }
    flush();
    if (style.markers || s.x.size() == 1) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        const double y = std::clamp(s.y[i], f.y.lo, f.y.hi);
        os << "<circle cx=\"" << num(f.px(s.x[i])) << "\" cy=\"" << num(f.py(y)) << "\" r=\"3\" fill=\"" << color
           << "\"/>\n";
      }
    }
  }

  const double lx = f.width - kRight + 15;
  os << "<g class=\"legend\">\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double ly = kTop + 10 + 18.0 * static_cast<double>(k);
    os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 20) << "\" y2=\"" << num(ly)
       << "\" stroke=\"" << kPalette[k % kPalette.size()] << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(lx + 26) << "\" y=\"" << num(ly + 4) << "\">" << escape(series[k].name)
       << "</text>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

std::string write_heatmap_svg(const Heatmap& map) {
  if (map.rows == 0 || map.cols == 0 || map.values.size() != map.rows * map.cols)
    throw InvalidParameter("svg: heatmap needs rows * cols values");
  double vlo = INFINITY, vhi = -INFINITY;
  for (double v : map.values) {
    if (!std::isfinite(v)) continue;
    vlo = std::min(vlo, v);
    vhi = std::max(vhi, v);
  }
  if (!std::isfinite(vlo)) throw InvalidParameter("svg: heatmap has no finite values");
  const bool categorical = !map.categories.empty();
  auto color_of = [&](double v) -> std::string {
    if (!std::isfinite(v)) return "#ffffff";
    if (categorical) {
      const auto i = static_cast<std::size_t>(std::max(0.0, v));
      return i == 0 ? "#f4f4f4" : kPalette[(i - 1) % kPalette.size()];
    }
    return lerp_color(vhi > vlo ? (v - vlo) / (vhi - vlo) : 0.5);
  };

  Frame f{static_cast<double>(map.width), static_cast<double>(map.height),
          {map.x0, map.x0 + map.dx * static_cast<double>(map.cols)},
          {map.y0, map.y0 + map.dy * static_cast<double>(map.rows)}};
  std::ostringstream os;
  header(os, map.width, map.height, map.title);
  std::vector<std::string> colors(map.values.size());
  for (std::size_t i = 0; i < colors.size(); ++i) colors[i] = color_of(map.values[i]);
  auto runs = [&](bool by_row) {
    const std::size_t outer = by_row ? map.rows : map.cols;
    const std::size_t inner = by_row ? map.cols : map.rows;
    std::size_t n = 0;
    for (std::size_t a = 0; a < outer; ++a)
      for (std::size_t b = 0; b < inner; ++b)
        if (b == 0 || colors[by_row ? a * map.cols + b : b * map.cols + a] !=
                          colors[by_row ? a * map.cols + b - 1 : (b - 1) * map.cols + a])
          ++n;
    return n;
  };
  // Merge equal neighbours along whichever axis gives fewer rectangles.
  const bool by_row = runs(true) <= runs(false);
  const std::size_t outer = by_row ? map.rows : map.cols;
  const std::size_t inner = by_row ? map.cols : map.rows;
  os << "<g shape-rendering=\"crispEdges\">\n";
  for (std::size_t a = 0; a < outer; ++a) {
    std::size_t b = 0;
    while (b < inner) {
      auto at = [&](std::size_t j) -> const std::string& {
        return colors[by_row ? a * map.cols + j : j * map.cols + a];
      };
      std::size_t e = b + 1;
      while (e < inner && at(e) == at(b)) ++e;
      const std::size_t c0 = by_row ? b : a, c1 = by_row ? e : a + 1;
      const std::size_t r0 = by_row ? a : b, r1 = by_row ? a + 1 : e;
      const double xa = f.px(map.x0 + map.dx * static_cast<double>(c0));
      const double xb = f.px(map.x0 + map.dx * static_cast<double>(c1));
      const double ya = f.py(map.y0 + map.dy * static_cast<double>(r1));
      const double yb = f.py(map.y0 + map.dy * static_cast<double>(r0));
      os << "<rect x=\"" << num(xa) << "\" y=\"" << num(ya) << "\" width=\"" << num(xb - xa) << "\" height=\""
         << num(yb - ya) << "\" fill=\"" << at(b) << "\"/>\n";
      b = e;
    }
  }
  os << "</g>\n";
  axes(os, f, map.x_label, map.y_label);

  const double lx = f.width - kRight + 15;
  os << "<g class=\"legend\">\n";
  if (categorical) {
    for (std::size_t k = 0; k < map.categories.size(); ++k) {
      const double ly = kTop + 10 + 18.0 * static_cast<double>(k);
      os << "<rect x=\"" << num(lx) << "\" y=\"" << num(ly - 6) << "\" width=\"14\" height=\"12\" fill=\""
         << color_of(static_cast<double>(k)) << "\" stroke=\"#000000\"/>\n";
      os << "<text x=\"" << num(lx + 22) << "\" y=\"" << num(ly + 4) << "\">" << escape(map.categories[k])
         << "</text>\n";
    }
  } else {
    const int steps = 20;
    const double top = kTop + 10;
    const double h = 200.0 / steps;
    for (int i = 0; i < steps; ++i) {
      const double t = 1.0 - (i + 0.5) / steps;
      os << "<rect x=\"" << num(lx) << "\" y=\"" << num(top + h * i) << "\" width=\"16\" height=\"" << num(h)
         << "\" fill=\"" << lerp_color(t) << "\"/>\n";
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", vhi);
    os << "<text x=\"" << num(lx + 22) << "\" y=\"" << num(top + 8) << "\">" << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.4g", vlo);
    os << "<text x=\"" << num(lx + 22) << "\" y=\"" << num(top + 200) << "\">" << buf << "</text>\n";
    os << "<text x=\"" << num(lx) << "\" y=\"" << num(top + 222) << "\">" << escape(map.value_label) << "</text>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace isac::cli
