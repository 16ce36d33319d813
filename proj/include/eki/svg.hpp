#pragma once

// Minimal static SVG line plots: filled bands, polylines, axes with five
// evenly spaced ticks per axis.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eki/io.hpp"

namespace eki {

struct LineStyle {
  std::string color = "black";
  double width = 1.5;
  std::string dash;  // SVG stroke-dasharray, empty for solid
  double opacity = 1.0;
};

class SvgPlot {
 public:
  SvgPlot(std::string title, std::string xlabel, std::string ylabel)
      : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

  void band(const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
            const std::string& color = "#6fa8dc", double opacity = 0.45) {
    extend(x, lo);
    extend(x, hi);
    bands_.push_back({x, lo, hi, color, opacity});
  }

  void line(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const LineStyle& style, std::string label = {}) {
    extend(x, y);
    lines_.push_back({x, y, style, std::move(label)});
  }

  std::string str() const {
    const double x0 = xmin_, x1 = xmax_ > xmin_ ? xmax_ : xmin_ + 1.0;
    double y0 = ymin_, y1 = ymax_ > ymin_ ? ymax_ : ymin_ + 1.0;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); };
    auto py = [&](double y) { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); };
    auto pt = [&](double x, double y) { return format_fixed(px(x), 2) + "," + format_fixed(py(y), 2); };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) + "\" height=\"" +
         std::to_string(kHeight) + "\" viewBox=\"0 0 " + std::to_string(kWidth) + " " + std::to_string(kHeight) +
         "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + std::to_string(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
         title_ + "</text>\n";

    for (const auto& b : bands_) {
      s += "<polygon class=\"band\" fill=\"" + b.color + "\" fill-opacity=\"" + format_fixed(b.opacity, 2) +
           "\" stroke=\"none\" points=\"";
      for (Eigen::Index i = 0; i < b.x.size(); ++i) s += pt(b.x[i], b.hi[i]) + " ";
      for (Eigen::Index i = b.x.size() - 1; i >= 0; --i) s += pt(b.x[i], b.lo[i]) + " ";
      s += "\"/>\n";
    }
    for (const auto& l : lines_) {
      s += "<polyline";
      if (!l.label.empty()) s += " class=\"" + l.label + "\"";
      s += " fill=\"none\" stroke=\"" + l.style.color + "\" stroke-width=\"" + format_fixed(l.style.width, 2) +
           "\" stroke-opacity=\"" + format_fixed(l.style.opacity, 2) + "\"";
      if (!l.style.dash.empty()) s += " stroke-dasharray=\"" + l.style.dash + "\"";
      s += " points=\"";
      for (Eigen::Index i = 0; i < l.x.size(); ++i) s += pt(l.x[i], l.y[i]) + " ";
      s += "\"/>\n";
    }

    // axes
    const double ax0 = kLeft, ax1 = kWidth - kRight, ay0 = kHeight - kBottom, ay1 = kTop;
    s += "<line x1=\"" + format_fixed(ax0, 2) + "\" y1=\"" + format_fixed(ay0, 2) + "\" x2=\"" +
         format_fixed(ax1, 2) + "\" y2=\"" + format_fixed(ay0, 2) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + format_fixed(ax0, 2) + "\" y1=\"" + format_fixed(ay0, 2) + "\" x2=\"" +
         format_fixed(ax0, 2) + "\" y2=\"" + format_fixed(ay1, 2) + "\" stroke=\"black\"/>\n";
    for (int t = 0; t < kTicks; ++t) {
      const double fx = x0 + (x1 - x0) * t / (kTicks - 1);
      const double fy = y0 + (y1 - y0) * t / (kTicks - 1);
      s += "<text x=\"" + format_fixed(px(fx), 2) + "\" y=\"" + format_fixed(ay0 + 16, 2) +
           "\" text-anchor=\"middle\" font-size=\"10\">" + tick_label(fx) + "</text>\n";
      s += "<text x=\"" + format_fixed(ax0 - 4, 2) + "\" y=\"" + format_fixed(py(fy) + 3, 2) +
           "\" text-anchor=\"end\" font-size=\"10\">" + tick_label(fy) + "</text>\n";
    }
    s += "<text x=\"" + format_fixed(0.5 * (ax0 + ax1), 2) + "\" y=\"" + std::to_string(kHeight - 6) +
         "\" text-anchor=\"middle\" font-size=\"12\">" + xlabel_ + "</text>\n";
    s += "<text x=\"14\" y=\"" + format_fixed(0.5 * (ay0 + ay1), 2) +
         "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 " + format_fixed(0.5 * (ay0 + ay1), 2) +
         ")\">" + ylabel_ + "</text>\n";
    s += "</svg>\n";
    return s;
  }

 private:
  static constexpr int kWidth = 480, kHeight = 360, kLeft = 60, kRight = 20, kTop = 32, kBottom = 44, kTicks = 5;

  struct Band {
    Eigen::VectorXd x, lo, hi;
    std::string color;
    double opacity;
  };
  struct Line {
    Eigen::VectorXd x, y;
    LineStyle style;
    std::string label;
  };

  static std::string tick_label(double v) {
    if (v != 0.0 && (std::abs(v) < 1e-2 || std::abs(v) >= 1e4)) {
      char buf[32];
      const auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 1);
      return std::string(buf, r.ptr);
    }
    return format_fixed(v, 2);
  }

  void extend(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() == 0) return;
    xmin_ = std::min(xmin_, x.minCoeff());
    xmax_ = std::max(xmax_, x.maxCoeff());
    ymin_ = std::min(ymin_, y.minCoeff());
    ymax_ = std::max(ymax_, y.maxCoeff());
  }

  std::string title_, xlabel_, ylabel_;
  std::vector<Band> bands_;
  std::vector<Line> lines_;
  double xmin_ = HUGE_VAL, xmax_ = -HUGE_VAL, ymin_ = HUGE_VAL, ymax_ = -HUGE_VAL;
};

}  // namespace eki
