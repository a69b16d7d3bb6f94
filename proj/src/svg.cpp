#include "fieldgen/svg.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace fieldgen {

namespace {

constexpr int kWidth = 480;
constexpr int kHeight = 360;
constexpr int kMarginLeft = 56;
constexpr int kMarginRight = 16;
constexpr int kMarginTop = 32;
constexpr int kMarginBottom = 44;

const char* kColors[] = {"#2166ac", "#1a9850", "#d73027", "#7b3294",
                         "#e08214", "#35978f", "#c51b7d", "#636363"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Canvas {
  std::ostringstream body;
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;

  double px(double x) const {
    return kMarginLeft + (x - x_lo) / (x_hi - x_lo) *
                             (kWidth - kMarginLeft - kMarginRight);
  }
  double py(double y) const {
    return kHeight - kMarginBottom -
           (y - y_lo) / (y_hi - y_lo) * (kHeight - kMarginTop - kMarginBottom);
  }

  void line(double x1, double y1, double x2, double y2, const std::string& color,
            double width = 1.0, bool dashed = false) {
    body << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\""
         << num(x2) << "\" y2=\"" << num(y2) << "\" stroke=\"" << color
         << "\" stroke-width=\"" << num(width) << "\""
         << (dashed ? " stroke-dasharray=\"4 3\"" : "") << "/>\n";
  }
  void circle(double x, double y, double r, const std::string& color) {
    body << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\""
         << num(r) << "\" fill=\"" << color << "\"/>\n";
  }
  void text(double x, double y, const std::string& s, int size = 11,
            const std::string& anchor = "middle") {
    body << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\""
         << size << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor
         << "\">" << s << "</text>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts,
                const std::string& color, double width = 1.5) {
    body << "<polyline fill=\"none\" stroke=\"" << color
         << "\" stroke-width=\"" << num(width) << "\" points=\"";
    for (const auto& [x, y] : pts) body << num(x) << ',' << num(y) << ' ';
    body << "\"/>\n";
  }

  void axes(const std::string& x_label, const std::string& y_label,
            const std::vector<double>& x_ticks, const std::vector<double>& y_ticks) {
    const double x0 = px(x_lo), x1 = px(x_hi);
    const double y0 = py(y_lo), y1 = py(y_hi);
    line(x0, y0, x1, y0, "#000000");
    line(x0, y0, x0, y1, "#000000");
    for (double t : x_ticks) {
      line(px(t), y0, px(t), y0 + 4, "#000000");
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", t);
      text(px(t), y0 + 17, buf, 10);
    }
    for (double t : y_ticks) {
      line(x0 - 4, py(t), x0, py(t), "#000000");
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", t);
      text(x0 - 8, py(t) + 4, buf, 10, "end");
    }
    text((x0 + x1) / 2, kHeight - 8, x_label, 12);
    body << "<text x=\"14\" y=\"" << num((y0 + y1) / 2)
         << "\" font-size=\"12\" font-family=\"sans-serif\" text-anchor=\""
         << "middle\" transform=\"rotate(-90 14 " << num((y0 + y1) / 2)
         << ")\">" << y_label << "</text>\n";
  }

  void write(const std::string& path, const std::string& title) {
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot open '" + path + "' for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
        << kHeight << "\">\n<rect width=\"" << kWidth << "\" height=\""
        << kHeight << "\" fill=\"#ffffff\"/>\n";
    out << "<text x=\"" << kWidth / 2
        << "\" y=\"18\" font-size=\"13\" font-family=\"sans-serif\" "
           "text-anchor=\"middle\" font-weight=\"bold\">"
        << title << "</text>\n";
    out << body.str() << "</svg>\n";
  }
};

std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
  const double span = hi - lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9; t += step)
    ticks.push_back(std::abs(t) < 1e-12 ? 0.0 : t);
  return ticks;
}

}  // namespace

void emit_curve_panel(const std::vector<GeneralizationCurve>& curves,
                      const std::string& title, const std::string& path) {
  if (curves.empty()) throw MissingDataError("emit_curve_panel: no curves");
  Canvas c;
  c.x_lo = -180.0;
  c.x_hi = 195.0;
  double y_lo = 0.0, y_hi = 0.0;
  for (const auto& curve : curves)
    for (const auto& pt : curve.points) {
      y_lo = std::min(y_lo, pt.mean - pt.sem);
      y_hi = std::max(y_hi, pt.mean + pt.sem);
    }
  const double pad = 0.1 * std::max(1e-6, y_hi - y_lo);
  c.y_lo = y_lo - pad;
  c.y_hi = y_hi + pad;

  c.axes("angular offset (deg)", "adaptation index",
         {-180, -135, -90, -45, 0, 45, 90, 135, 180},
         nice_ticks(c.y_lo, c.y_hi));
  if (c.y_lo < 0.0 && c.y_hi > 0.0)
    c.line(c.px(c.x_lo), c.py(0.0), c.px(c.x_hi), c.py(0.0), "#bbbbbb", 1.0, true);

  int color_index = 0;
  for (const auto& curve : curves) {
    const std::string color = kColors[color_index++ % 8];
    std::vector<std::pair<double, double>> pts;
    // duplicate the +180 entry at -180: they are the same measurement
    for (const auto& pt : curve.points)
      if (static_cast<int>(std::llround(pt.offset_deg)) == 180)
        pts.emplace_back(c.px(-180.0), c.py(pt.mean));
    for (const auto& pt : curve.points)
      pts.emplace_back(c.px(pt.offset_deg), c.py(pt.mean));
    c.polyline(pts, color);
    for (const auto& pt : curve.points) {
      c.circle(c.px(pt.offset_deg), c.py(pt.mean), 2.5, color);
      if (pt.sem > 0.0)
        c.line(c.px(pt.offset_deg), c.py(pt.mean - pt.sem), c.px(pt.offset_deg),
               c.py(pt.mean + pt.sem), color);
    }
  }
  c.write(path, title);
}

void emit_asymmetry_panel(const std::vector<AsymmetryRow>& rows,
                          const std::string& title, const std::string& path) {
  if (rows.empty()) throw MissingDataError("emit_asymmetry_panel: no rows");
  Canvas c;
  c.x_lo = -0.5;
  c.x_hi = static_cast<double>(rows.size()) - 0.5;
  double y_abs = 0.0;
  for (const auto& r : rows) y_abs = std::max(y_abs, std::abs(r.value));
  y_abs = std::max(y_abs * 1.2, 0.05);
  c.y_lo = -y_abs;
  c.y_hi = y_abs;

  c.axes("training direction (deg)", "asymmetry (+45 minus -45)", {},
         nice_ticks(c.y_lo, c.y_hi));
  c.line(c.px(c.x_lo), c.py(0.0), c.px(c.x_hi), c.py(0.0), "#000000", 1.0);
  const double bar_w =
      0.7 * (c.px(1.0) - c.px(0.0));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double x = c.px(static_cast<double>(i));
    const double y0 = c.py(0.0);
    const double y1 = c.py(rows[i].value);
    c.body << "<rect x=\"" << num(x - bar_w / 2) << "\" y=\""
           << num(std::min(y0, y1)) << "\" width=\"" << num(bar_w)
           << "\" height=\"" << num(std::abs(y1 - y0))
           << "\" fill=\"" << (rows[i].baseline_corrected ? "#2166ac" : "#1a9850")
           << "\"/>\n";
    char buf[16];
    std::snprintf(buf, sizeof buf, "%g", rows[i].anchor_deg);
    c.text(x, c.py(c.y_lo) + 17, buf, 10);
  }
  c.write(path, title);
}

void emit_representation_polar(const FitResult& fit, const std::string& title,
                               const std::string& path) {
  if (fit.groups.empty())
    throw MissingDataError("emit_representation_polar: fit has no groups");
  Canvas c;
  const double cx = kWidth / 2.0, cy = (kHeight + kMarginTop) / 2.0;
  double r_max = 0.5;
  for (const auto& g : fit.groups) r_max = std::max(r_max, g.amplitude);
  const double scale = (kHeight / 2.0 - kMarginTop - 10.0) / r_max;

  for (double ring : {0.5, 1.0}) {
    if (ring > r_max + 0.25) continue;
    c.body << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\""
           << num(ring * scale) << "\" fill=\"none\" stroke=\"#cccccc\""
           << " stroke-dasharray=\"3 3\"/>\n";
    c.text(cx + ring * scale + 2, cy - 2, num(ring), 9, "start");
  }
  for (int k = 0; k < 8; ++k) {
    const double th = deg2rad(45.0 * k);
    c.line(cx, cy, cx + (r_max * scale + 8) * std::cos(th),
           cy - (r_max * scale + 8) * std::sin(th), "#eeeeee");
  }

  int color_index = 0;
  for (const auto& g : fit.groups) {
    const std::string color = kColors[color_index++ % 8];
    std::vector<std::pair<double, double>> pts;
    for (int d = -180; d <= 180; d += 3) {
      const double delta = wrap_deg(d - g.group_deg -
                                    (fit.model == ModelKind::Standard ? g.mu_deg : 0.0));
      const double r = g.amplitude *
                       std::exp(-delta * delta / (2.0 * g.sigma_deg * g.sigma_deg));
      const double th = deg2rad(static_cast<double>(d));
      pts.emplace_back(cx + r * scale * std::cos(th), cy - r * scale * std::sin(th));
    }
    c.polyline(pts, color, 1.2);
  }
  c.write(path, title);
}

void emit_baseline_panel(const std::vector<AdaptationIndex>& indices,
                         const std::string& title, const std::string& path) {
  std::map<int, std::pair<double, int>> means;
  for (const auto& idx : indices) {
    if (idx.phase != Phase::Baseline) continue;
    auto& [sum, n] = means[static_cast<int>(std::llround(wrap_deg(idx.direction_deg)))];
    sum += idx.value;
    n += 1;
  }
  if (means.empty())
    throw MissingDataError("emit_baseline_panel: no baseline indices");

  Canvas c;
  c.x_lo = -22.5;
  c.x_hi = 337.5;
  double y_lo = 0.0, y_hi = 0.0;
  for (const auto& [_, acc] : means) {
    const double m = acc.first / acc.second;
    y_lo = std::min(y_lo, m);
    y_hi = std::max(y_hi, m);
  }
  const double pad = 0.15 * std::max(0.05, y_hi - y_lo);
  c.y_lo = y_lo - pad;
  c.y_hi = y_hi + pad;
  c.axes("reach direction (deg)", "baseline adaptation index",
         {0, 45, 90, 135, 180, 225, 270, 315}, nice_ticks(c.y_lo, c.y_hi));
  if (c.y_lo < 0.0) c.line(c.px(c.x_lo), c.py(0.0), c.px(c.x_hi), c.py(0.0),
                           "#bbbbbb", 1.0, true);

  std::vector<std::pair<double, double>> pts;
  for (const auto& [dir, acc] : means) {
    const double mean = acc.first / acc.second;
    const double x = dir < 0 ? dir + 360.0 : dir;
    pts.emplace_back(c.px(x), c.py(mean));
  }
  c.polyline(pts, kColors[0]);
  for (const auto& [x, y] : pts) c.circle(x, y, 3.0, kColors[0]);
  c.write(path, title);
}

}  // namespace fieldgen
