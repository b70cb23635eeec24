#include "unirec/plot.hpp"

#include "unirec/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace unirec {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 170, kTop = 50, kBottom = 60;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string escape(const std::string &text) {
  std::string out;
  for (char c : text) {
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

std::string gray(double intensity) {
  const int level = static_cast<int>(std::lround(255.0 * std::clamp(intensity, 0.0, 1.0)));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", level, level, level);
  return buf;
}

/// Cell edges on an axis: midpoints between neighbours, half a step beyond the ends.
std::vector<double> edges(const std::vector<double> &axis) {
  std::vector<double> e(axis.size() + 1);
  if (axis.size() == 1) {
    e[0] = axis[0] - 0.5;
    e[1] = axis[0] + 0.5;
    return e;
  }
  for (std::size_t i = 1; i < axis.size(); ++i) e[i] = 0.5 * (axis[i - 1] + axis[i]);
  e.front() = axis.front() - (e[1] - axis.front());
  e.back() = axis.back() + (axis.back() - e[axis.size() - 1]);
  return e;
}

const char *kCurveColors[] = {"#1f4fd8", "#d81f3c", "#1f9d55", "#b8860b"};

} // namespace

std::string render_svg(const PhaseGrid &grid, const std::vector<TheoryCurve> &overlays, const std::string &title,
                       ColorMap color_map) {
  const auto &plan = grid.plan;
  const auto xe = edges(plan.structure_axis);
  const auto ye = edges(plan.delta_axis);
  const double x0 = xe.front(), x1 = xe.back(), y0 = ye.front(), y1 = ye.back();
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - y0) / (y1 - y0) * ph; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  svg << "<title>" << escape(title) << "</title>\n";
  svg << "<text x=\"" << num(kWidth / 2) << "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">" << escape(title)
      << "</text>\n";

  svg << "<g id=\"heatmap\">\n";
  for (std::size_t si = 0; si < plan.structure_axis.size(); ++si)
    for (std::size_t di = 0; di < plan.delta_axis.size(); ++di) {
      const CellStats &c = grid.cell(di, si);
      double intensity = c.rate();
      if (color_map == ColorMap::MeanRelError) {
        // log10 error mapped from [1e-6, 1] to white..black
        const double e = std::max(c.mean_rel_error, 1e-6);
        intensity = std::clamp(-std::log10(e) / 6.0, 0.0, 1.0);
      }
      const double left = px(xe[si]), right = px(xe[si + 1]);
      const double top = py(ye[di + 1]), bottom = py(ye[di]);
      svg << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(right - left)
          << "\" height=\"" << num(bottom - top) << "\" fill=\"" << gray(intensity) << "\"/>\n";
    }
  svg << "</g>\n";

  // Axes
  svg << "<g id=\"axes\" stroke=\"#000000\" stroke-width=\"1\">\n";
  svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(kLeft + pw) << "\" y2=\""
      << num(kTop + ph) << "\"/>\n";
  svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft) << "\" y2=\""
      << num(kTop + ph) << "\"/>\n";
  svg << "</g>\n";
  svg << "<g id=\"ticks\" font-size=\"11\">\n";
  for (double s : plan.structure_axis)
    svg << "<text x=\"" << num(px(s)) << "\" y=\"" << num(kTop + ph + 16) << "\" text-anchor=\"middle\">" << num(s)
        << "</text>\n";
  const std::size_t ystride = std::max<std::size_t>(1, plan.delta_axis.size() / 10);
  for (std::size_t i = 0; i < plan.delta_axis.size(); i += ystride)
    svg << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(plan.delta_axis[i]) + 4)
        << "\" text-anchor=\"end\">" << num(plan.delta_axis[i]) << "</text>\n";
  svg << "</g>\n";
  const bool rank_axis = plan.truth == TruthModel::LowRankPsd || plan.truth == TruthModel::SparseLowRankPsd;
  const std::string xlabel = rank_axis ? "rank r" : "sparsity s";
  const std::string ylabel = plan.truth == TruthModel::SparseSymmetric ? "delta = m/n^2" : "delta = m/n";
  svg << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 16) << "\" text-anchor=\"middle\">"
      << xlabel << "</text>\n";
  svg << "<text x=\"18\" y=\"" << num(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << num(kTop + ph / 2) << ")\">" << ylabel << "</text>\n";

  // Overlays
  std::size_t color = 0;
  for (const auto &curve : overlays) {
    std::string points;
    for (std::size_t i = 0; i < curve.structure_axis.size(); ++i) {
      const double s = curve.structure_axis[i], d = curve.delta_star[i];
      if (s < x0 || s > x1 || d < y0 || d > y1) continue;
      if (!points.empty()) points += ' ';
      points += num(px(s)) + "," + num(py(d));
    }
    svg << "<polyline fill=\"none\" stroke=\"" << kCurveColors[color % 4] << "\" stroke-width=\"2\" points=\""
        << points << "\"/>\n";
    ++color;
  }

  // Legend
  const double lx = kLeft + pw + 16;
  double ly = kTop + 10;
  svg << "<g id=\"legend\" font-size=\"11\">\n";
  svg << "<text x=\"" << num(lx) << "\" y=\"" << num(ly) << "\">"
      << (color_map == ColorMap::SuccessRate ? "success rate" : "mean rel. error") << "</text>\n";
  ly += 14;
  svg << "<text x=\"" << num(lx) << "\" y=\"" << num(ly) << "\">"
      << (color_map == ColorMap::SuccessRate ? "black 0, white 1" : "black 1, white 1e-6") << "</text>\n";
  color = 0;
  for (const auto &curve : overlays) {
    ly += 18;
    svg << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(lx + 20) << "\" y2=\""
        << num(ly - 4) << "\" stroke=\"" << kCurveColors[color % 4] << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << num(lx + 26) << "\" y=\"" << num(ly) << "\">" << to_string(curve.method) << "</text>\n";
    ++color;
  }
  svg << "</g>\n";
  svg << "</svg>\n";
  return svg.str();
}

void plot(const PlotSpec &spec) {
  const PhaseGrid grid = load_run(spec.grid_path);
  std::vector<TheoryCurve> overlays;
  for (const auto &path : spec.theory_csv) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    for (auto &c : parse_theory_csv(buf.str())) overlays.push_back(std::move(c));
  }
  const std::string svg = render_svg(grid, overlays, spec.title, spec.color_map);
  std::ofstream out(spec.output, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + spec.output + " for writing");
  out << svg;
  if (!out) throw IoError("failed writing " + spec.output);
}

} // namespace unirec
