#include "admd/plot.hpp"

#include "admd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace admd::plot {

namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '&': out += "&amp;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
  return out;
}

} // namespace

std::string render_svg(const std::string &title, const std::vector<Polyline> &lines,
                       const std::vector<std::string> &annotations, int size) {
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  for (const auto &l : lines) {
    if (l.points.rows() != 2) {
      throw InputError("plot: polylines must be 2-D");
    }
    for (Eigen::Index j = 0; j < l.points.cols(); ++j) {
      if (!l.points.col(j).allFinite()) {
        continue;
      }
      xmin = std::min(xmin, l.points(0, j));
      xmax = std::max(xmax, l.points(0, j));
      ymin = std::min(ymin, l.points(1, j));
      ymax = std::max(ymax, l.points(1, j));
    }
  }
  if (!(xmax >= xmin)) {
    xmin = ymin = -1.0;
    xmax = ymax = 1.0;
  }
  const double margin = 30.0;
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
  const double scale = (size - 2.0 * margin) / span;
  const double cx = 0.5 * (xmin + xmax);
  const double cy = 0.5 * (ymin + ymax);
  auto px = [&](double x) { return 0.5 * size + (x - cx) * scale; };
  auto py = [&](double y) { return 0.5 * size - (y - cy) * scale; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"10\" y=\"18\" font-family=\"sans-serif\" font-size=\"14\">" << escape(title)
      << "</text>\n";
  for (const auto &l : lines) {
    svg << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"" << fixed(l.width)
        << "\" stroke-opacity=\"" << fixed(l.opacity) << "\" points=\"";
    bool first = true;
    for (Eigen::Index j = 0; j < l.points.cols(); ++j) {
      if (!l.points.col(j).allFinite()) {
        continue;
      }
      svg << (first ? "" : " ") << fixed(px(l.points(0, j))) << ',' << fixed(py(l.points(1, j)));
      first = false;
    }
    svg << "\"/>\n";
  }
  double y = size - 10.0 - 14.0 * static_cast<double>(annotations.size() ? annotations.size() - 1 : 0);
  for (const auto &a : annotations) {
    svg << "<text x=\"10\" y=\"" << fixed(y) << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#b00\">"
        << escape(a) << "</text>\n";
    y += 14.0;
  }
  svg << "</svg>\n";
  return svg.str();
}

} // namespace admd::plot
