#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace admd::plot {

inline constexpr const char *kOriginal = "#1f77b4"; // blue
inline constexpr const char *kTrain = "#2ca02c";    // green
inline constexpr const char *kTest = "#ff7f0e";     // orange

struct Polyline {
  Eigen::MatrixXd points; ///< 2 x N
  std::string color;
  double opacity = 1.0;
  double width = 1.5;
};

/// Square SVG with all polylines fitted into a common frame. Output is a pure
/// function of the inputs (fixed 3-decimal formatting).
std::string render_svg(const std::string &title, const std::vector<Polyline> &lines,
                       const std::vector<std::string> &annotations = {}, int size = 400);

} // namespace admd::plot
