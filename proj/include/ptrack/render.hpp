#pragma once

#include <string>

#include "ptrack/metrics.hpp"

namespace ptrack {

struct RenderOptions {
  double width = 0.0;   // canvas size; 0 fits the trajectories
  double height = 0.0;
  double margin = 10.0;
  double stroke_width = 1.5;
  std::string gt_color = "#00a000";
  std::string pred_color = "#d00000";
};

/// Static SVG overlay: one polyline per trajectory, ground truth drawn
/// beneath predictions. A gap in a trajectory's frames breaks its line.
std::string render_svg(const TrajectorySet& gt, const TrajectorySet& pred, const RenderOptions& options = {});

}  // namespace ptrack
