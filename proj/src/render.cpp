#include "ptrack/render.hpp"

#include <algorithm>
#include <limits>

#include "ptrack/io.hpp"

namespace ptrack {

namespace {

struct Bounds {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();

  void add(const TrajectorySet& set) {
    for (const auto& [id, points] : set.tracks) {
      for (const TrajectoryPoint& p : points) {
        min_x = std::min(min_x, p.position.x);
        min_y = std::min(min_y, p.position.y);
        max_x = std::max(max_x, p.position.x);
        max_y = std::max(max_y, p.position.y);
      }
    }
  }
  bool empty() const { return min_x > max_x; }
};

void draw(std::string& out, const TrajectorySet& set, const std::string& color, const std::string& cls,
          double stroke, double dx, double dy) {
  out += "<g class=\"" + cls + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" +
         format_number(stroke) + "\">\n";
  for (const auto& [id, points] : set.tracks) {
    std::size_t i = 0;
    while (i < points.size()) {
      std::size_t j = i + 1;
      while (j < points.size() && points[j].frame == points[j - 1].frame + 1) ++j;
      if (j - i == 1) {
        out += "<circle data-id=\"" + std::to_string(id) + "\" cx=\"" + format_number(points[i].position.x + dx) +
               "\" cy=\"" + format_number(points[i].position.y + dy) + "\" r=\"" + format_number(stroke) +
               "\"/>\n";
      } else {
        out += "<polyline data-id=\"" + std::to_string(id) + "\" points=\"";
        for (std::size_t k = i; k < j; ++k) {
          if (k > i) out += ' ';
          out += format_number(points[k].position.x + dx) + ',' + format_number(points[k].position.y + dy);
        }
        out += "\"/>\n";
      }
      i = j;
    }
  }
  out += "</g>\n";
}

}  // namespace

std::string render_svg(const TrajectorySet& gt, const TrajectorySet& pred, const RenderOptions& options) {
  Bounds b;
  b.add(gt);
  b.add(pred);
  if (b.empty()) b = Bounds{0.0, 0.0, 0.0, 0.0};
  const double dx = options.margin - std::min(b.min_x, 0.0);
  const double dy = options.margin - std::min(b.min_y, 0.0);
  const double width = options.width > 0.0 ? options.width : std::max(b.max_x, 0.0) + dx + options.margin;
  const double height = options.height > 0.0 ? options.height : std::max(b.max_y, 0.0) + dy + options.margin;

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_number(width) + "\" height=\"" +
         format_number(height) + "\" viewBox=\"0 0 " + format_number(width) + ' ' + format_number(height) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  draw(out, gt, options.gt_color, "gt", options.stroke_width, dx, dy);
  draw(out, pred, options.pred_color, "pred", options.stroke_width, dx, dy);
  out += "</svg>\n";
  return out;
}

}  // namespace ptrack
