#pragma once

// SVG and polygon-JSON export of a realized design.

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>

#include <json.hpp>

#include "strata/design_space.hpp"

namespace strata {

namespace detail {

inline nlohmann::json points_json(const std::vector<Point2>& pts) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& p : pts) a.push_back({p.x, p.y});
  return a;
}

/// Closed ground region: the board bottom edge plus the spline top edge.
inline std::vector<Point2> ground_region(const GeometryModel& g) {
  std::vector<Point2> pts;
  pts.push_back({0.0, 0.0});
  pts.insert(pts.end(), g.ground_profile.points.begin(), g.ground_profile.points.end());
  pts.push_back({g.params.width, 0.0});
  return pts;
}

}  // namespace detail

inline nlohmann::json geometry_to_json(const GeometryModel& g) {
  const auto& p = g.params;
  return {
      {"units", "mm"},
      {"radiator", detail::points_json(g.radiator.points)},
      {"ground", detail::points_json(g.ground_profile.points)},
      {"feed", detail::points_json(g.feed.points)},
      {"extension", detail::points_json(g.extension.points)},
      {"features",
       {{"perimeter", g.features.perimeter},
        {"enclosed_area", g.features.enclosed_area},
        {"mean_ground_height", g.features.mean_ground_height},
        {"feed_length", g.features.feed_length},
        {"bounding_area", g.features.bounding_area}}},
      {"derived",
       {{"X", p.width},
        {"Y", p.height},
        {"l2", p.stub_length},
        {"l_fr", p.feed_relief},
        {"S", p.radiator_scale},
        {"o", p.radiator_x},
        {"w_f", p.feed_width},
        {"l_f", p.feed_length},
        {"l1", p.arm_length},
        {"w1", p.arm_width}}},
  };
}

/// SVG drawing to scale, one user unit per 0.1 mm, y axis pointing up.
inline std::string geometry_to_svg(const GeometryModel& g) {
  constexpr double unit = 10.0;  // user units per mm
  constexpr double margin = 2.0;  // mm

  double xmin = 0, xmax = g.params.width, ymin = 0, ymax = g.params.height;
  for (const auto* o : {&g.radiator, &g.ground_profile, &g.feed, &g.extension}) {
    for (const auto& p : o->points) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  }
  xmin -= margin;
  ymin -= margin;
  xmax += margin;
  ymax += margin + 4.0;  // room for the legend

  auto px = [&](double x) { return (x - xmin) * unit; };
  auto py = [&](double y) { return (ymax - y) * unit; };
  auto path = [&](const std::vector<Point2>& pts, bool closed) {
    std::ostringstream os;
    os.precision(6);
    os << std::fixed;
    for (std::size_t i = 0; i < pts.size(); ++i) os << (i ? " L " : "M ") << px(pts[i].x) << ' ' << py(pts[i].y);
    if (closed) os << " Z";
    return os.str();
  };

  std::ostringstream svg;
  svg.precision(6);
  svg << std::fixed;
  const double w = (xmax - xmin) * unit;
  const double h = (ymax - ymin) * unit;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << (xmax - xmin) << "mm\" height=\"" << (ymax - ymin)
      << "mm\" viewBox=\"0 0 " << w << ' ' << h << "\">\n"
      << "  <desc>Spline-parameterized monopole; 1 user unit = 0.1 mm; substrate eps_r 3.38, thickness 0.813 mm. "
         "Extension attached at the right board edge.</desc>\n"
      << "  <rect x=\"" << px(0) << "\" y=\"" << py(g.params.height) << "\" width=\"" << g.params.width * unit
      << "\" height=\"" << g.params.height * unit << "\" fill=\"none\" stroke=\"#999999\" stroke-dasharray=\"4 4\"/>\n";
  auto layer = [&](const char* id, const char* color, const std::string& d, double opacity) {
    svg << "  <g id=\"" << id << "\"><title>" << id << "</title><path d=\"" << d << "\" fill=\"" << color
        << "\" fill-opacity=\"" << opacity << "\" stroke=\"" << color << "\" stroke-width=\"1\"/></g>\n";
  };
  layer("ground", "#4c72b0", path(detail::ground_region(g), true), 0.45);
  layer("extension", "#55a868", path(g.extension.points, true), 0.6);
  layer("feed", "#c44e52", path(g.feed.points, true), 0.8);
  layer("radiator", "#dd8452", path(g.radiator.points, true), 0.7);

  const char* names[] = {"radiator", "feed", "ground", "extension"};
  const char* colors[] = {"#dd8452", "#c44e52", "#4c72b0", "#55a868"};
  for (int i = 0; i < 4; ++i) {
    const double lx = px(xmin + margin) + i * 90.0;
    const double ly = py(ymax - 1.5);
    svg << "  <rect x=\"" << lx << "\" y=\"" << ly - 8 << "\" width=\"10\" height=\"10\" fill=\"" << colors[i]
        << "\"/><text x=\"" << lx + 14 << "\" y=\"" << ly << "\" font-size=\"12\">" << names[i] << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace strata
