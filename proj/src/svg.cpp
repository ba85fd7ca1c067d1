#include "drag/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace drag {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return std::string(buf);
}

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Point {
  double x, y;
};

// Intersection of the segment from the box center toward `toward` with the
// box boundary; the center itself when the box is degenerate.
Point boundary_point(const BBox& box, double scale, Point toward) {
  double cx = box.center_x() * scale;
  double cy = box.center_y() * scale;
  double hw = box.width() * scale / 2.0;
  double hh = box.height() * scale / 2.0;
  double dx = toward.x - cx;
  double dy = toward.y - cy;
  if (hw <= 0 && hh <= 0) return {cx, cy};
  double t = 1.0;
  if (std::abs(dx) > 1e-12 && hw > 0) t = std::min(t, hw / std::abs(dx));
  if (std::abs(dy) > 1e-12 && hh > 0) t = std::min(t, hh / std::abs(dy));
  if (std::abs(dx) <= 1e-12 && std::abs(dy) <= 1e-12) return {cx, cy};
  return {cx + dx * t, cy + dy * t};
}

}  // namespace

std::string render_sketch_svg(const TopologyGraph& g, int canvas_px) {
  const double scale = static_cast<double>(canvas_px);
  const double font_px = scale * 0.02;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << canvas_px
      << "\" height=\"" << canvas_px << "\" viewBox=\"0 0 " << canvas_px << " "
      << canvas_px << "\">\n";
  svg << "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\""
         " markerWidth=\"8\" markerHeight=\"8\" orient=\"auto-start-reverse\">"
         "<path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"black\"/></marker></defs>\n";

  auto groups = g.groups;
  std::sort(groups.begin(), groups.end(),
            [](const GroupRecord& a, const GroupRecord& b) {
              return a.group_id < b.group_id;
            });
  for (const auto& gr : groups) {
    if (!gr.bbox) continue;
    const BBox& b = *gr.bbox;
    svg << "<rect x=\"" << fmt(b.x1 * scale) << "\" y=\"" << fmt(b.y1 * scale)
        << "\" width=\"" << fmt(b.width() * scale) << "\" height=\""
        << fmt(b.height() * scale)
        << "\" fill=\"none\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n";
  }

  auto nodes = g.nodes;
  std::sort(nodes.begin(), nodes.end(),
            [](const NodeRecord& a, const NodeRecord& b) { return a.id < b.id; });
  std::map<std::string, BBox> boxes;
  for (const auto& n : nodes) {
    boxes[n.id] = n.bbox;
    const BBox& b = n.bbox;
    double x = b.x1 * scale, y = b.y1 * scale;
    double w = b.width() * scale, h = b.height() * scale;
    switch (n.shape) {
      case NodeShape::Circle:
      case NodeShape::Point:
        svg << "<ellipse cx=\"" << fmt(b.center_x() * scale) << "\" cy=\""
            << fmt(b.center_y() * scale) << "\" rx=\"" << fmt(w / 2)
            << "\" ry=\"" << fmt(h / 2)
            << "\" fill=\"none\" stroke=\"black\"/>\n";
        break;
      case NodeShape::Diamond:
        svg << "<polygon points=\"" << fmt(b.center_x() * scale) << "," << fmt(y)
            << " " << fmt(x + w) << "," << fmt(b.center_y() * scale) << " "
            << fmt(b.center_x() * scale) << "," << fmt(y + h) << " " << fmt(x)
            << "," << fmt(b.center_y() * scale)
            << "\" fill=\"none\" stroke=\"black\"/>\n";
        break;
      default:
        svg << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\""
            << fmt(w) << "\" height=\"" << fmt(h)
            << "\" fill=\"none\" stroke=\"black\"/>\n";
    }
    if (!n.name.empty()) {
      svg << "<text x=\"" << fmt(b.center_x() * scale) << "\" y=\""
          << fmt(b.center_y() * scale) << "\" font-size=\"" << fmt(font_px)
          << "\" text-anchor=\"middle\" dominant-baseline=\"middle\">"
          << escape_xml(n.name) << "</text>\n";
    }
  }

  auto edges = g.edges;
  std::sort(edges.begin(), edges.end(),
            [](const EdgeRecord& a, const EdgeRecord& b) {
              return std::tuple(a.source, a.target,
                                std::string(to_string(a.path_type))) <
                     std::tuple(b.source, b.target,
                                std::string(to_string(b.path_type)));
            });
  for (const auto& e : edges) {
    if (e.path_type == PathType::Containment) continue;
    auto sit = boxes.find(e.source);
    auto tit = boxes.find(e.target);
    if (sit == boxes.end() || tit == boxes.end()) continue;
    Point sc{sit->second.center_x() * scale, sit->second.center_y() * scale};
    Point tc{tit->second.center_x() * scale, tit->second.center_y() * scale};
    Point from = boundary_point(sit->second, scale, tc);
    Point to = boundary_point(tit->second, scale, sc);
    if (e.direction == Direction::Backward) std::swap(from, to);
    svg << "<line x1=\"" << fmt(from.x) << "\" y1=\"" << fmt(from.y)
        << "\" x2=\"" << fmt(to.x) << "\" y2=\"" << fmt(to.y)
        << "\" stroke=\"black\"";
    if (e.direction != Direction::Undirected) svg << " marker-end=\"url(#arrow)\"";
    if (e.direction == Direction::Bidirectional)
      svg << " marker-start=\"url(#arrow)\"";
    svg << "/>\n";
  }

  svg << "</svg>\n";
  return svg.str();
}

}  // namespace drag
