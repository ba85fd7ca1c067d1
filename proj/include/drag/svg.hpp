#pragma once

#include <string>

#include "drag/kg.hpp"

namespace drag {

// Deterministic line-sketch rendering: one shape per node, dashed rectangles
// for groups, arrowed lines for non-containment edges, labels at node
// centers. Same graph in, same bytes out.
std::string render_sketch_svg(const TopologyGraph& g, int canvas_px = 1000);

}  // namespace drag
