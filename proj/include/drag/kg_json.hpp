#pragma once

#include "drag/kg.hpp"
#include "json.hpp"

namespace drag {

// Graph body object {nodes, edges, groups, texts, layout} in canonical order.
nlohmann::ordered_json graph_body_to_json(const TopologyGraph& g);

// Accepts either a full record ({diagram_id, image_ref, graph}) or a bare
// graph body. Same contract as parse_graph_record, minus the text parsing.
TopologyGraph graph_from_json(const nlohmann::ordered_json& j);

}  // namespace drag
