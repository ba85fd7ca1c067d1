#include "drag/kg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "drag/errors.hpp"
#include "drag/kg_json.hpp"

namespace drag {

using ordered_json = nlohmann::ordered_json;

namespace {

template <typename Enum>
struct NamePair {
  const char* name;
  Enum value;
};

constexpr NamePair<NodeType> kNodeTypes[] = {
    {"input", NodeType::Input},         {"output", NodeType::Output},
    {"module", NodeType::Module},       {"component", NodeType::Component},
    {"container", NodeType::Container}, {"connector", NodeType::Connector},
    {"branch", NodeType::Branch},       {"merge", NodeType::Merge},
    {"stage", NodeType::Stage},         {"visual", NodeType::Visual},
    {"text", NodeType::Text},           {"other", NodeType::Other},
};

constexpr NamePair<NodeShape> kNodeShapes[] = {
    {"rectangle", NodeShape::Rectangle}, {"circle", NodeShape::Circle},
    {"diamond", NodeShape::Diamond},     {"image_panel", NodeShape::ImagePanel},
    {"table", NodeShape::Table},         {"text", NodeShape::Text},
    {"container", NodeShape::Container}, {"point", NodeShape::Point},
    {"line", NodeShape::Line},           {"other", NodeShape::Other},
};

constexpr NamePair<Importance> kImportances[] = {
    {"major", Importance::Major},
    {"minor", Importance::Minor},
    {"connector", Importance::Connector},
    {"decorative", Importance::Decorative},
};

constexpr NamePair<PathType> kPathTypes[] = {
    {"flow", PathType::Flow},
    {"containment", PathType::Containment},
    {"feedback", PathType::Feedback},
    {"other", PathType::Other},
};

constexpr NamePair<Direction> kDirections[] = {
    {"forward", Direction::Forward},
    {"backward", Direction::Backward},
    {"bidirectional", Direction::Bidirectional},
    {"undirected", Direction::Undirected},
};

constexpr NamePair<FlowDirection> kFlowDirections[] = {
    {"horizontal", FlowDirection::Horizontal},
    {"vertical", FlowDirection::Vertical},
    {"mixed", FlowDirection::Mixed},
    {"unknown", FlowDirection::Unknown},
};

constexpr NamePair<TextKind> kTextKinds[] = {
    {"role_title", TextKind::RoleTitle},
    {"label", TextKind::Label},
    {"legend", TextKind::Legend},
    {"annotation", TextKind::Annotation},
};

template <typename Enum, size_t N>
const char* name_of(const NamePair<Enum> (&table)[N], Enum v) {
  for (const auto& p : table)
    if (p.value == v) return p.name;
  return table[N - 1].name;
}

template <typename Enum, size_t N>
Enum value_of(const NamePair<Enum> (&table)[N], const std::string& s, Enum fallback) {
  for (const auto& p : table)
    if (s == p.name) return p.value;
  return fallback;
}

double clip01(double v) {
  if (!std::isfinite(v)) return 0.0;
  return std::clamp(v, 0.0, 1.0);
}

std::string edge_label(const EdgeRecord& e) {
  return e.source + "->" + e.target;
}

}  // namespace

const char* to_string(NodeType v) { return name_of(kNodeTypes, v); }
const char* to_string(NodeShape v) { return name_of(kNodeShapes, v); }
const char* to_string(Importance v) { return name_of(kImportances, v); }
const char* to_string(PathType v) { return name_of(kPathTypes, v); }
const char* to_string(Direction v) { return name_of(kDirections, v); }
const char* to_string(FlowDirection v) { return name_of(kFlowDirections, v); }
const char* to_string(TextKind v) { return name_of(kTextKinds, v); }

NodeType node_type_from_string(const std::string& s) {
  return value_of(kNodeTypes, s, NodeType::Other);
}
NodeShape node_shape_from_string(const std::string& s) {
  return value_of(kNodeShapes, s, NodeShape::Other);
}
Importance importance_from_string(const std::string& s) {
  return value_of(kImportances, s, Importance::Major);
}
PathType path_type_from_string(const std::string& s) {
  return value_of(kPathTypes, s, PathType::Flow);
}
Direction direction_from_string(const std::string& s) {
  return value_of(kDirections, s, Direction::Forward);
}
FlowDirection flow_direction_from_string(const std::string& s) {
  return value_of(kFlowDirections, s, FlowDirection::Unknown);
}
TextKind text_kind_from_string(const std::string& s) {
  return value_of(kTextKinds, s, TextKind::Label);
}

const NodeRecord* TopologyGraph::find_node(const std::string& id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::string truncate_words(const std::string& s, size_t max_words) {
  auto words = split_words(s);
  if (words.size() > max_words) words.resize(max_words);
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& msg) {
  throw_error(ErrorKind::SchemaViolation, path + ": " + msg);
}

std::string get_string(const ordered_json& j, const char* key,
                       const std::string& path, const std::string& fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_string()) schema_error(path + "." + key, "expected string");
  return it->get<std::string>();
}

double get_number(const ordered_json& j, const char* key, const std::string& path,
                  double fallback, bool* found = nullptr) {
  auto it = j.find(key);
  if (found) *found = false;
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_number()) schema_error(path + "." + key, "expected number");
  if (found) *found = true;
  return it->get<double>();
}

BBox parse_bbox(const ordered_json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 4)
    schema_error(path, "expected [x1, y1, x2, y2]");
  for (const auto& v : j)
    if (!v.is_number()) schema_error(path, "expected numeric coordinates");
  return BBox{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
              j[3].get<double>()};
}

NodeRecord parse_node(const ordered_json& j, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected object");
  auto id_it = j.find("id");
  if (id_it == j.end()) schema_error(path + ".id", "missing node id");
  if (!id_it->is_string()) schema_error(path + ".id", "node id must be a string");
  NodeRecord n;
  n.id = id_it->get<std::string>();
  n.name = get_string(j, "name", path, "");
  // "type" is the extraction-prompt spelling, "node_type" the canonical one.
  n.node_type = node_type_from_string(
      get_string(j, "node_type", path, get_string(j, "type", path, "other")));
  n.shape = node_shape_from_string(get_string(j, "shape", path, "other"));
  if (auto it = j.find("bbox"); it != j.end() && !it->is_null())
    n.bbox = parse_bbox(*it, path + ".bbox");
  bool have_cx = false, have_cy = false;
  double cx = get_number(j, "center_x", path, 0.0, &have_cx);
  double cy = get_number(j, "center_y", path, 0.0, &have_cy);
  if (!have_cx) cx = get_number(j, "x", path, n.bbox.center_x(), &have_cx);
  if (!have_cy) cy = get_number(j, "y", path, n.bbox.center_y(), &have_cy);
  n.center_x = cx;
  n.center_y = cy;
  n.group = get_string(j, "group", path, "");
  n.importance =
      importance_from_string(get_string(j, "importance", path, "major"));
  return n;
}

EdgeRecord parse_edge(const ordered_json& j, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected object");
  EdgeRecord e;
  auto src = j.find("source");
  auto tgt = j.find("target");
  if (src == j.end()) schema_error(path + ".source", "missing edge source");
  if (tgt == j.end()) schema_error(path + ".target", "missing edge target");
  if (!src->is_string()) schema_error(path + ".source", "edge source must be a string");
  if (!tgt->is_string()) schema_error(path + ".target", "edge target must be a string");
  e.source = src->get<std::string>();
  e.target = tgt->get<std::string>();
  auto pt = j.find("path_type");
  if (pt != j.end() && pt->is_string()) {
    e.path_type = path_type_from_string(pt->get<std::string>());
    e.path_type_explicit = true;
  } else {
    e.path_type = PathType::Flow;
    e.path_type_explicit = false;
  }
  e.direction =
      direction_from_string(get_string(j, "direction", path, "forward"));
  if (auto it = j.find("bridged_from"); it != j.end() && it->is_array()) {
    for (const auto& v : *it)
      if (v.is_string()) e.bridged_from.push_back(v.get<std::string>());
  }
  return e;
}

GroupRecord parse_group(const ordered_json& j, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected object");
  GroupRecord g;
  auto id_it = j.find("group_id");
  if (id_it == j.end()) id_it = j.find("id");
  if (id_it != j.end()) {
    if (!id_it->is_string()) schema_error(path + ".group_id", "group id must be a string");
    g.group_id = id_it->get<std::string>();
  }
  g.label = get_string(j, "label", path, "");
  if (auto it = j.find("members"); it != j.end() && it->is_array())
    for (const auto& v : *it)
      if (v.is_string()) g.members.push_back(v.get<std::string>());
  if (auto it = j.find("bbox"); it != j.end() && !it->is_null())
    g.bbox = parse_bbox(*it, path + ".bbox");
  return g;
}

FreeText parse_text(const ordered_json& j, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected object");
  FreeText t;
  t.kind = text_kind_from_string(get_string(j, "kind", path, "label"));
  t.content = get_string(j, "content", path, "");
  if (auto it = j.find("anchor"); it != j.end() && !it->is_null())
    t.anchor = parse_bbox(*it, path + ".anchor");
  return t;
}

LayoutRecord parse_layout(const ordered_json& j, const std::string& path) {
  LayoutRecord l;
  if (!j.is_object()) return l;
  l.flow_direction = flow_direction_from_string(
      get_string(j, "flow_direction", path, "unknown"));
  l.topology_type = get_string(j, "topology_type", path, "");
  l.main_structure = get_string(j, "main_structure", path, "");
  auto read_ids = [&](const char* key, std::vector<std::string>& out) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_array()) return;
    for (const auto& v : *it)
      if (v.is_string()) out.push_back(v.get<std::string>());
  };
  read_ids("main_path", l.main_path);
  read_ids("reading_order", l.reading_order);
  read_ids("branch_points", l.branch_points);
  read_ids("merge_points", l.merge_points);
  if (auto it = j.find("feedback_edges"); it != j.end() && it->is_array()) {
    for (const auto& v : *it) {
      if (v.is_array() && v.size() == 2 && v[0].is_string() && v[1].is_string())
        l.feedback_edges.emplace_back(v[0].get<std::string>(),
                                      v[1].get<std::string>());
    }
  }
  return l;
}

}  // namespace

TopologyGraph graph_from_json(const ordered_json& j) {
  if (!j.is_object())
    schema_error("$", "record must be a JSON object");

  TopologyGraph g;
  g.diagram_id = get_string(j, "diagram_id", "$", "");
  g.image_ref = get_string(j, "image_ref", "$", "");

  const ordered_json* graph = &j;
  std::string base = "$";
  if (auto it = j.find("graph"); it != j.end()) {
    if (!it->is_object()) schema_error("$.graph", "expected object");
    graph = &*it;
    base = "$.graph";
  }

  auto nodes_it = graph->find("nodes");
  if (nodes_it == graph->end() || !nodes_it->is_array())
    schema_error(base + ".nodes", "missing nodes array");
  auto edges_it = graph->find("edges");
  if (edges_it == graph->end() || !edges_it->is_array())
    schema_error(base + ".edges", "missing edges array");

  for (size_t i = 0; i < nodes_it->size(); ++i)
    g.nodes.push_back(
        parse_node((*nodes_it)[i], base + ".nodes[" + std::to_string(i) + "]"));
  for (size_t i = 0; i < edges_it->size(); ++i)
    g.edges.push_back(
        parse_edge((*edges_it)[i], base + ".edges[" + std::to_string(i) + "]"));
  if (auto it = graph->find("groups"); it != graph->end() && it->is_array())
    for (size_t i = 0; i < it->size(); ++i)
      g.groups.push_back(
          parse_group((*it)[i], base + ".groups[" + std::to_string(i) + "]"));
  if (auto it = graph->find("texts"); it != graph->end() && it->is_array())
    for (size_t i = 0; i < it->size(); ++i)
      g.free_texts.push_back(
          parse_text((*it)[i], base + ".texts[" + std::to_string(i) + "]"));
  if (auto it = graph->find("layout"); it != graph->end())
    g.layout = parse_layout(*it, base + ".layout");
  return g;
}

TopologyGraph parse_graph_record(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw_error(ErrorKind::MalformedJson,
                "JSON syntax error at byte " + std::to_string(e.byte) + ": " +
                    e.what());
  }
  return graph_from_json(j);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

ordered_json bbox_to_json(const BBox& b) {
  return ordered_json::array({b.x1, b.y1, b.x2, b.y2});
}

ordered_json node_to_json(const NodeRecord& n) {
  ordered_json j;
  j["id"] = n.id;
  j["name"] = n.name;
  j["node_type"] = to_string(n.node_type);
  j["shape"] = to_string(n.shape);
  j["bbox"] = bbox_to_json(n.bbox);
  j["center_x"] = n.center_x;
  j["center_y"] = n.center_y;
  if (!n.group.empty()) j["group"] = n.group;
  j["importance"] = to_string(n.importance);
  return j;
}

ordered_json edge_to_json(const EdgeRecord& e) {
  ordered_json j;
  j["source"] = e.source;
  j["target"] = e.target;
  j["path_type"] = to_string(e.path_type);
  j["direction"] = to_string(e.direction);
  if (!e.bridged_from.empty()) j["bridged_from"] = e.bridged_from;
  return j;
}

ordered_json group_to_json(const GroupRecord& g) {
  ordered_json j;
  j["group_id"] = g.group_id;
  j["label"] = g.label;
  j["members"] = g.members;
  if (g.bbox) j["bbox"] = bbox_to_json(*g.bbox);
  return j;
}

ordered_json text_to_json(const FreeText& t) {
  ordered_json j;
  j["kind"] = to_string(t.kind);
  j["content"] = t.content;
  if (t.anchor) j["anchor"] = bbox_to_json(*t.anchor);
  return j;
}

ordered_json layout_to_json(const LayoutRecord& l) {
  ordered_json j;
  j["flow_direction"] = to_string(l.flow_direction);
  j["topology_type"] = l.topology_type;
  j["main_structure"] = l.main_structure;
  j["main_path"] = l.main_path;
  j["reading_order"] = l.reading_order;
  j["branch_points"] = l.branch_points;
  j["merge_points"] = l.merge_points;
  auto fb = ordered_json::array();
  for (const auto& [s, t] : l.feedback_edges)
    fb.push_back(ordered_json::array({s, t}));
  j["feedback_edges"] = fb;
  return j;
}

}  // namespace

ordered_json graph_body_to_json(const TopologyGraph& g) {
  auto nodes = g.nodes;
  std::sort(nodes.begin(), nodes.end(),
            [](const NodeRecord& a, const NodeRecord& b) { return a.id < b.id; });
  auto edges = g.edges;
  std::sort(edges.begin(), edges.end(),
            [](const EdgeRecord& a, const EdgeRecord& b) {
              return std::tuple(a.source, a.target, std::string(to_string(a.path_type))) <
                     std::tuple(b.source, b.target, std::string(to_string(b.path_type)));
            });
  auto groups = g.groups;
  std::sort(groups.begin(), groups.end(),
            [](const GroupRecord& a, const GroupRecord& b) {
              return a.group_id < b.group_id;
            });

  ordered_json body;
  body["nodes"] = ordered_json::array();
  for (const auto& n : nodes) body["nodes"].push_back(node_to_json(n));
  body["edges"] = ordered_json::array();
  for (const auto& e : edges) body["edges"].push_back(edge_to_json(e));
  body["groups"] = ordered_json::array();
  for (const auto& gr : groups) body["groups"].push_back(group_to_json(gr));
  body["texts"] = ordered_json::array();
  for (const auto& t : g.free_texts) body["texts"].push_back(text_to_json(t));
  body["layout"] = layout_to_json(g.layout);
  return body;
}

std::string serialize_graph_record(const TopologyGraph& g) {
  ordered_json j;
  j["diagram_id"] = g.diagram_id;
  j["image_ref"] = g.image_ref;
  j["graph"] = graph_body_to_json(g);
  return j.dump();
}

// ---------------------------------------------------------------------------
// Normalization

TopologyGraph normalize_graph(const TopologyGraph& g,
                              std::vector<std::string>* diagnostics) {
  auto note = [&](const std::string& msg) {
    if (diagnostics) diagnostics->push_back(msg);
  };

  TopologyGraph out;
  out.diagram_id = g.diagram_id;
  out.image_ref = g.image_ref;
  out.layout = g.layout;

  std::set<std::string> ids;
  for (const auto& n : g.nodes) {
    if (n.id.empty()) {
      note("dropped node without identifier");
      continue;
    }
    if (!ids.insert(n.id).second) {
      note("dropped duplicate node id '" + n.id + "'");
      continue;
    }
    NodeRecord c = n;
    double lo_x = clip01(std::min(c.bbox.x1, c.bbox.x2));
    double hi_x = clip01(std::max(c.bbox.x1, c.bbox.x2));
    double lo_y = clip01(std::min(c.bbox.y1, c.bbox.y2));
    double hi_y = clip01(std::max(c.bbox.y1, c.bbox.y2));
    c.bbox = BBox{lo_x, lo_y, hi_x, hi_y};
    c.center_x = c.bbox.center_x();
    c.center_y = c.bbox.center_y();
    out.nodes.push_back(std::move(c));
  }

  // A node is a container for the containment rule if its type or shape says so.
  std::set<std::string> container_ids;
  for (const auto& n : out.nodes)
    if (n.node_type == NodeType::Container || n.shape == NodeShape::Container)
      container_ids.insert(n.id);

  std::set<std::tuple<std::string, std::string, PathType>> edge_keys;
  for (const auto& e : g.edges) {
    if (!ids.count(e.source) || !ids.count(e.target)) {
      note("dropped edge " + edge_label(e) + " referencing missing node");
      continue;
    }
    if (e.source == e.target) {
      note("dropped self-loop on '" + e.source + "'");
      continue;
    }
    EdgeRecord c = e;
    if (!c.path_type_explicit && container_ids.count(c.target))
      c.path_type = PathType::Containment;
    c.path_type_explicit = true;
    if (!edge_keys.insert({c.source, c.target, c.path_type}).second) {
      note("dropped duplicate edge " + edge_label(e));
      continue;
    }
    std::erase_if(c.bridged_from, [&](const std::string& id) {
      return id == c.source || id == c.target;
    });
    out.edges.push_back(std::move(c));
  }

  std::set<std::string> group_ids;
  for (const auto& gr : g.groups) {
    if (!group_ids.insert(gr.group_id).second) {
      note("dropped duplicate group '" + gr.group_id + "'");
      continue;
    }
    GroupRecord c;
    c.group_id = gr.group_id;
    c.label = gr.label;
    std::set<std::string> seen;
    for (const auto& m : gr.members)
      if (ids.count(m) && seen.insert(m).second) c.members.push_back(m);
    if (c.members.empty()) {
      note("dropped group '" + gr.group_id + "' with no surviving members");
      continue;
    }
    BBox box = out.find_node(c.members.front())->bbox;
    for (const auto& m : c.members) {
      const BBox& b = out.find_node(m)->bbox;
      box.x1 = std::min(box.x1, b.x1);
      box.y1 = std::min(box.y1, b.y1);
      box.x2 = std::max(box.x2, b.x2);
      box.y2 = std::max(box.y2, b.y2);
    }
    c.bbox = box;
    out.groups.push_back(std::move(c));
  }

  std::set<std::string> surviving_groups;
  for (const auto& gr : out.groups) surviving_groups.insert(gr.group_id);
  for (auto& n : out.nodes)
    if (!n.group.empty() && !surviving_groups.count(n.group)) n.group.clear();

  for (const auto& t : g.free_texts) {
    if (t.content.empty()) {
      note("dropped empty free text");
      continue;
    }
    out.free_texts.push_back(t);
  }

  auto filter_ids = [&](std::vector<std::string>& list, bool dedupe) {
    std::set<std::string> seen;
    std::erase_if(list, [&](const std::string& id) {
      if (!ids.count(id)) return true;
      if (dedupe && !seen.insert(id).second) return true;
      return false;
    });
  };
  filter_ids(out.layout.main_path, /*dedupe=*/true);
  filter_ids(out.layout.reading_order, /*dedupe=*/true);
  filter_ids(out.layout.branch_points, /*dedupe=*/true);
  filter_ids(out.layout.merge_points, /*dedupe=*/true);
  std::set<std::pair<std::string, std::string>> fb_seen;
  std::erase_if(out.layout.feedback_edges, [&](const auto& p) {
    return !ids.count(p.first) || !ids.count(p.second) ||
           !fb_seen.insert(p).second;
  });

  if (out.nodes.empty() && !g.nodes.empty())
    note("no usable nodes; graph is empty after cleaning");
  return out;
}

// ---------------------------------------------------------------------------
// Layout inference

namespace {

// Directed pair adjacency over non-containment edges, deduplicated.
struct FlowView {
  std::vector<std::string> ids;  // sorted
  std::map<std::string, std::vector<std::string>> succ;
  std::map<std::string, std::vector<std::string>> pred;
  std::set<std::pair<std::string, std::string>> pairs;
};

FlowView flow_view(const TopologyGraph& g) {
  FlowView v;
  for (const auto& n : g.nodes) v.ids.push_back(n.id);
  std::sort(v.ids.begin(), v.ids.end());
  for (const auto& id : v.ids) {
    v.succ[id];
    v.pred[id];
  }
  for (const auto& e : g.edges) {
    if (e.path_type == PathType::Containment) continue;
    if (!v.pairs.insert({e.source, e.target}).second) continue;
    v.succ[e.source].push_back(e.target);
    v.pred[e.target].push_back(e.source);
  }
  for (auto& [_, lst] : v.succ) std::sort(lst.begin(), lst.end());
  for (auto& [_, lst] : v.pred) std::sort(lst.begin(), lst.end());
  return v;
}

// Back edges of a DFS over node ids in lexicographic order.
std::vector<std::pair<std::string, std::string>> find_feedback_edges(
    const FlowView& v) {
  std::vector<std::pair<std::string, std::string>> feedback;
  std::map<std::string, int> state;  // 0 unvisited, 1 on stack, 2 done
  std::function<void(const std::string&)> dfs = [&](const std::string& u) {
    state[u] = 1;
    for (const auto& w : v.succ.at(u)) {
      if (state[w] == 1)
        feedback.emplace_back(u, w);
      else if (state[w] == 0)
        dfs(w);
    }
    state[u] = 2;
  };
  for (const auto& id : v.ids)
    if (state[id] == 0) dfs(id);
  return feedback;
}

// Longest path in the DAG from any start to any goal; ties broken by
// lexicographically smallest id sequence. Empty when starts/goals are empty.
std::vector<std::string> longest_path(
    const FlowView& v,
    const std::set<std::pair<std::string, std::string>>& removed,
    const std::set<std::string>& starts, const std::set<std::string>& goals) {
  // best[u]: best path starting at u and ending in goals; cached.
  std::map<std::string, std::optional<std::vector<std::string>>> best;
  auto better = [](const std::vector<std::string>& a,
                   const std::vector<std::string>& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a < b;
  };
  std::function<const std::optional<std::vector<std::string>>&(const std::string&)>
      solve = [&](const std::string& u)
      -> const std::optional<std::vector<std::string>>& {
    auto it = best.find(u);
    if (it != best.end()) return it->second;
    best[u] = std::nullopt;  // mark before recursion; DAG, so no cycles
    std::optional<std::vector<std::string>> result;
    if (goals.count(u)) result = std::vector<std::string>{u};
    for (const auto& w : v.succ.at(u)) {
      if (removed.count({u, w})) continue;
      const auto& sub = solve(w);
      if (!sub) continue;
      std::vector<std::string> cand;
      cand.reserve(sub->size() + 1);
      cand.push_back(u);
      cand.insert(cand.end(), sub->begin(), sub->end());
      if (!result || better(cand, *result)) result = std::move(cand);
    }
    best[u] = std::move(result);
    return best[u];
  };

  std::optional<std::vector<std::string>> overall;
  for (const auto& s : starts) {
    const auto& cand = solve(s);
    if (cand && (!overall || better(*cand, *overall))) overall = *cand;
  }
  return overall.value_or(std::vector<std::string>{});
}

}  // namespace

LayoutRecord infer_layout_fields(const TopologyGraph& g) {
  LayoutRecord l = g.layout;
  FlowView v = flow_view(g);

  if (l.branch_points.empty()) {
    for (const auto& id : v.ids)
      if (v.succ.at(id).size() >= 2) l.branch_points.push_back(id);
  }
  if (l.merge_points.empty()) {
    for (const auto& id : v.ids)
      if (v.pred.at(id).size() >= 2) l.merge_points.push_back(id);
  }
  if (l.feedback_edges.empty()) l.feedback_edges = find_feedback_edges(v);

  std::set<std::pair<std::string, std::string>> removed(
      l.feedback_edges.begin(), l.feedback_edges.end());

  if (l.main_path.empty() && !v.ids.empty()) {
    std::set<std::string> starts, goals;
    for (const auto& n : g.nodes)
      if (n.node_type == NodeType::Input) starts.insert(n.id);
    for (const auto& n : g.nodes)
      if (n.node_type == NodeType::Output) goals.insert(n.id);
    if (starts.empty()) {  // any source of the DAG
      for (const auto& id : v.ids) {
        bool has_pred = false;
        for (const auto& p : v.pred.at(id))
          if (!removed.count({p, id})) has_pred = true;
        if (!has_pred) starts.insert(id);
      }
    }
    if (goals.empty()) {  // any sink of the DAG
      for (const auto& id : v.ids) {
        bool has_succ = false;
        for (const auto& s : v.succ.at(id))
          if (!removed.count({id, s})) has_succ = true;
        if (!has_succ) goals.insert(id);
      }
    }
    l.main_path = longest_path(v, removed, starts, goals);
    if (l.main_path.empty()) {
      // No start reaches a goal; settle for the longest path from a start.
      std::set<std::string> all(v.ids.begin(), v.ids.end());
      l.main_path = longest_path(v, removed, starts, all);
    }
  }

  if (l.flow_direction == FlowDirection::Unknown) {
    double sum_dx = 0, sum_dy = 0;
    size_t count = 0;
    for (const auto& [s, t] : v.pairs) {
      const NodeRecord* a = g.find_node(s);
      const NodeRecord* b = g.find_node(t);
      if (!a || !b) continue;
      sum_dx += std::abs(b->center_x - a->center_x);
      sum_dy += std::abs(b->center_y - a->center_y);
      ++count;
    }
    double spread_x = sum_dx, spread_y = sum_dy;
    bool have_signal = count > 0;
    if (!have_signal && g.nodes.size() >= 2) {
      // No edges: fall back to positional variance along each axis.
      double mx = 0, my = 0;
      for (const auto& n : g.nodes) {
        mx += n.center_x;
        my += n.center_y;
      }
      mx /= static_cast<double>(g.nodes.size());
      my /= static_cast<double>(g.nodes.size());
      spread_x = spread_y = 0;
      for (const auto& n : g.nodes) {
        spread_x += (n.center_x - mx) * (n.center_x - mx);
        spread_y += (n.center_y - my) * (n.center_y - my);
      }
      have_signal = true;
    }
    if (have_signal) {
      if (spread_x > 0 && spread_x >= 1.25 * spread_y)
        l.flow_direction = FlowDirection::Horizontal;
      else if (spread_y > 0 && spread_y >= 1.25 * spread_x)
        l.flow_direction = FlowDirection::Vertical;
      else
        l.flow_direction = FlowDirection::Mixed;
    }
  }

  if (l.reading_order.empty()) {
    auto order = v.ids;
    bool horizontal = l.flow_direction == FlowDirection::Horizontal;
    std::sort(order.begin(), order.end(),
              [&](const std::string& a, const std::string& b) {
                const NodeRecord* na = g.find_node(a);
                const NodeRecord* nb = g.find_node(b);
                auto ka = horizontal
                              ? std::tuple(na->center_x, na->center_y, a)
                              : std::tuple(na->center_y, na->center_x, a);
                auto kb = horizontal
                              ? std::tuple(nb->center_x, nb->center_y, b)
                              : std::tuple(nb->center_y, nb->center_x, b);
                return ka < kb;
              });
    l.reading_order = order;
  }
  return l;
}

// ---------------------------------------------------------------------------
// Validation

ValidationReport validate_graph(const TopologyGraph& g) {
  ValidationReport report;
  auto add = [&](const std::string& where, const std::string& message) {
    report.violations.push_back({where, message});
  };
  constexpr double eps = 1e-9;

  std::set<std::string> ids;
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    std::string where = "nodes[" + std::to_string(i) + "]";
    if (n.id.empty()) add(where, "empty node id");
    else if (!ids.insert(n.id).second) add(where, "duplicate node id '" + n.id + "'");
    const BBox& b = n.bbox;
    if (!(b.x1 >= -eps && b.x1 <= b.x2 + eps && b.x2 <= 1 + eps &&
          b.y1 >= -eps && b.y1 <= b.y2 + eps && b.y2 <= 1 + eps))
      add(where + ".bbox", "bbox outside [0,1] or inverted");
    if (std::abs(n.center_x - b.center_x()) > eps ||
        std::abs(n.center_y - b.center_y()) > eps)
      add(where, "center does not match bbox midpoint");
  }

  std::set<std::tuple<std::string, std::string, PathType>> edge_keys;
  for (size_t i = 0; i < g.edges.size(); ++i) {
    const auto& e = g.edges[i];
    std::string where = "edges[" + std::to_string(i) + "]";
    if (!ids.count(e.source))
      add(where, "edge " + edge_label(e) + " has unknown source");
    if (!ids.count(e.target))
      add(where, "edge " + edge_label(e) + " has unknown target");
    if (e.source == e.target) add(where, "self-loop on '" + e.source + "'");
    if (!edge_keys.insert({e.source, e.target, e.path_type}).second)
      add(where, "duplicate edge " + edge_label(e));
    for (const auto& id : e.bridged_from)
      if (id == e.source || id == e.target)
        add(where + ".bridged_from", "contains endpoint '" + id + "'");
  }

  for (size_t i = 0; i < g.groups.size(); ++i) {
    const auto& gr = g.groups[i];
    std::string where = "groups[" + std::to_string(i) + "]";
    if (gr.members.empty()) add(where, "group '" + gr.group_id + "' has no members");
    for (const auto& m : gr.members) {
      if (!ids.count(m)) {
        add(where, "group '" + gr.group_id + "' references unknown node '" + m + "'");
        continue;
      }
      if (gr.bbox && !gr.bbox->covers(g.find_node(m)->bbox))
        add(where + ".bbox", "group '" + gr.group_id +
                                 "' bbox does not cover member '" + m + "'");
    }
  }

  for (size_t i = 0; i < g.free_texts.size(); ++i)
    if (g.free_texts[i].content.empty())
      add("texts[" + std::to_string(i) + "]", "empty free text content");

  auto check_ids = [&](const std::vector<std::string>& list, const std::string& name) {
    for (const auto& id : list)
      if (!ids.count(id)) add("layout." + name, "unknown node '" + id + "'");
  };
  check_ids(g.layout.main_path, "main_path");
  check_ids(g.layout.reading_order, "reading_order");
  check_ids(g.layout.branch_points, "branch_points");
  check_ids(g.layout.merge_points, "merge_points");
  std::set<std::string> mp_seen;
  for (const auto& id : g.layout.main_path)
    if (!mp_seen.insert(id).second)
      add("layout.main_path", "repeated node '" + id + "'");
  for (const auto& [s, t] : g.layout.feedback_edges) {
    if (!ids.count(s)) add("layout.feedback_edges", "unknown node '" + s + "'");
    if (!ids.count(t)) add("layout.feedback_edges", "unknown node '" + t + "'");
  }
  return report;
}

}  // namespace drag
