#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace drag {

// Canonical topology-KG schema: nodes, directed edges, groups, free text,
// and global layout attributes for one diagram.

enum class NodeType {
  Input, Output, Module, Component, Container, Connector,
  Branch, Merge, Stage, Visual, Text, Other,
};

enum class NodeShape {
  Rectangle, Circle, Diamond, ImagePanel, Table, Text,
  Container, Point, Line, Other,
};

enum class Importance { Major, Minor, Connector, Decorative };

enum class PathType { Flow, Containment, Feedback, Other };

enum class Direction { Forward, Backward, Bidirectional, Undirected };

enum class FlowDirection { Horizontal, Vertical, Mixed, Unknown };

enum class TextKind { RoleTitle, Label, Legend, Annotation };

const char* to_string(NodeType v);
const char* to_string(NodeShape v);
const char* to_string(Importance v);
const char* to_string(PathType v);
const char* to_string(Direction v);
const char* to_string(FlowDirection v);
const char* to_string(TextKind v);

NodeType node_type_from_string(const std::string& s);
NodeShape node_shape_from_string(const std::string& s);
Importance importance_from_string(const std::string& s);
PathType path_type_from_string(const std::string& s);
Direction direction_from_string(const std::string& s);
FlowDirection flow_direction_from_string(const std::string& s);
TextKind text_kind_from_string(const std::string& s);

// Axis-aligned box in normalized image coordinates, origin top-left.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double center_x() const { return (x1 + x2) / 2.0; }
  double center_y() const { return (y1 + y2) / 2.0; }
  bool covers(const BBox& inner, double eps = 1e-9) const {
    return x1 <= inner.x1 + eps && y1 <= inner.y1 + eps &&
           x2 >= inner.x2 - eps && y2 >= inner.y2 - eps;
  }
  bool operator==(const BBox&) const = default;
};

struct NodeRecord {
  std::string id;
  std::string name;  // may be empty
  NodeType node_type = NodeType::Other;
  NodeShape shape = NodeShape::Other;
  BBox bbox;
  double center_x = 0.0;
  double center_y = 0.0;
  std::string group;  // empty = no group
  Importance importance = Importance::Major;

  bool operator==(const NodeRecord&) const = default;
};

struct EdgeRecord {
  std::string source;
  std::string target;
  PathType path_type = PathType::Flow;
  Direction direction = Direction::Forward;
  // Interior node ids of the original path this edge replaces; empty on
  // canonical graphs.
  std::vector<std::string> bridged_from;
  // False only when the raw record omitted path_type; the containment
  // assignment rule applies exclusively to such edges.
  bool path_type_explicit = true;

  bool operator==(const EdgeRecord&) const = default;
};

struct GroupRecord {
  std::string group_id;
  std::string label;  // may be empty
  std::vector<std::string> members;
  std::optional<BBox> bbox;

  bool operator==(const GroupRecord&) const = default;
};

struct FreeText {
  TextKind kind = TextKind::Label;
  std::string content;
  std::optional<BBox> anchor;

  bool operator==(const FreeText&) const = default;
};

struct LayoutRecord {
  FlowDirection flow_direction = FlowDirection::Unknown;
  std::string topology_type;   // opaque
  std::string main_structure;  // one-line description
  std::vector<std::string> main_path;
  std::vector<std::string> reading_order;
  std::vector<std::string> branch_points;
  std::vector<std::string> merge_points;
  std::vector<std::pair<std::string, std::string>> feedback_edges;

  bool operator==(const LayoutRecord&) const = default;
};

struct TopologyGraph {
  std::string diagram_id;
  std::string image_ref;  // empty = absent
  std::vector<NodeRecord> nodes;
  std::vector<EdgeRecord> edges;
  std::vector<GroupRecord> groups;
  std::vector<FreeText> free_texts;
  LayoutRecord layout;

  bool operator==(const TopologyGraph&) const = default;

  const NodeRecord* find_node(const std::string& id) const;
};

struct Violation {
  std::string where;    // path into the record, e.g. "edges[2]"
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Parses one JSONL record. Accepts both the canonical layout
// {"diagram_id", "image_ref", "graph": {...}} and a bare graph object with
// nodes/edges at top level. Unknown enum strings map to other/unknown;
// missing optional fields get defaults. Throws Error{MalformedJson} with the
// byte offset on syntax errors and Error{SchemaViolation} naming the
// offending path on structural errors (missing nodes/edges, non-string id).
TopologyGraph parse_graph_record(const std::string& text);

// Canonical serialization: fixed key order, nodes sorted by id, edges by
// (source, target, path_type), groups by group_id. Byte-stable.
std::string serialize_graph_record(const TopologyGraph& g);

// Total cleaning pass. Drops invalid nodes/edges, clips boxes, recomputes
// centers and group boxes, assigns containment to untyped edges into
// container nodes, and restricts groups/layout to surviving nodes. Never
// throws; an unusable input yields an empty graph. Appends human-readable
// notes to `diagnostics` when provided.
TopologyGraph normalize_graph(const TopologyGraph& g,
                              std::vector<std::string>* diagnostics = nullptr);

// Fills the missing/empty layout fields (branch points, merge points,
// feedback edges, main path, flow direction, reading order) from node
// positions and non-containment edges. Present fields are left untouched.
LayoutRecord infer_layout_fields(const TopologyGraph& g);

// Checks every schema invariant; returns all violations, mutates nothing.
ValidationReport validate_graph(const TopologyGraph& g);

// Splits on ASCII whitespace into maximal non-whitespace runs.
std::vector<std::string> split_words(const std::string& s);

// First `max_words` words joined by single spaces.
std::string truncate_words(const std::string& s, size_t max_words);

}  // namespace drag
