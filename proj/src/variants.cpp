#include "drag/variants.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "drag/errors.hpp"
#include "drag/hash.hpp"
#include "drag/kg_json.hpp"

namespace drag {

using ordered_json = nlohmann::ordered_json;

const char* to_string(VariantKind v) {
  switch (v) {
    case VariantKind::LightSkeleton: return "light_skeleton";
    case VariantKind::MediumMissing: return "medium_missing";
    case VariantKind::CoarseLayout: return "coarse_layout";
    case VariantKind::TextReduced: return "text_reduced";
    case VariantKind::LayoutJitter: return "layout_jitter";
  }
  return "light_skeleton";
}

VariantKind variant_kind_from_string(const std::string& s) {
  for (VariantKind v : kAllVariants)
    if (s == to_string(v)) return v;
  throw_error(ErrorKind::SchemaViolation, "unknown variant kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// Text policies

namespace {

int text_kind_rank(TextKind k) {
  switch (k) {
    case TextKind::RoleTitle: return 0;
    case TextKind::Label: return 1;
    case TextKind::Legend: return 2;
    case TextKind::Annotation: return 3;
  }
  return 3;
}

void rename_io_nodes(TopologyGraph& g) {
  for (auto& n : g.nodes) {
    if (n.node_type == NodeType::Input)
      n.name = "Input";
    else if (n.node_type == NodeType::Output)
      n.name = "Output";
    else
      n.name.clear();
  }
}

}  // namespace

TopologyGraph apply_text_policy(const TopologyGraph& g, TextPolicy policy) {
  TopologyGraph out = g;
  switch (policy.level) {
    case TextLevel::Medium: {
      for (auto& n : out.nodes) n.name = truncate_words(n.name, 3);
      for (auto& gr : out.groups) gr.label = truncate_words(gr.label, 2);
      if (!out.free_texts.empty()) {
        auto best = std::min_element(
            out.free_texts.begin(), out.free_texts.end(),
            [](const FreeText& a, const FreeText& b) {
              return std::tuple(text_kind_rank(a.kind), a.content) <
                     std::tuple(text_kind_rank(b.kind), b.content);
            });
        FreeText kept = *best;
        kept.content = truncate_words(kept.content, 2);
        out.free_texts.clear();
        if (!kept.content.empty()) out.free_texts.push_back(std::move(kept));
      }
      break;
    }
    case TextLevel::Low: {
      for (auto& n : out.nodes) n.name = truncate_words(n.name, 2);
      for (auto& gr : out.groups) gr.label = truncate_words(gr.label, 2);
      out.free_texts.clear();
      break;
    }
    case TextLevel::None: {
      rename_io_nodes(out);
      for (auto& gr : out.groups) gr.label.clear();
      out.free_texts.clear();
      out.layout.main_structure.clear();
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shared helpers

namespace {

std::vector<std::string> sorted_ids(const TopologyGraph& g) {
  std::vector<std::string> ids;
  ids.reserve(g.nodes.size());
  for (const auto& n : g.nodes) ids.push_back(n.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

// Keeps only `retained` nodes and the edges whose endpoints both survive.
TopologyGraph restrict_to(const TopologyGraph& g,
                          const std::set<std::string>& retained) {
  TopologyGraph out = g;
  std::erase_if(out.nodes,
                [&](const NodeRecord& n) { return !retained.count(n.id); });
  std::erase_if(out.edges, [&](const EdgeRecord& e) {
    return !retained.count(e.source) || !retained.count(e.target);
  });
  return out;
}

// Structural anchor set shared by medium_missing and coarse_layout.
std::set<std::string> layout_anchor_ids(const TopologyGraph& g) {
  std::set<std::string> anchors;
  for (const auto& id : g.layout.main_path) anchors.insert(id);
  for (const auto& id : g.layout.branch_points) anchors.insert(id);
  for (const auto& id : g.layout.merge_points) anchors.insert(id);
  for (const auto& [s, t] : g.layout.feedback_edges) {
    anchors.insert(s);
    anchors.insert(t);
  }
  return anchors;
}

bool is_structural_type(NodeType t) {
  switch (t) {
    case NodeType::Input:
    case NodeType::Output:
    case NodeType::Container:
    case NodeType::Connector:
    case NodeType::Branch:
    case NodeType::Merge:
      return true;
    default:
      return false;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// LightSkeleton / TextReduced

TopologyGraph make_light_skeleton(const TopologyGraph& g) {
  std::set<std::string> retained;
  for (const auto& n : g.nodes)
    if (n.importance != Importance::Decorative) retained.insert(n.id);
  TopologyGraph out = normalize_graph(restrict_to(g, retained));
  return apply_text_policy(out, {TextLevel::Medium});
}

TopologyGraph make_text_reduced(const TopologyGraph& g) {
  return apply_text_policy(make_light_skeleton(g), {TextLevel::None});
}

// ---------------------------------------------------------------------------
// MediumMissing

namespace {

// Shortest removed-only interior path from `u` to every reachable retained
// node over non-containment edges; ties broken by the lexicographically
// smallest interior sequence. Returns target id -> interior sequence.
std::map<std::string, std::vector<std::string>> bridge_targets(
    const TopologyGraph& g, const std::set<std::string>& retained,
    const std::string& u) {
  std::map<std::string, std::vector<std::string>> succ;
  for (const auto& e : g.edges) {
    if (e.path_type == PathType::Containment) continue;
    succ[e.source].push_back(e.target);
  }
  for (auto& [_, lst] : succ) {
    std::sort(lst.begin(), lst.end());
    lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
  }

  using Path = std::vector<std::string>;  // interior node sequence
  auto better = [](const Path& a, const Path& b) {
    return std::tuple(a.size(), a) < std::tuple(b.size(), b);
  };

  std::map<std::string, Path> best_interior;  // per removed node
  std::map<std::string, Path> result;         // per retained target
  // Priority-ordered frontier keyed by (length, sequence); small graphs.
  std::set<std::pair<size_t, Path>> frontier;

  auto relax_out = [&](const std::string& from, const Path& interior) {
    auto it = succ.find(from);
    if (it == succ.end()) return;
    for (const auto& next : it->second) {
      if (retained.count(next)) {
        if (next == u || interior.empty()) continue;  // direct edges survive
        auto r = result.find(next);
        if (r == result.end() || better(interior, r->second))
          result[next] = interior;
      } else {
        Path cand = interior;
        cand.push_back(next);
        auto b = best_interior.find(next);
        if (b == best_interior.end() || better(cand, b->second)) {
          best_interior[next] = cand;
          frontier.insert({cand.size(), cand});
        }
      }
    }
  };

  relax_out(u, {});
  while (!frontier.empty()) {
    auto [len, interior] = *frontier.begin();
    frontier.erase(frontier.begin());
    const std::string& node = interior.back();
    if (best_interior[node] != interior) continue;  // superseded
    relax_out(node, interior);
  }
  return result;
}

}  // namespace

TopologyGraph make_medium_missing(const TopologyGraph& g) {
  std::set<std::string> retained = layout_anchor_ids(g);
  for (const auto& n : g.nodes)
    if (is_structural_type(n.node_type)) retained.insert(n.id);
  if (retained.empty()) {
    for (const auto& n : g.nodes)
      if (n.importance == Importance::Major) retained.insert(n.id);
  }

  TopologyGraph kept = restrict_to(g, retained);
  std::set<std::pair<std::string, std::string>> direct;
  for (const auto& e : kept.edges) direct.insert({e.source, e.target});

  for (const auto& u : sorted_ids(kept)) {
    for (auto& [target, interior] : bridge_targets(g, retained, u)) {
      if (direct.count({u, target})) continue;
      EdgeRecord bridge;
      bridge.source = u;
      bridge.target = target;
      bridge.path_type = PathType::Flow;
      bridge.direction = Direction::Forward;
      bridge.bridged_from = interior;
      kept.edges.push_back(std::move(bridge));
      direct.insert({u, target});
    }
  }

  kept.free_texts.clear();
  TopologyGraph out = normalize_graph(kept);
  return apply_text_policy(out, {TextLevel::Medium});
}

// ---------------------------------------------------------------------------
// CoarseLayout

namespace {

// Eviction priority under the node budget, highest kept first.
enum NodePriority {
  kDecorative = 0,
  kMinorUntyped = 1,
  kUntyped = 2,
  kConnector = 3,
  kTypedStructural = 4,
  kLayoutAnchor = 5,
  kMainPathEndpoint = 6,
};

size_t ceil_fraction(size_t n, size_t percent) {
  return (n * percent + 99) / 100;
}

}  // namespace

TopologyGraph make_coarse_layout(const TopologyGraph& g, uint64_t seed) {
  const auto& mp = g.layout.main_path;
  std::map<std::string, int> priority;
  auto raise = [&](const std::string& id, int p) {
    auto [it, inserted] = priority.insert({id, p});
    if (!inserted && it->second < p) it->second = p;
  };

  for (const auto& id : g.layout.branch_points) raise(id, kLayoutAnchor);
  for (const auto& id : g.layout.merge_points) raise(id, kLayoutAnchor);
  for (const auto& [s, t] : g.layout.feedback_edges) {
    raise(s, kLayoutAnchor);
    raise(t, kLayoutAnchor);
  }
  for (const auto& n : g.nodes)
    if (n.node_type == NodeType::Input || n.node_type == NodeType::Output)
      raise(n.id, kTypedStructural);
  if (!mp.empty()) {
    raise(mp.front(), kMainPathEndpoint);
    raise(mp.back(), kMainPathEndpoint);
  }

  // Seeded sample of interior main-path nodes: roughly 22% of the path,
  // at most six sampled nodes.
  if (mp.size() > 2) {
    size_t want = std::min<size_t>(ceil_fraction(mp.size(), 22), 6);
    std::vector<size_t> interior;
    for (size_t i = 1; i + 1 < mp.size(); ++i) interior.push_back(i);
    SplitMix64 rng(seed);
    for (size_t i = interior.size(); i > 1; --i)
      std::swap(interior[i - 1], interior[rng.next_below(i)]);
    for (size_t k = 0; k < std::min(want, interior.size()); ++k)
      raise(mp[interior[k]], kLayoutAnchor);
  }

  // Connectors that actually join structure: total degree >= 3.
  std::map<std::string, size_t> degree;
  for (const auto& e : g.edges) {
    ++degree[e.source];
    ++degree[e.target];
  }
  for (const auto& n : g.nodes)
    if (n.node_type == NodeType::Connector && degree[n.id] >= 3)
      raise(n.id, kConnector);

  if (priority.empty()) {
    // No topology anchors at all: layout-ordered sample of major nodes.
    std::vector<std::string> order = g.layout.reading_order;
    if (order.empty()) order = sorted_ids(g);
    size_t taken = 0;
    for (const auto& id : order) {
      const NodeRecord* n = g.find_node(id);
      if (n && n->importance == Importance::Major) {
        raise(id, kLayoutAnchor);
        if (++taken == 3) break;
      }
    }
  }

  size_t total = g.nodes.size();
  size_t budget = std::min<size_t>(ceil_fraction(total, 30), 6);
  size_t floor = std::min<size_t>(3, total);
  size_t effective = std::max(budget, floor);

  std::vector<std::pair<int, std::string>> ranked;  // (priority, id)
  for (const auto& [id, p] : priority)
    if (g.find_node(id)) ranked.push_back({p, id});
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });

  std::set<std::string> retained;
  for (const auto& [p, id] : ranked) {
    if (retained.size() >= effective) break;
    retained.insert(id);
  }
  // Main-path endpoints come back even if the budget squeezed them out.
  if (!mp.empty()) {
    retained.insert(mp.front());
    retained.insert(mp.back());
  }

  if (retained.size() < floor) {
    // Top up from the remaining nodes, best importance first.
    auto rank_importance = [](Importance i) { return static_cast<int>(i); };
    std::vector<const NodeRecord*> rest;
    for (const auto& n : g.nodes)
      if (!retained.count(n.id)) rest.push_back(&n);
    std::sort(rest.begin(), rest.end(),
              [&](const NodeRecord* a, const NodeRecord* b) {
                return std::tuple(rank_importance(a->importance), a->id) <
                       std::tuple(rank_importance(b->importance), b->id);
              });
    for (const NodeRecord* n : rest) {
      if (retained.size() >= floor) break;
      retained.insert(n->id);
    }
  }

  TopologyGraph out = normalize_graph(restrict_to(g, retained));
  return apply_text_policy(out, {TextLevel::Low});
}

// ---------------------------------------------------------------------------
// LayoutJitter

TopologyGraph make_layout_jitter(const TopologyGraph& g, uint64_t seed, double rho) {
  if (!(rho >= 0.0 && rho <= 0.5))
    throw_error(ErrorKind::PreconditionViolated,
                "jitter fraction must be in [0, 0.5]");
  TopologyGraph out = make_medium_missing(g);

  std::map<std::string, NodeRecord*> by_id;
  for (auto& n : out.nodes) by_id[n.id] = &n;

  SplitMix64 rng(seed);
  for (auto& [id, node] : by_id) {
    double dx = (2.0 * rng.next_real() - 1.0) * rho;
    double dy = (2.0 * rng.next_real() - 1.0) * rho;
    double sw = 1.0 + (2.0 * rng.next_real() - 1.0) * 0.8 * rho;
    double sh = 1.0 + (2.0 * rng.next_real() - 1.0) * 0.8 * rho;
    if (rho == 0.0) continue;  // exact identity, no rounding drift

    double cx = node->bbox.center_x() + dx;
    double cy = node->bbox.center_y() + dy;
    double hw = node->bbox.width() * sw / 2.0;
    double hh = node->bbox.height() * sh / 2.0;
    BBox b{cx - hw, cy - hh, cx + hw, cy + hh};
    b.x1 = std::clamp(b.x1, 0.0, 1.0);
    b.y1 = std::clamp(b.y1, 0.0, 1.0);
    b.x2 = std::clamp(b.x2, 0.0, 1.0);
    b.y2 = std::clamp(b.y2, 0.0, 1.0);
    node->bbox = b;
    node->center_x = b.center_x();
    node->center_y = b.center_y();
  }

  constexpr double kGroupPadding = 0.01;
  for (auto& gr : out.groups) {
    if (gr.members.empty()) continue;
    BBox box = by_id.at(gr.members.front())->bbox;
    for (const auto& m : gr.members) {
      const BBox& b = by_id.at(m)->bbox;
      box.x1 = std::min(box.x1, b.x1);
      box.y1 = std::min(box.y1, b.y1);
      box.x2 = std::max(box.x2, b.x2);
      box.y2 = std::max(box.y2, b.y2);
    }
    box.x1 = std::clamp(box.x1 - kGroupPadding, 0.0, 1.0);
    box.y1 = std::clamp(box.y1 - kGroupPadding, 0.0, 1.0);
    box.x2 = std::clamp(box.x2 + kGroupPadding, 0.0, 1.0);
    box.y2 = std::clamp(box.y2 + kGroupPadding, 0.0, 1.0);
    gr.bbox = box;
  }

  return apply_text_policy(out, {TextLevel::Medium});
}

// ---------------------------------------------------------------------------
// Variant set

std::vector<VariantRecord> generate_variant_set(const TopologyGraph& record,
                                                const SeedSpec& spec) {
  if (record.nodes.empty())
    throw_error(ErrorKind::EmptyGraph,
                "record '" + record.diagram_id + "' has no nodes");

  TopologyGraph g = normalize_graph(record);
  g.layout = infer_layout_fields(g);
  if (g.nodes.empty())
    throw_error(ErrorKind::EmptyGraph,
                "record '" + record.diagram_id + "' has no usable nodes");

  std::vector<VariantRecord> out;
  out.reserve(kAllVariants.size());
  for (VariantKind kind : kAllVariants) {
    VariantRecord r;
    r.source_diagram_id = g.diagram_id;
    r.variant = kind;
    r.seed = stable_seed(spec.global_seed, g.diagram_id, to_string(kind));
    switch (kind) {
      case VariantKind::LightSkeleton: r.graph = make_light_skeleton(g); break;
      case VariantKind::MediumMissing: r.graph = make_medium_missing(g); break;
      case VariantKind::CoarseLayout: r.graph = make_coarse_layout(g, r.seed); break;
      case VariantKind::TextReduced: r.graph = make_text_reduced(g); break;
      case VariantKind::LayoutJitter:
        r.graph = make_layout_jitter(g, r.seed, spec.jitter_fraction);
        break;
    }
    r.loss = compute_variant_loss(g, r.graph);
    out.push_back(std::move(r));
  }
  return out;
}

std::string serialize_variant_record(const VariantRecord& record) {
  ordered_json j;
  j["source_diagram_id"] = record.source_diagram_id;
  j["variant"] = to_string(record.variant);
  j["seed"] = record.seed;
  j["graph"] = graph_body_to_json(record.graph);
  ordered_json loss;
  loss["node_loss"] = record.loss.node_loss;
  loss["edge_loss"] = record.loss.edge_loss;
  loss["text_loss"] = record.loss.text_loss;
  j["loss"] = loss;
  return j.dump();
}

VariantRecord parse_variant_record(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw_error(ErrorKind::MalformedJson,
                "JSON syntax error at byte " + std::to_string(e.byte) + ": " +
                    e.what());
  }
  if (!j.is_object() || !j.contains("source_diagram_id") ||
      !j.contains("variant") || !j.contains("graph"))
    throw_error(ErrorKind::SchemaViolation,
                "variant record needs source_diagram_id, variant, graph");
  VariantRecord r;
  r.source_diagram_id = j["source_diagram_id"].get<std::string>();
  r.variant = variant_kind_from_string(j["variant"].get<std::string>());
  r.seed = j.value("seed", uint64_t{0});
  r.graph = graph_from_json(j["graph"]);
  r.graph.diagram_id = r.source_diagram_id;
  if (auto it = j.find("loss"); it != j.end() && it->is_object()) {
    r.loss.node_loss = it->value("node_loss", 0.0);
    r.loss.edge_loss = it->value("edge_loss", 0.0);
    r.loss.text_loss = it->value("text_loss", 0.0);
  }
  return r;
}

}  // namespace drag
