#include "drag/synth.hpp"

#include <algorithm>
#include <cstdio>

#include "drag/hash.hpp"

namespace drag {

namespace {

const char* kVocab[] = {
    "encoder",   "decoder",   "attention", "pooling",   "fusion",
    "embedding", "projection", "sampler",  "router",    "gate",
    "residual",  "norm",      "token",     "patch",     "feature",
    "graph",     "memory",    "buffer",    "planner",   "scorer",
    "filter",    "aligner",   "mapper",    "reducer",   "splitter",
    "adapter",   "head",      "backbone",  "stream",    "query",
    "key",       "value",     "context",   "latent",    "prior",
    "policy",    "critic",    "reward",    "state",     "action",
    "image",     "text",      "audio",     "video",     "mask",
    "anchor",    "prompt",    "cache",     "index",     "retriever",
    "generator", "verifier",  "parser",    "renderer",  "scheduler",
    "optimizer", "gradient",  "softmax",   "logits",    "kernel",
    "window",    "stride",    "channel",   "block",
};
constexpr size_t kVocabSize = sizeof(kVocab) / sizeof(kVocab[0]);

std::string pick_words(SplitMix64& rng, size_t count) {
  std::string out;
  for (size_t i = 0; i < count; ++i) {
    if (i) out += ' ';
    out += kVocab[rng.next_below(kVocabSize)];
  }
  return out;
}

std::string node_id(size_t index) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "n%02zu", index);
  return std::string(buf);
}

}  // namespace

TopologyGraph make_synthetic_graph(const std::string& diagram_id, uint64_t seed,
                                   const SynthOptions& options) {
  SplitMix64 rng(stable_seed(seed, diagram_id, "synthetic"));
  TopologyGraph g;
  g.diagram_id = diagram_id;

  const size_t node_count =
      options.min_nodes +
      rng.next_below(static_cast<uint64_t>(options.max_nodes - options.min_nodes + 1));
  const bool horizontal = rng.next_below(2) == 0;

  // Layered DAG: 1-3 nodes per layer.
  std::vector<std::vector<size_t>> layers;
  size_t placed = 0;
  while (placed < node_count) {
    size_t width = 1 + rng.next_below(3);
    width = std::min(width, node_count - placed);
    std::vector<size_t> layer;
    for (size_t s = 0; s < width; ++s) layer.push_back(placed++);
    layers.push_back(std::move(layer));
  }
  const size_t layer_count = layers.size();

  g.nodes.resize(node_count);
  for (size_t li = 0; li < layer_count; ++li) {
    const auto& layer = layers[li];
    for (size_t si = 0; si < layer.size(); ++si) {
      NodeRecord& n = g.nodes[layer[si]];
      n.id = node_id(layer[si]);
      n.name = pick_words(rng, 1 + rng.next_below(3));

      if (li == 0) {
        n.node_type = NodeType::Input;
        n.importance = Importance::Major;
      } else if (li + 1 == layer_count) {
        n.node_type = NodeType::Output;
        n.importance = Importance::Major;
      } else {
        constexpr NodeType kMiddle[] = {
            NodeType::Module, NodeType::Module, NodeType::Module,
            NodeType::Component, NodeType::Component, NodeType::Stage,
            NodeType::Connector, NodeType::Visual, NodeType::Other,
        };
        n.node_type = kMiddle[rng.next_below(9)];
        uint64_t roll = rng.next_below(10);
        n.importance = roll < 6   ? Importance::Major
                       : roll < 8 ? Importance::Minor
                                  : Importance::Decorative;
      }
      n.shape = n.node_type == NodeType::Connector ? NodeShape::Circle
                : n.node_type == NodeType::Branch  ? NodeShape::Diamond
                                                   : NodeShape::Rectangle;

      // Position along the flow axis by layer, across it by slot.
      double along = layer_count == 1
                         ? 0.5
                         : 0.08 + 0.84 * static_cast<double>(li) /
                                      static_cast<double>(layer_count - 1);
      double across = 0.2 + 0.6 * (static_cast<double>(si) + 0.5) /
                                static_cast<double>(layer.size());
      double half_w = 0.03 + 0.02 * rng.next_real();
      double half_h = 0.02 + 0.015 * rng.next_real();
      double cx = horizontal ? along : across;
      double cy = horizontal ? across : along;
      n.bbox = BBox{std::clamp(cx - half_w, 0.0, 1.0),
                    std::clamp(cy - half_h, 0.0, 1.0),
                    std::clamp(cx + half_w, 0.0, 1.0),
                    std::clamp(cy + half_h, 0.0, 1.0)};
      n.center_x = n.bbox.center_x();
      n.center_y = n.bbox.center_y();
    }
  }

  // Every layer feeds the next; occasional skip and feedback edges.
  for (size_t li = 0; li + 1 < layer_count; ++li) {
    const auto& from = layers[li];
    const auto& to = layers[li + 1];
    for (size_t target : to) {
      size_t source = from[rng.next_below(from.size())];
      g.edges.push_back({node_id(source), node_id(target)});
    }
    for (size_t source : from) {
      if (rng.next_below(3) == 0) {
        size_t target = to[rng.next_below(to.size())];
        g.edges.push_back({node_id(source), node_id(target)});
      }
    }
  }
  for (size_t li = 2; li < layer_count; ++li) {
    if (rng.next_below(6) == 0) {
      size_t source = layers[li][rng.next_below(layers[li].size())];
      size_t target = layers[li - 2][rng.next_below(layers[li - 2].size())];
      EdgeRecord e{node_id(source), node_id(target)};
      e.path_type = PathType::Feedback;
      g.edges.push_back(std::move(e));
    }
  }

  // Sometimes group a middle layer.
  if (layer_count > 2 && rng.next_below(2) == 0) {
    size_t li = 1 + rng.next_below(layer_count - 2);
    GroupRecord gr;
    gr.group_id = "g1";
    gr.label = pick_words(rng, 1 + rng.next_below(2));
    for (size_t index : layers[li]) gr.members.push_back(node_id(index));
    for (size_t index : layers[li]) g.nodes[index].group = "g1";
    g.groups.push_back(std::move(gr));
  }

  uint64_t text_count = rng.next_below(3);
  constexpr TextKind kKinds[] = {TextKind::RoleTitle, TextKind::Label,
                                 TextKind::Legend, TextKind::Annotation};
  for (uint64_t i = 0; i < text_count; ++i) {
    FreeText t;
    t.kind = kKinds[rng.next_below(4)];
    t.content = pick_words(rng, 2 + rng.next_below(3));
    g.free_texts.push_back(std::move(t));
  }

  g.layout.flow_direction =
      horizontal ? FlowDirection::Horizontal : FlowDirection::Vertical;
  g.layout.topology_type = layer_count > 2 ? "layered" : "chain";
  g.layout.main_structure = pick_words(rng, 3);

  return normalize_graph(g);
}

std::vector<TopologyGraph> make_synthetic_corpus(size_t count, uint64_t seed,
                                                 const SynthOptions& options) {
  std::vector<TopologyGraph> corpus;
  corpus.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "synth-%03zu", i);
    corpus.push_back(make_synthetic_graph(buf, seed, options));
  }
  return corpus;
}

}  // namespace drag
