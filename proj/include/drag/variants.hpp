#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "drag/kg.hpp"
#include "drag/loss.hpp"

namespace drag {

enum class VariantKind {
  LightSkeleton,
  MediumMissing,
  CoarseLayout,
  TextReduced,
  LayoutJitter,
};

inline constexpr std::array<VariantKind, 5> kAllVariants = {
    VariantKind::LightSkeleton, VariantKind::MediumMissing,
    VariantKind::CoarseLayout, VariantKind::TextReduced,
    VariantKind::LayoutJitter};

const char* to_string(VariantKind v);
VariantKind variant_kind_from_string(const std::string& s);

enum class TextLevel { Medium, Low, None };

struct TextPolicy {
  TextLevel level = TextLevel::Medium;
};

struct SeedSpec {
  uint64_t global_seed = 0;
  double jitter_fraction = 0.05;  // rho, in [0, 0.5]
};

struct VariantRecord {
  std::string source_diagram_id;
  VariantKind variant = VariantKind::LightSkeleton;
  uint64_t seed = 0;
  TopologyGraph graph;
  LossRecord loss;
};

// medium: node names <=3 words, group labels <=2, keep at most one free text
// (first by kind order, ties by content bytes) truncated to 2 words.
// low: node and group labels <=2 words, free text removed.
// none: all text emptied except input/output nodes renamed Input/Output.
// Topology is never touched.
TopologyGraph apply_text_policy(const TopologyGraph& g, TextPolicy policy);

// Drops decorative nodes; keeps edges only between survivors (no bridging);
// medium text policy.
TopologyGraph make_light_skeleton(const TopologyGraph& g);

// Keeps layout anchors and structurally typed nodes, bridges paths that ran
// only through removed nodes, drops free text; medium text policy.
// Requires inferred layout fields.
TopologyGraph make_medium_missing(const TopologyGraph& g);

// Strongest simplification: anchors plus a seeded main-path sample under a
// node budget of min(ceil(0.30*|V|), 6) with a floor of min(3, |V|); low text
// policy. Requires inferred layout fields.
TopologyGraph make_coarse_layout(const TopologyGraph& g, uint64_t seed);

// Light skeleton with all semantic text removed; input/output nodes renamed.
TopologyGraph make_text_reduced(const TopologyGraph& g);

// Medium-missing graph with each node box shifted by U[-rho, rho] per axis
// and scaled by U[1-0.8*rho, 1+0.8*rho] per dimension, clipped to [0,1];
// group boxes refreshed with 0.01 padding. Requires inferred layout fields.
TopologyGraph make_layout_jitter(const TopologyGraph& g, uint64_t seed, double rho);

// All five variants in fixed order, each seeded with
// stable_seed(spec.global_seed, diagram_id, variant_name) and carrying its
// degradation losses. Throws Error{EmptyGraph} on a node-less record.
std::vector<VariantRecord> generate_variant_set(const TopologyGraph& record,
                                                const SeedSpec& spec);

std::string serialize_variant_record(const VariantRecord& record);
VariantRecord parse_variant_record(const std::string& text);

}  // namespace drag
