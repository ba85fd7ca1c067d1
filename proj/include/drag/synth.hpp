#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drag/kg.hpp"

namespace drag {

// Seeded generator of structured layered-DAG diagrams for desk-scale
// experiments: typed nodes with vocabulary labels, groups, optional feedback
// edges and free text. Output is normalized and deterministic per
// (diagram_id, seed).
struct SynthOptions {
  int min_nodes = 6;
  int max_nodes = 24;
};

TopologyGraph make_synthetic_graph(const std::string& diagram_id, uint64_t seed,
                                   const SynthOptions& options = {});

std::vector<TopologyGraph> make_synthetic_corpus(size_t count, uint64_t seed,
                                                 const SynthOptions& options = {});

}  // namespace drag
