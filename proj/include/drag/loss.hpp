#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "drag/kg.hpp"

namespace drag {

struct VariantRecord;  // variants.hpp

// Fraction of nodes / original edges / label tokens removed by a variant.
struct LossRecord {
  double node_loss = 0.0;
  double edge_loss = 0.0;
  double text_loss = 0.0;

  bool operator==(const LossRecord&) const = default;
};

struct VariantLossStats {
  size_t count = 0;
  LossRecord mean;
};

struct LossSummary {
  // Keyed by variant kind name; absent key = count 0.
  std::map<std::string, VariantLossStats> per_variant;
};

// node_loss = 1 - |V_v|/|V|; edge_loss counts variant edges whose
// (source, target, path_type) key exists in the original (bridges do not);
// text_loss does positional token matching over node names, group labels,
// free texts (k-th element of each kind corresponds), and
// layout.main_structure. Zero losses when the respective denominator is zero.
// Throws Error{PreconditionViolated} when the variant has a node id that is
// not in the original.
LossRecord compute_variant_loss(const TopologyGraph& original,
                                const TopologyGraph& variant);

// Arithmetic means per variant kind; exactly permutation-invariant.
LossSummary aggregate_variant_losses(const std::vector<VariantRecord>& records);

std::string loss_summary_to_json(const LossSummary& summary);
std::string loss_summary_to_csv(const LossSummary& summary);

}  // namespace drag
