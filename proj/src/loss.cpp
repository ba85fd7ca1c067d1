#include "drag/loss.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

#include "drag/errors.hpp"
#include "drag/variants.hpp"
#include "json.hpp"

namespace drag {

namespace {

// Positional token match: token i is retained iff kept[i] == orig[i].
void count_tokens(const std::string& original, const std::string* kept,
                  size_t& total, size_t& retained) {
  auto orig_tokens = split_words(original);
  total += orig_tokens.size();
  if (!kept) return;
  auto kept_tokens = split_words(*kept);
  size_t n = std::min(orig_tokens.size(), kept_tokens.size());
  for (size_t i = 0; i < n; ++i)
    if (orig_tokens[i] == kept_tokens[i]) ++retained;
}

}  // namespace

LossRecord compute_variant_loss(const TopologyGraph& original,
                                const TopologyGraph& variant) {
  std::set<std::string> original_ids;
  for (const auto& n : original.nodes) original_ids.insert(n.id);
  for (const auto& n : variant.nodes)
    if (!original_ids.count(n.id))
      throw_error(ErrorKind::PreconditionViolated,
                  "variant node '" + n.id + "' is not in the original graph");

  LossRecord loss;

  if (!original.nodes.empty())
    loss.node_loss = 1.0 - static_cast<double>(variant.nodes.size()) /
                               static_cast<double>(original.nodes.size());

  if (!original.edges.empty()) {
    std::set<std::tuple<std::string, std::string, PathType>> original_keys;
    for (const auto& e : original.edges)
      original_keys.insert({e.source, e.target, e.path_type});
    size_t survived = 0;
    for (const auto& e : variant.edges)
      if (original_keys.count({e.source, e.target, e.path_type})) ++survived;
    loss.edge_loss = 1.0 - static_cast<double>(survived) /
                               static_cast<double>(original.edges.size());
  }

  size_t total_tokens = 0, retained_tokens = 0;

  std::map<std::string, const std::string*> variant_names;
  for (const auto& n : variant.nodes) variant_names[n.id] = &n.name;
  for (const auto& n : original.nodes) {
    auto it = variant_names.find(n.id);
    count_tokens(n.name, it == variant_names.end() ? nullptr : it->second,
                 total_tokens, retained_tokens);
  }

  std::map<std::string, const std::string*> variant_labels;
  for (const auto& gr : variant.groups) variant_labels[gr.group_id] = &gr.label;
  for (const auto& gr : original.groups) {
    auto it = variant_labels.find(gr.group_id);
    count_tokens(gr.label, it == variant_labels.end() ? nullptr : it->second,
                 total_tokens, retained_tokens);
  }

  // Free texts have no ids; the k-th surviving text of a kind corresponds to
  // the k-th original of that kind.
  std::map<TextKind, std::vector<const std::string*>> variant_texts;
  for (const auto& t : variant.free_texts)
    variant_texts[t.kind].push_back(&t.content);
  std::map<TextKind, size_t> next_index;
  for (const auto& t : original.free_texts) {
    size_t k = next_index[t.kind]++;
    const auto& kept = variant_texts[t.kind];
    count_tokens(t.content, k < kept.size() ? kept[k] : nullptr, total_tokens,
                 retained_tokens);
  }

  count_tokens(original.layout.main_structure, &variant.layout.main_structure,
               total_tokens, retained_tokens);

  if (total_tokens > 0)
    loss.text_loss = 1.0 - static_cast<double>(retained_tokens) /
                               static_cast<double>(total_tokens);
  return loss;
}

LossSummary aggregate_variant_losses(const std::vector<VariantRecord>& records) {
  std::map<std::string, std::vector<LossRecord>> grouped;
  for (const auto& r : records)
    grouped[to_string(r.variant)].push_back(r.loss);

  LossSummary summary;
  for (auto& [name, losses] : grouped) {
    // Sorted accumulation keeps the mean exactly permutation-invariant.
    auto mean_of = [&](double LossRecord::* field) {
      std::vector<double> values;
      values.reserve(losses.size());
      for (const auto& l : losses) values.push_back(l.*field);
      std::sort(values.begin(), values.end());
      double sum = 0;
      for (double v : values) sum += v;
      return sum / static_cast<double>(values.size());
    };
    VariantLossStats stats;
    stats.count = losses.size();
    stats.mean.node_loss = mean_of(&LossRecord::node_loss);
    stats.mean.edge_loss = mean_of(&LossRecord::edge_loss);
    stats.mean.text_loss = mean_of(&LossRecord::text_loss);
    summary.per_variant[name] = stats;
  }
  return summary;
}

std::string loss_summary_to_json(const LossSummary& summary) {
  nlohmann::ordered_json j;
  for (VariantKind kind : kAllVariants) {
    const char* name = to_string(kind);
    auto it = summary.per_variant.find(name);
    nlohmann::ordered_json row;
    if (it == summary.per_variant.end()) {
      row["count"] = 0;
    } else {
      row["count"] = it->second.count;
      row["node_loss"] = it->second.mean.node_loss;
      row["edge_loss"] = it->second.mean.edge_loss;
      row["text_loss"] = it->second.mean.text_loss;
    }
    j[name] = row;
  }
  return j.dump(2);
}

std::string loss_summary_to_csv(const LossSummary& summary) {
  std::ostringstream out;
  out << "variant,node_loss,edge_loss,text_loss,count\n";
  for (VariantKind kind : kAllVariants) {
    const char* name = to_string(kind);
    auto it = summary.per_variant.find(name);
    if (it == summary.per_variant.end()) {
      out << name << ",,,," << 0 << "\n";
      continue;
    }
    out << name << "," << it->second.mean.node_loss << ","
        << it->second.mean.edge_loss << "," << it->second.mean.text_loss << ","
        << it->second.count << "\n";
  }
  return out.str();
}

}  // namespace drag
