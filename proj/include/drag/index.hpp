#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drag/embed.hpp"
#include "drag/train.hpp"

namespace drag {

// Immutable id-sorted store of unit-normalized vectors; cosine against a
// normalized query is a single dot product.
struct RetrievalIndex {
  uint32_t dim = 0;
  std::vector<EmbeddingVector> entries;  // sorted by id, unit L2 norm
  std::optional<uint64_t> head_fingerprint;

  size_t size() const { return entries.size(); }
};

struct QueryHit {
  std::string id;
  double score;

  bool operator==(const QueryHit&) const = default;
};

struct QueryResult {
  std::string query_id;
  std::vector<QueryHit> hits;  // scores non-increasing, ties by ascending id
};

// Applies the head when given, L2-normalizes, sorts by id. Throws
// DimMismatch / DuplicateId / ZeroVector (naming the id).
RetrievalIndex build_index(const std::vector<EmbeddingVector>& vectors,
                           const ProjectionHead* head = nullptr);

// Exact cosine scores against every entry; min(k, size) results.
QueryResult query_top_k(const RetrievalIndex& index, const EmbeddingVector& query,
                        size_t k, const ProjectionHead* head = nullptr);

// "DRIN" binary format; load is the exact inverse of save.
size_t save_index(const RetrievalIndex& index, const std::string& path);
RetrievalIndex load_index(const std::string& path);

std::string query_result_to_json(const QueryResult& result);
std::string query_result_to_tsv(const QueryResult& result);

}  // namespace drag
