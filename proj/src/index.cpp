#include "drag/index.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "drag/binio.hpp"
#include "drag/errors.hpp"
#include "json.hpp"

namespace drag {

namespace {

constexpr char kMagic[4] = {'D', 'R', 'I', 'N'};
constexpr uint32_t kVersion = 1;

// Normalization in double, stored as f32: reproducible to the last bit.
std::vector<float> unit_normalize(const std::vector<float>& v, const std::string& id) {
  double norm = 0;
  for (float x : v) norm += static_cast<double>(x) * x;
  norm = std::sqrt(norm);
  if (norm == 0)
    throw_error(ErrorKind::ZeroVector, "vector '" + id + "' has zero norm");
  std::vector<float> out(v.size());
  for (size_t i = 0; i < v.size(); ++i)
    out[i] = static_cast<float>(static_cast<double>(v[i]) / norm);
  return out;
}

}  // namespace

RetrievalIndex build_index(const std::vector<EmbeddingVector>& vectors,
                           const ProjectionHead* head) {
  RetrievalIndex index;
  if (!vectors.empty()) {
    size_t raw_dim = vectors.front().dim();
    index.dim = static_cast<uint32_t>(head ? head->out_dim : raw_dim);
    std::set<std::string> ids;
    for (const auto& v : vectors) {
      if (v.dim() != raw_dim)
        throw_error(ErrorKind::DimMismatch,
                    "vector '" + v.id + "' has dim " + std::to_string(v.dim()) +
                        ", expected " + std::to_string(raw_dim));
      if (!ids.insert(v.id).second)
        throw_error(ErrorKind::DuplicateId, "duplicate id '" + v.id + "'");
      EmbeddingVector entry;
      entry.id = v.id;
      entry.values = unit_normalize(head ? apply_head(*head, v.values) : v.values, v.id);
      index.entries.push_back(std::move(entry));
    }
    std::sort(index.entries.begin(), index.entries.end(),
              [](const EmbeddingVector& a, const EmbeddingVector& b) {
                return a.id < b.id;
              });
  }
  if (head) index.head_fingerprint = head_fingerprint(*head);
  return index;
}

QueryResult query_top_k(const RetrievalIndex& index, const EmbeddingVector& query,
                        size_t k, const ProjectionHead* head) {
  if (k < 1) throw_error(ErrorKind::PreconditionViolated, "k must be >= 1");
  std::vector<float> q = head ? apply_head(*head, query.values) : query.values;
  if (!index.entries.empty() && q.size() != index.dim)
    throw_error(ErrorKind::DimMismatch,
                "query dim " + std::to_string(q.size()) + " vs index dim " +
                    std::to_string(index.dim));
  q = unit_normalize(q, query.id.empty() ? "<query>" : query.id);

  QueryResult result;
  result.query_id = query.id;
  result.hits.reserve(index.size());
  for (const auto& entry : index.entries) {
    double score = 0;
    for (size_t i = 0; i < q.size(); ++i)
      score += static_cast<double>(q[i]) * static_cast<double>(entry.values[i]);
    result.hits.push_back({entry.id, score});
  }
  std::sort(result.hits.begin(), result.hits.end(),
            [](const QueryHit& a, const QueryHit& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.id < b.id;
            });
  if (result.hits.size() > k) result.hits.resize(k);
  return result;
}

size_t save_index(const RetrievalIndex& index, const std::string& path) {
  ByteWriter w;
  w.raw(std::string(kMagic, 4));
  w.u32(kVersion);
  w.u32(index.dim);
  w.u64(index.entries.size());
  w.u8(index.head_fingerprint ? 1 : 0);
  w.u64(index.head_fingerprint.value_or(0));
  for (const auto& entry : index.entries) {
    w.u32(static_cast<uint32_t>(entry.id.size()));
    w.raw(entry.id);
    for (float x : entry.values) w.f32(x);
  }
  write_file_bytes(path, w.bytes);
  return w.bytes.size();
}

RetrievalIndex load_index(const std::string& path) {
  std::string bytes = read_file_bytes(path);
  ByteReader r(bytes, "index file");
  if (r.raw(4) != std::string(kMagic, 4))
    throw_error(ErrorKind::BadMagic, "not an index file (expected DRIN)");
  uint32_t version = r.u32();
  if (version != kVersion)
    throw_error(ErrorKind::UnsupportedVersion,
                "index file version " + std::to_string(version));
  RetrievalIndex index;
  index.dim = r.u32();
  uint64_t count = r.u64();
  bool has_fp = r.u8() != 0;
  uint64_t fp = r.u64();
  if (has_fp) index.head_fingerprint = fp;
  index.entries.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    EmbeddingVector entry;
    uint32_t id_len = r.u32();
    entry.id = r.raw(id_len);
    entry.values.resize(index.dim);
    for (uint32_t d = 0; d < index.dim; ++d) entry.values[d] = r.f32();
    index.entries.push_back(std::move(entry));
  }
  return index;
}

std::string query_result_to_json(const QueryResult& result) {
  nlohmann::ordered_json j;
  j["query_id"] = result.query_id;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& hit : result.hits) {
    nlohmann::ordered_json h;
    h["id"] = hit.id;
    h["score"] = hit.score;
    arr.push_back(h);
  }
  j["results"] = arr;
  return j.dump();
}

std::string query_result_to_tsv(const QueryResult& result) {
  std::ostringstream out;
  for (const auto& hit : result.hits)
    out << result.query_id << "\t" << hit.id << "\t" << hit.score << "\n";
  return out.str();
}

}  // namespace drag
