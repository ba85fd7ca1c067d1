#include "drag/embed.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "drag/binio.hpp"
#include "drag/errors.hpp"
#include "drag/hash.hpp"

namespace drag {

namespace {

constexpr char kMagic[4] = {'D', 'R', 'I', 'X'};
constexpr uint32_t kVersion = 1;

std::string ascii_lower(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

const char* degree_bucket(size_t degree) {
  switch (degree) {
    case 0: return "deg:0";
    case 1: return "deg:1";
    case 2: return "deg:2";
    default: return "deg:3+";
  }
}

}  // namespace

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_error(ErrorKind::IoFailure, "cannot open '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (in.bad()) throw_error(ErrorKind::IoFailure, "read failed on '" + path + "'");
  return bytes;
}

void write_file_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_error(ErrorKind::IoFailure, "cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw_error(ErrorKind::IoFailure, "write failed on '" + path + "'");
}

EmbeddingVector embed_feature_hash(const TopologyGraph& g, size_t dim) {
  if (dim < 8)
    throw_error(ErrorKind::PreconditionViolated, "embedding dim must be >= 8");

  EmbeddingVector v;
  v.id = g.diagram_id;
  v.values.assign(dim, 0.0f);

  auto add_token = [&](const std::string& token) {
    uint64_t h = fnv1a64(token);
    size_t index = static_cast<size_t>(h % dim);
    float sign = (h >> 63) ? -1.0f : 1.0f;
    v.values[index] += sign;
  };
  auto add_words = [&](const std::string& text) {
    for (const auto& w : split_words(ascii_lower(text))) add_token(w);
  };

  std::map<std::string, size_t> degree;
  for (const auto& e : g.edges) {
    ++degree[e.source];
    ++degree[e.target];
  }

  for (const auto& n : g.nodes) {
    add_words(n.name);
    add_token(to_string(n.node_type));
    add_token(to_string(n.shape));
    add_token(degree_bucket(degree.count(n.id) ? degree[n.id] : 0));
  }
  for (const auto& gr : g.groups) add_words(gr.label);
  for (const auto& t : g.free_texts) add_words(t.content);
  for (const auto& e : g.edges) {
    const NodeRecord* s = g.find_node(e.source);
    const NodeRecord* t = g.find_node(e.target);
    if (!s || !t) continue;
    add_token(std::string("edge:") + to_string(s->node_type) + ">" +
              to_string(t->node_type));
  }
  if (!g.nodes.empty())
    add_token(std::string("flow:") + to_string(g.layout.flow_direction));

  double norm = 0;
  for (float x : v.values) norm += static_cast<double>(x) * x;
  norm = std::sqrt(norm);
  if (norm > 0)
    for (float& x : v.values) x = static_cast<float>(x / norm);
  return v;
}

std::string encode_embedding_file(const std::vector<EmbeddingVector>& vectors) {
  size_t dim = vectors.empty() ? 0 : vectors.front().dim();
  std::set<std::string> ids;
  for (const auto& v : vectors) {
    if (v.dim() != dim)
      throw_error(ErrorKind::DimMismatch,
                  "vector '" + v.id + "' has dim " + std::to_string(v.dim()) +
                      ", expected " + std::to_string(dim));
    if (!ids.insert(v.id).second)
      throw_error(ErrorKind::DuplicateId, "duplicate vector id '" + v.id + "'");
  }
  auto sorted = vectors;
  std::sort(sorted.begin(), sorted.end(),
            [](const EmbeddingVector& a, const EmbeddingVector& b) {
              return a.id < b.id;
            });

  ByteWriter w;
  w.raw(std::string(kMagic, 4));
  w.u32(kVersion);
  w.u32(static_cast<uint32_t>(dim));
  w.u64(sorted.size());
  for (const auto& v : sorted) {
    w.u32(static_cast<uint32_t>(v.id.size()));
    w.raw(v.id);
    for (float x : v.values) w.f32(x);
  }
  return w.bytes;
}

std::vector<EmbeddingVector> decode_embedding_file(const std::string& bytes) {
  ByteReader r(bytes, "embedding file");
  if (r.raw(4) != std::string(kMagic, 4))
    throw_error(ErrorKind::BadMagic, "not an embedding file (expected DRIX)");
  uint32_t version = r.u32();
  if (version != kVersion)
    throw_error(ErrorKind::UnsupportedVersion,
                "embedding file version " + std::to_string(version));
  uint32_t dim = r.u32();
  uint64_t count = r.u64();
  std::vector<EmbeddingVector> out;
  out.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    EmbeddingVector v;
    uint32_t id_len = r.u32();
    v.id = r.raw(id_len);
    v.values.resize(dim);
    for (uint32_t d = 0; d < dim; ++d) v.values[d] = r.f32();
    out.push_back(std::move(v));
  }
  return out;
}

size_t write_embedding_file(const std::vector<EmbeddingVector>& vectors,
                            const std::string& path) {
  write_file_bytes(path, encode_embedding_file(vectors));
  return vectors.size();
}

std::vector<EmbeddingVector> read_embedding_file(const std::string& path) {
  return decode_embedding_file(read_file_bytes(path));
}

}  // namespace drag
