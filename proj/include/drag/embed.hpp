#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drag/kg.hpp"

namespace drag {

struct EmbeddingVector {
  std::string id;
  std::vector<float> values;

  size_t dim() const { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

// Deterministic local embedder: hashes graph tokens (label words, type and
// shape names, typed edge pairs, degree buckets, flow direction) into +-1
// contributions at FNV-chosen indices, then L2-normalizes. A stand-in base
// encoder that needs no model weights; empty graphs map to the zero vector.
EmbeddingVector embed_feature_hash(const TopologyGraph& g, size_t dim);

// Binary store, "DRIX" magic, entries sorted by id, 32-bit LE floats.
size_t write_embedding_file(const std::vector<EmbeddingVector>& vectors,
                            const std::string& path);
std::vector<EmbeddingVector> read_embedding_file(const std::string& path);

std::string encode_embedding_file(const std::vector<EmbeddingVector>& vectors);
std::vector<EmbeddingVector> decode_embedding_file(const std::string& bytes);

// Remote provider contract: POST {endpoint}/embed with
// {"id", "kind", "payload"}; response {"id", "dim", "values"}.
struct RemoteEmbedConfig {
  std::string endpoint;
  int timeout_ms = 10000;
  int retries = 2;
  std::string api_key;  // sent as a bearer token when non-empty
};

EmbeddingVector remote_embed(const RemoteEmbedConfig& config,
                             const std::string& id, const std::string& kind,
                             const std::string& payload_json);

}  // namespace drag
