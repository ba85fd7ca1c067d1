#include "drag/train.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "drag/binio.hpp"
#include "drag/errors.hpp"
#include "drag/hash.hpp"
#include "drag/variants.hpp"
#include "json.hpp"

namespace drag {

namespace {

constexpr char kMagic[4] = {'D', 'R', 'P', 'H'};
constexpr uint32_t kVersion = 1;

std::vector<double> widen(const std::vector<float>& v) {
  return std::vector<double>(v.begin(), v.end());
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

std::vector<double> apply_head_d(const ProjectionHead& head,
                                 const std::vector<double>& x) {
  std::vector<double> y(head.out_dim, 0.0);
  for (size_t r = 0; r < head.out_dim; ++r) {
    double s = head.bias.empty() ? 0.0 : head.bias[r];
    const double* row = head.weights.data() + r * head.in_dim;
    for (size_t c = 0; c < head.in_dim; ++c) s += row[c] * x[c];
    y[r] = s;
  }
  return y;
}

}  // namespace

ProjectionHead ProjectionHead::identity(size_t dim) {
  ProjectionHead h;
  h.in_dim = h.out_dim = dim;
  h.weights.assign(dim * dim, 0.0);
  for (size_t i = 0; i < dim; ++i) h.weights[i * dim + i] = 1.0;
  h.bias.assign(dim, 0.0);
  return h;
}

std::vector<float> apply_head(const ProjectionHead& head,
                              const std::vector<float>& v) {
  if (v.size() != head.in_dim)
    throw_error(ErrorKind::DimMismatch,
                "vector dim " + std::to_string(v.size()) + " vs head in_dim " +
                    std::to_string(head.in_dim));
  auto y = apply_head_d(head, widen(v));
  std::vector<float> out(y.size());
  for (size_t i = 0; i < y.size(); ++i) out[i] = static_cast<float>(y[i]);
  return out;
}

std::string encode_head(const ProjectionHead& head) {
  ByteWriter w;
  w.raw(std::string(kMagic, 4));
  w.u32(kVersion);
  w.u32(static_cast<uint32_t>(head.in_dim));
  w.u32(static_cast<uint32_t>(head.out_dim));
  for (double x : head.weights) w.f32(static_cast<float>(x));
  for (size_t i = 0; i < head.out_dim; ++i)
    w.f32(head.bias.empty() ? 0.0f : static_cast<float>(head.bias[i]));
  return w.bytes;
}

ProjectionHead decode_head(const std::string& bytes) {
  ByteReader r(bytes, "head checkpoint");
  if (r.raw(4) != std::string(kMagic, 4))
    throw_error(ErrorKind::BadMagic, "not a head checkpoint (expected DRPH)");
  uint32_t version = r.u32();
  if (version != kVersion)
    throw_error(ErrorKind::UnsupportedVersion,
                "head checkpoint version " + std::to_string(version));
  ProjectionHead h;
  h.in_dim = r.u32();
  h.out_dim = r.u32();
  h.weights.resize(h.in_dim * h.out_dim);
  for (auto& x : h.weights) x = r.f32();
  h.bias.resize(h.out_dim);
  for (auto& x : h.bias) x = r.f32();
  return h;
}

void save_head(const ProjectionHead& head, const std::string& path) {
  write_file_bytes(path, encode_head(head));
}

ProjectionHead load_head(const std::string& path) {
  return decode_head(read_file_bytes(path));
}

uint64_t head_fingerprint(const ProjectionHead& head) {
  std::string bytes = encode_head(head);
  return fnv1a64(bytes.data(), bytes.size());
}

// ---------------------------------------------------------------------------
// Cosine similarity

namespace {

double cosine_impl(const double* u, const double* v, size_t n) {
  double uu = 0, vv = 0, uv = 0;
  for (size_t i = 0; i < n; ++i) {
    uu += u[i] * u[i];
    vv += v[i] * v[i];
    uv += u[i] * v[i];
  }
  if (uu == 0 || vv == 0)
    throw_error(ErrorKind::ZeroVector, "cosine of a zero vector is undefined");
  return uv / (std::sqrt(uu) * std::sqrt(vv));
}

}  // namespace

double cosine_similarity(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size())
    throw_error(ErrorKind::DimMismatch,
                "cosine dims " + std::to_string(u.size()) + " vs " +
                    std::to_string(v.size()));
  return cosine_impl(u.data(), v.data(), u.size());
}

double cosine_similarity(const std::vector<float>& u, const std::vector<float>& v) {
  return cosine_similarity(widen(u), widen(v));
}

// ---------------------------------------------------------------------------
// InfoNCE with analytic gradient

LossAndGrad info_nce_loss_and_grad(const TripletBatch& batch,
                                   const ProjectionHead& head, double tau,
                                   bool in_batch_negatives) {
  if (batch.queries.empty())
    throw_error(ErrorKind::PreconditionViolated, "empty triplet batch");
  if (!(tau > 0))
    throw_error(ErrorKind::PreconditionViolated, "temperature must be positive");

  // Head-applied diagram vectors, one per distinct id in the batch.
  std::map<std::string, std::vector<double>> base;
  std::map<std::string, std::vector<double>> projected;
  for (const auto& [id, vec] : batch.diagrams) {
    if (vec.size() != head.in_dim)
      throw_error(ErrorKind::DimMismatch, "diagram '" + id + "' dim mismatch");
    base[id] = widen(vec);
    projected[id] = apply_head_d(head, base[id]);
  }
  auto projected_of = [&](const std::string& id) -> const std::vector<double>& {
    auto it = projected.find(id);
    if (it == projected.end())
      throw_error(ErrorKind::PreconditionViolated,
                  "diagram '" + id + "' missing from batch");
    return it->second;
  };

  const size_t q_count = batch.queries.size();
  LossAndGrad out;
  out.dweights.assign(head.weights.size(), 0.0);
  out.dbias.assign(head.out_dim, 0.0);
  std::map<std::string, std::vector<double>> diagram_grads;  // w.r.t. projected

  double total_loss = 0;
  for (const auto& query : batch.queries) {
    // Reference list: positive first, then explicit negatives, then in-batch
    // positives of the other queries. Deduplicated, positive excluded.
    std::vector<std::string> refs{query.positive_id};
    std::set<std::string> seen{query.positive_id};
    for (const auto& id : query.negative_ids)
      if (seen.insert(id).second) refs.push_back(id);
    if (in_batch_negatives) {
      for (const auto& other : batch.queries)
        if (seen.insert(other.positive_id).second) refs.push_back(other.positive_id);
    }
    if (refs.size() < 2)
      throw_error(ErrorKind::EmptyNegatives,
                  "query for '" + query.positive_id + "' has no negatives");

    if (query.sketch.size() != head.in_dim)
      throw_error(ErrorKind::DimMismatch, "sketch vector dim mismatch");
    std::vector<double> s = widen(query.sketch);
    std::vector<double> u = apply_head_d(head, s);
    double u_norm = norm(u);
    if (u_norm == 0)
      throw_error(ErrorKind::ZeroVector, "projected sketch vector is zero");

    const size_t r_count = refs.size();
    std::vector<double> cos(r_count), logits(r_count), v_norms(r_count);
    for (size_t j = 0; j < r_count; ++j) {
      const auto& v = projected_of(refs[j]);
      double v_norm = norm(v);
      if (v_norm == 0)
        throw_error(ErrorKind::ZeroVector,
                    "projected diagram '" + refs[j] + "' is zero");
      v_norms[j] = v_norm;
      cos[j] = dot(u, v) / (u_norm * v_norm);
      logits[j] = cos[j] / tau;
    }

    double max_logit = *std::max_element(logits.begin(), logits.end());
    double denom = 0;
    for (double z : logits) denom += std::exp(z - max_logit);
    double log_sum = max_logit + std::log(denom);
    total_loss += log_sum - logits[0];

    // d loss / d cos_j = (softmax_j - [j == 0]) / tau
    std::vector<double> du(head.out_dim, 0.0);
    for (size_t j = 0; j < r_count; ++j) {
      double p = std::exp(logits[j] - log_sum);
      double gc = (p - (j == 0 ? 1.0 : 0.0)) / tau;
      const auto& v = projected_of(refs[j]);
      double inv_uv = 1.0 / (u_norm * v_norms[j]);
      for (size_t a = 0; a < head.out_dim; ++a)
        du[a] += gc * (v[a] * inv_uv - cos[j] * u[a] / (u_norm * u_norm));
      auto& dv = diagram_grads[refs[j]];
      if (dv.empty()) dv.assign(head.out_dim, 0.0);
      for (size_t a = 0; a < head.out_dim; ++a)
        dv[a] += gc * (u[a] * inv_uv - cos[j] * v[a] / (v_norms[j] * v_norms[j]));
    }

    // Chain through u = W s + b.
    for (size_t a = 0; a < head.out_dim; ++a) {
      double* row = out.dweights.data() + a * head.in_dim;
      for (size_t c = 0; c < head.in_dim; ++c) row[c] += du[a] * s[c];
      out.dbias[a] += du[a];
    }
  }

  // Chain through v = W d + b, once per distinct diagram.
  for (const auto& [id, dv] : diagram_grads) {
    const auto& d = base.at(id);
    for (size_t a = 0; a < head.out_dim; ++a) {
      double* row = out.dweights.data() + a * head.in_dim;
      for (size_t c = 0; c < head.in_dim; ++c) row[c] += dv[a] * d[c];
      out.dbias[a] += dv[a];
    }
  }

  double inv_q = 1.0 / static_cast<double>(q_count);
  out.loss = total_loss * inv_q;
  for (auto& x : out.dweights) x *= inv_q;
  for (auto& x : out.dbias) x *= inv_q;
  return out;
}

// ---------------------------------------------------------------------------
// Schedule

double learning_rate_at(long step, long total_steps, const TrainConfig& cfg) {
  if (total_steps < 1)
    throw_error(ErrorKind::PreconditionViolated, "total_steps must be >= 1");
  if (step < 0 || step > total_steps)
    throw_error(ErrorKind::PreconditionViolated, "step outside [0, total_steps]");
  long warmup = static_cast<long>(
      std::ceil(cfg.warmup_fraction * static_cast<double>(total_steps)));
  if (step < warmup)
    return cfg.peak_lr * static_cast<double>(step) / static_cast<double>(warmup);
  long span = total_steps - warmup;
  double progress = span > 0 ? static_cast<double>(step - warmup) /
                                   static_cast<double>(span)
                             : 0.0;
  return cfg.peak_lr * 0.5 * (1.0 + std::cos(M_PI * progress));
}

// ---------------------------------------------------------------------------
// Sampler

TripletBatch sample_micro_batch(const AlignDataset& dataset, uint64_t seed,
                                const TrainConfig& cfg) {
  std::vector<std::string> pool;
  for (const auto& [id, _] : dataset.diagrams) pool.push_back(id);
  const size_t targets = static_cast<size_t>(cfg.targets_per_micro_batch);
  if (pool.size() < targets)
    throw_error(ErrorKind::InsufficientData,
                "pool has " + std::to_string(pool.size()) + " diagrams, need " +
                    std::to_string(targets));

  SplitMix64 rng(seed);
  for (size_t i = pool.size(); i > 1; --i)
    std::swap(pool[i - 1], pool[rng.next_below(i)]);

  TripletBatch batch;
  auto include_diagram = [&](const std::string& id) {
    auto it = dataset.diagrams.find(id);
    if (it == dataset.diagrams.end())
      throw_error(ErrorKind::InsufficientData, "no diagram vector for '" + id + "'");
    batch.diagrams[id] = it->second;
  };

  const size_t pool_size = dataset.diagrams.size();
  std::vector<std::string> all_ids;
  for (const auto& [id, _] : dataset.diagrams) all_ids.push_back(id);

  for (size_t t = 0; t < targets; ++t) {
    const std::string& target = pool[t];
    auto sk = dataset.sketches.find(target);
    if (sk == dataset.sketches.end() || sk->second.size() != kAllVariants.size())
      throw_error(ErrorKind::InsufficientData,
                  "'" + target + "' does not have all " +
                      std::to_string(kAllVariants.size()) + " variants");
    include_diagram(target);
    for (const auto& [variant_name, sketch_vec] : sk->second) {
      TripletQuery q;
      q.sketch = sketch_vec;
      q.positive_id = target;
      size_t want = std::min<size_t>(cfg.explicit_negatives, pool_size - 1);
      std::set<std::string> chosen;
      while (chosen.size() < want) {
        const std::string& cand = all_ids[rng.next_below(all_ids.size())];
        if (cand == target || !chosen.insert(cand).second) continue;
        q.negative_ids.push_back(cand);
        include_diagram(cand);
      }
      batch.queries.push_back(std::move(q));
    }
  }
  return batch;
}

// ---------------------------------------------------------------------------
// Trainer

TrainResult train_projection(const AlignDataset& dataset, const TrainConfig& cfg) {
  if (dataset.diagrams.empty())
    throw_error(ErrorKind::InsufficientData, "empty dataset");
  if (!(cfg.temperature > 0))
    throw_error(ErrorKind::PreconditionViolated, "temperature must be positive");
  if (!(cfg.warmup_fraction >= 0 && cfg.warmup_fraction < 1))
    throw_error(ErrorKind::PreconditionViolated, "warmup_fraction must be in [0, 1)");
  if (cfg.accumulation_steps < 1)
    throw_error(ErrorKind::PreconditionViolated, "accumulation_steps must be >= 1");
  const size_t dim = dataset.diagrams.begin()->second.size();

  TrainResult result;
  result.head = ProjectionHead::identity(dim);

  const long pool_size = static_cast<long>(dataset.diagrams.size());
  const long batches_per_epoch = pool_size / cfg.targets_per_micro_batch;
  if (batches_per_epoch < 1)
    throw_error(ErrorKind::InsufficientData,
                "pool smaller than one micro-batch");
  const long total_micro = static_cast<long>(cfg.epochs) * batches_per_epoch;
  const long acc = cfg.accumulation_steps;
  const long total_updates = (total_micro + acc - 1) / acc;

  SplitMix64 seed_stream(cfg.seed);
  std::vector<double> grad_w(result.head.weights.size(), 0.0);
  std::vector<double> grad_b(result.head.out_dim, 0.0);
  long accumulated = 0;
  long update = 0;

  for (long mb = 0; mb < total_micro; ++mb) {
    TripletBatch batch = sample_micro_batch(dataset, seed_stream.next(), cfg);
    LossAndGrad lg = info_nce_loss_and_grad(batch, result.head, cfg.temperature,
                                            cfg.in_batch_negatives);
    for (size_t i = 0; i < grad_w.size(); ++i) grad_w[i] += lg.dweights[i];
    for (size_t i = 0; i < grad_b.size(); ++i) grad_b[i] += lg.dbias[i];
    ++accumulated;

    double lr = learning_rate_at(update, total_updates, cfg);
    result.log.push_back({update, mb, lr, lg.loss});

    if (accumulated == acc || mb + 1 == total_micro) {
      double inv = 1.0 / static_cast<double>(accumulated);
      for (size_t i = 0; i < grad_w.size(); ++i)
        result.head.weights[i] -= lr * grad_w[i] * inv;
      for (size_t i = 0; i < grad_b.size(); ++i)
        result.head.bias[i] -= lr * grad_b[i] * inv;
      std::fill(grad_w.begin(), grad_w.end(), 0.0);
      std::fill(grad_b.begin(), grad_b.end(), 0.0);
      accumulated = 0;
      ++update;
    }
  }
  return result;
}

std::string train_log_to_jsonl(const std::vector<TrainStepLog>& log) {
  std::string out;
  for (const auto& entry : log) {
    nlohmann::ordered_json j;
    j["step"] = entry.step;
    j["micro_batch"] = entry.micro_batch;
    j["lr"] = entry.lr;
    j["loss"] = entry.loss;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace drag
