#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "drag/embed.hpp"

namespace drag {

// Trainable linear map shared by the sketch and diagram sides; sits on top
// of frozen base embeddings. Row-major out_dim x in_dim.
struct ProjectionHead {
  size_t in_dim = 0;
  size_t out_dim = 0;
  std::vector<double> weights;
  std::vector<double> bias;  // empty = no bias term

  static ProjectionHead identity(size_t dim);
  double& at(size_t row, size_t col) { return weights[row * in_dim + col]; }
  double at(size_t row, size_t col) const { return weights[row * in_dim + col]; }
};

std::vector<float> apply_head(const ProjectionHead& head,
                              const std::vector<float>& v);

// "DRPH" checkpoint: version, dims, row-major f32 weights, f32 bias.
void save_head(const ProjectionHead& head, const std::string& path);
ProjectionHead load_head(const std::string& path);
std::string encode_head(const ProjectionHead& head);
ProjectionHead decode_head(const std::string& bytes);
uint64_t head_fingerprint(const ProjectionHead& head);

double cosine_similarity(const std::vector<float>& u, const std::vector<float>& v);
double cosine_similarity(const std::vector<double>& u, const std::vector<double>& v);

struct TripletQuery {
  std::vector<float> sketch;
  std::string positive_id;
  std::vector<std::string> negative_ids;  // explicit negatives, <= cfg limit
};

struct TripletBatch {
  std::vector<TripletQuery> queries;
  std::map<std::string, std::vector<float>> diagrams;  // by id
};

struct TrainConfig {
  double temperature = 0.05;
  int epochs = 50;
  double peak_lr = 1e-5;
  double warmup_fraction = 0.05;
  int accumulation_steps = 3;
  int targets_per_micro_batch = 20;
  int explicit_negatives = 2;
  bool in_batch_negatives = true;
  uint64_t seed = 42;
};

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> dweights;
  std::vector<double> dbias;
};

// Softmax contrastive loss over temperature-scaled cosine similarities, with
// the exact analytic gradient w.r.t. every head parameter. Negatives per
// query: its explicit ids plus, when enabled, the other queries' positives.
LossAndGrad info_nce_loss_and_grad(const TripletBatch& batch,
                                   const ProjectionHead& head, double tau,
                                   bool in_batch_negatives = true);

// Linear warmup to peak over ceil(warmup_fraction*total_steps) steps, then
// cosine decay to zero at total_steps.
double learning_rate_at(long step, long total_steps, const TrainConfig& cfg);

// Training pool: base sketch vectors per (diagram, variant) and base diagram
// vectors per id.
struct AlignDataset {
  std::map<std::string, std::vector<float>> diagrams;
  // id -> (variant name, vector), kept in canonical variant order.
  std::map<std::string, std::vector<std::pair<std::string, std::vector<float>>>>
      sketches;
};

// Seeded draw of targets_per_micro_batch distinct targets; every variant of a
// target becomes one query with up to explicit_negatives distinct negatives
// drawn from the pool (excluding the positive).
TripletBatch sample_micro_batch(const AlignDataset& dataset, uint64_t seed,
                                const TrainConfig& cfg);

struct TrainStepLog {
  long step = 0;         // optimizer update index this micro-batch feeds
  long micro_batch = 0;  // global micro-batch counter
  double lr = 0.0;
  double loss = 0.0;
};

struct TrainResult {
  ProjectionHead head;
  std::vector<TrainStepLog> log;
};

// Plain gradient descent with gradient accumulation, identity-initialized
// square head. Byte-deterministic given cfg.seed.
TrainResult train_projection(const AlignDataset& dataset, const TrainConfig& cfg);

std::string train_log_to_jsonl(const std::vector<TrainStepLog>& log);

}  // namespace drag
