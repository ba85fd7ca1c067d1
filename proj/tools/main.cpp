// drag: structure-aware sketch-to-diagram retrieval toolkit, one binary with
// subcommands for every pipeline stage.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "drag/binio.hpp"
#include "drag/embed.hpp"
#include "drag/errors.hpp"
#include "drag/eval.hpp"
#include "drag/filter.hpp"
#include "drag/hash.hpp"
#include "drag/index.hpp"
#include "drag/kg.hpp"
#include "drag/loss.hpp"
#include "drag/orchestrate.hpp"
#include "drag/svg.hpp"
#include "drag/synth.hpp"
#include "drag/train.hpp"
#include "drag/variants.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) drag::throw_error(drag::ErrorKind::IoFailure, "cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

// Ordered parallel map; worker count bounded by jobs, results in input order.
template <typename In, typename Fn>
auto parallel_map(const std::vector<In>& inputs, int jobs, Fn fn)
    -> std::vector<decltype(fn(inputs.front()))> {
  using Out = decltype(fn(inputs.front()));
  std::vector<Out> outputs(inputs.size());
  if (jobs <= 1 || inputs.size() <= 1) {
    for (size_t i = 0; i < inputs.size(); ++i) outputs[i] = fn(inputs[i]);
    return outputs;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= inputs.size()) return;
      try {
        outputs[i] = fn(inputs[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  int n = std::min<int>(jobs, static_cast<int>(inputs.size()));
  for (int t = 0; t < n; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  return outputs;
}

// Every artifact-producing run records what went in and what came out.
class ManifestWriter {
 public:
  ManifestWriter(std::vector<std::string> argv, uint64_t seed)
      : argv_(std::move(argv)), seed_(seed),
        start_(std::chrono::steady_clock::now()) {}

  void add_input(const std::string& path) { inputs_.push_back(path); }
  void add_output(const std::string& path) { outputs_.push_back(path); }
  void set_config(const char* key, const ordered_json& value) { config_[key] = value; }

  void write() const {
    if (outputs_.empty()) return;
    ordered_json j;
    j["tool_version"] = kToolVersion;
    std::string cmd;
    for (const auto& a : argv_) {
      if (!cmd.empty()) cmd += ' ';
      cmd += a;
    }
    j["command"] = cmd;
    j["seed"] = seed_;
    j["config"] = config_;
    auto digest_map = [](const std::vector<std::string>& paths) {
      ordered_json m;
      for (const auto& p : paths) {
        if (!fs::exists(p)) continue;
        if (fs::is_directory(p)) {
          // Directory digest: hash of (relative path, file hash) pairs in
          // sorted order, manifest files excluded.
          std::vector<std::string> files;
          for (const auto& entry : fs::recursive_directory_iterator(p))
            if (entry.is_regular_file() &&
                entry.path().filename() != "manifest.json")
              files.push_back(entry.path().string());
          std::sort(files.begin(), files.end());
          uint64_t h = drag::kFnvOffsetBasis;
          for (const auto& f : files) {
            h = drag::fnv1a64(fs::relative(f, p).string(), h);
            std::string bytes = drag::read_file_bytes(f);
            h = drag::fnv1a64(bytes.data(), bytes.size(), h);
          }
          m[p] = drag::to_hex64(h);
          continue;
        }
        std::string bytes = drag::read_file_bytes(p);
        m[p] = drag::to_hex64(drag::fnv1a64(bytes.data(), bytes.size()));
      }
      return m;
    };
    j["inputs"] = digest_map(inputs_);
    j["outputs"] = digest_map(outputs_);
    auto elapsed = std::chrono::steady_clock::now() - start_;
    j["wall_clock_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();

    fs::path target(outputs_.front());
    fs::path manifest = fs::is_directory(target)
                            ? target / "manifest.json"
                            : fs::path(target.string() + ".manifest.json");
    drag::write_file_bytes(manifest.string(), j.dump(2) + "\n");
  }

 private:
  std::vector<std::string> argv_;
  uint64_t seed_;
  ordered_json config_ = ordered_json::object();
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_;
};

// Variant JSONL lines carry source_diagram_id + variant; canonical records do
// not. Returns (graph, embedding id).
std::pair<drag::TopologyGraph, std::string> parse_any_record(const std::string& line) {
  ordered_json j = ordered_json::parse(line, nullptr, true);
  if (j.is_object() && j.contains("variant") && j.contains("source_diagram_id")) {
    drag::VariantRecord r = drag::parse_variant_record(line);
    return {r.graph, r.source_diagram_id + "#" + to_string(r.variant)};
  }
  drag::TopologyGraph g = drag::parse_graph_record(line);
  return {g, g.diagram_id};
}

std::string default_template_dir() {
  if (const char* env = std::getenv("DRAG_TEMPLATE_DIR")) return env;
  return "assets/prompts";
}

// ---------------------------------------------------------------------------
// Subcommand bodies

int cmd_kg(const std::string& mode, const std::string& in_path,
           const std::string& out_path, ManifestWriter& manifest) {
  manifest.add_input(in_path);
  std::ostringstream out;
  std::vector<std::string> diagnostics;
  for (const auto& line : read_lines(in_path)) {
    drag::TopologyGraph g = drag::parse_graph_record(line);
    g = drag::normalize_graph(g, &diagnostics);
    if (mode == "infer-layout") g.layout = drag::infer_layout_fields(g);
    out << drag::serialize_graph_record(g) << "\n";
  }
  drag::write_file_bytes(out_path, out.str());
  for (const auto& d : diagnostics) std::cerr << "note: " << d << "\n";
  manifest.add_output(out_path);
  manifest.write();
  return 0;
}

int cmd_kg_validate(const std::string& in_path) {
  size_t line_no = 0, bad = 0;
  ordered_json all = ordered_json::array();
  for (const auto& line : read_lines(in_path)) {
    ++line_no;
    drag::TopologyGraph g = drag::parse_graph_record(line);
    auto report = drag::validate_graph(g);
    if (!report.ok()) ++bad;
    ordered_json entry;
    entry["line"] = line_no;
    entry["diagram_id"] = g.diagram_id;
    auto arr = ordered_json::array();
    for (const auto& v : report.violations)
      arr.push_back(v.where + ": " + v.message);
    entry["violations"] = arr;
    all.push_back(entry);
  }
  std::cout << all.dump(2) << "\n";
  return bad == 0 ? 0 : 1;
}

int cmd_variants_generate(const std::string& in_path, const std::string& out_path,
                          uint64_t seed, double rho, int jobs,
                          ManifestWriter& manifest) {
  manifest.add_input(in_path);
  auto lines = read_lines(in_path);
  drag::SeedSpec spec{seed, rho};
  auto chunks = parallel_map(lines, jobs, [&](const std::string& line) {
    drag::TopologyGraph g = drag::normalize_graph(drag::parse_graph_record(line));
    std::string chunk;
    for (const auto& record : drag::generate_variant_set(g, spec)) {
      chunk += drag::serialize_variant_record(record);
      chunk += '\n';
    }
    return chunk;
  });
  std::string out;
  for (const auto& c : chunks) out += c;
  drag::write_file_bytes(out_path, out);
  manifest.add_output(out_path);
  manifest.write();
  return 0;
}

int cmd_variants_render(const std::string& in_path, const std::string& out_dir,
                        int canvas, ManifestWriter& manifest) {
  manifest.add_input(in_path);
  fs::create_directories(out_dir);
  size_t written = 0;
  for (const auto& line : read_lines(in_path)) {
    ordered_json j = ordered_json::parse(line);
    std::string name;
    drag::TopologyGraph g;
    if (j.contains("variant") && j.contains("source_diagram_id")) {
      drag::VariantRecord r = drag::parse_variant_record(line);
      g = r.graph;
      name = r.source_diagram_id + "." + to_string(r.variant) + ".svg";
    } else {
      g = drag::parse_graph_record(line);
      name = g.diagram_id + ".svg";
    }
    fs::path path = fs::path(out_dir) / name;
    drag::write_file_bytes(path.string(), drag::render_sketch_svg(g, canvas));
    ++written;
  }
  std::cout << "{\"rendered\": " << written << "}\n";
  manifest.add_output(out_dir);
  manifest.write();
  return 0;
}

int cmd_loss_aggregate(const std::string& in_path, const std::string& out_path,
                       const std::string& csv_path, bool pretty,
                       ManifestWriter& manifest) {
  manifest.add_input(in_path);
  std::vector<drag::VariantRecord> records;
  for (const auto& line : read_lines(in_path))
    records.push_back(drag::parse_variant_record(line));
  drag::LossSummary summary = drag::aggregate_variant_losses(records);
  std::string json = drag::loss_summary_to_json(summary);
  if (!out_path.empty()) {
    drag::write_file_bytes(out_path, json + "\n");
    manifest.add_output(out_path);
  }
  if (!csv_path.empty()) {
    drag::write_file_bytes(csv_path, drag::loss_summary_to_csv(summary));
    manifest.add_output(csv_path);
  }
  if (pretty)
    std::cout << drag::loss_summary_to_csv(summary);
  else
    std::cout << json << "\n";
  manifest.write();
  return 0;
}

int cmd_filter_features(const std::vector<std::string>& images,
                        const std::string& margins_path,
                        const std::string& out_path, ManifestWriter& manifest) {
  // Optional semantic columns keyed by image id (stem of the path).
  std::map<std::string, std::array<double, 3>> margins;
  if (!margins_path.empty()) {
    manifest.add_input(margins_path);
    for (const auto& line : read_lines(margins_path)) {
      ordered_json j = ordered_json::parse(line);
      margins[j.at("id").get<std::string>()] = {j.value("positive_sim", 0.0),
                                                j.value("negative_sim", 0.0),
                                                j.value("margin", 0.0)};
    }
  }
  std::ostringstream csv;
  csv << "id,width_px,height_px,aspect_ratio,colorfulness,mean_saturation,"
         "color_entropy,grayscale_ratio,edge_density,spatial_frequency,"
         "image_entropy,foreground_ratio,connected_components,"
         "positive_sim,negative_sim,margin\n";
  for (const auto& path : images) {
    manifest.add_input(path);
    drag::VisualFeatures f = drag::extract_visual_features(drag::read_ppm(path));
    std::string id = fs::path(path).stem().string();
    auto m = margins.count(id) ? margins[id] : std::array<double, 3>{0, 0, 0};
    csv << id << "," << f.width_px << "," << f.height_px << ","
        << f.aspect_ratio << "," << f.colorfulness << "," << f.mean_saturation
        << "," << f.color_entropy << "," << f.grayscale_ratio << ","
        << f.edge_density << "," << f.spatial_frequency << ","
        << f.image_entropy << "," << f.foreground_ratio << ","
        << f.connected_components << "," << m[0] << "," << m[1] << "," << m[2]
        << "\n";
  }
  drag::write_file_bytes(out_path, csv.str());
  manifest.add_output(out_path);
  manifest.write();
  return 0;
}

struct FeatureRow {
  std::string id;
  std::vector<double> features;  // 14 numeric columns
};

std::vector<FeatureRow> read_feature_csv(const std::string& path) {
  auto lines = read_lines(path);
  if (lines.empty())
    drag::throw_error(drag::ErrorKind::EmptyInput, "'" + path + "' is empty");
  std::vector<FeatureRow> rows;
  for (size_t i = 1; i < lines.size(); ++i) {
    std::istringstream ss(lines[i]);
    std::string cell;
    FeatureRow row;
    std::getline(ss, row.id, ',');
    while (std::getline(ss, cell, ',')) row.features.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

int cmd_filter_decide(const std::string& features_path, const std::string& labels_path,
                      const std::string& verdicts_path, double accept, double reject,
                      bool apply_coarse, const std::string& out_path,
                      ManifestWriter& manifest) {
  manifest.add_input(features_path);
  manifest.add_input(labels_path);
  auto rows = read_feature_csv(features_path);

  std::map<std::string, bool> labels;
  for (const auto& line : read_lines(labels_path)) {
    if (line.rfind("id,", 0) == 0) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    labels[line.substr(0, comma)] = line.substr(comma + 1) == "1" ||
                                    line.substr(comma + 1) == "keep";
  }
  std::vector<drag::LabeledExample> training;
  for (const auto& row : rows) {
    auto it = labels.find(row.id);
    if (it != labels.end()) training.push_back({row.features, it->second});
  }
  drag::LogisticModel model = drag::fit_logistic(training);

  std::map<std::string, std::string> verdicts;
  if (!verdicts_path.empty()) {
    manifest.add_input(verdicts_path);
    for (const auto& line : read_lines(verdicts_path)) {
      ordered_json j = ordered_json::parse(line, nullptr, false);
      if (!j.is_object() || !j.contains("id")) continue;
      if (j.contains("verdict"))
        verdicts[j["id"].get<std::string>()] =
            j["verdict"].is_string() ? j["verdict"].get<std::string>()
                                     : j["verdict"].dump();
    }
  }

  std::ostringstream out;
  for (const auto& row : rows) {
    double p = drag::predict_retention(model, row.features);
    std::optional<std::string> verdict;
    if (auto it = verdicts.find(row.id); it != verdicts.end()) verdict = it->second;
    drag::RetentionDecision d = drag::fuse_decision(p, accept, reject, verdict);

    std::vector<std::string> reasons{d.reason};
    if (apply_coarse && row.features.size() >= 12) {
      drag::VisualFeatures f;
      f.width_px = static_cast<int>(row.features[0]);
      f.height_px = static_cast<int>(row.features[1]);
      f.edge_density = row.features[7];
      f.image_entropy = row.features[9];
      f.foreground_ratio = row.features[10];
      auto coarse = drag::apply_coarse_rules(f, {});
      if (!coarse.keep) {
        d.keep = false;
        for (const auto& r : coarse.reasons) reasons.push_back(r);
      }
    }

    ordered_json j;
    j["id"] = row.id;
    j["p_keep"] = d.p_keep;
    j["group"] = to_string(d.group);
    j["final"] = d.keep ? "keep" : "drop";
    j["reasons"] = reasons;
    out << j.dump() << "\n";
  }
  drag::write_file_bytes(out_path, out.str());
  manifest.add_output(out_path);
  manifest.write();
  return 0;
}

int cmd_embed_hash(const std::string& in_path, size_t dim, int jobs,
                   const std::string& out_path, ManifestWriter& manifest) {
  manifest.add_input(in_path);
  auto lines = read_lines(in_path);
  auto vectors = parallel_map(lines, jobs, [&](const std::string& line) {
    auto [graph, id] = parse_any_record(line);
    drag::EmbeddingVector v = drag::embed_feature_hash(graph, dim);
    v.id = id;
    return v;
  });
  drag::write_embedding_file(vectors, out_path);
  manifest.add_output(out_path);
  manifest.write();
  return 0;
}

int cmd_embed_remote(const std::string& in_path, const std::string& kind,
                     const drag::RemoteEmbedConfig& config,
                     const std::string& out_path, ManifestWriter& manifest) {
  manifest.add_input(in_path);
  std::vector<drag::EmbeddingVector> vectors;
  for (const auto& line : read_lines(in_path)) {
    auto [graph, id] = parse_any_record(line);
    vectors.push_back(
        drag::remote_embed(config, id, kind, drag::serialize_graph_record(graph)));
  }
  drag::write_embedding_file(vectors, out_path);
  manifest.add_output(out_path);
  manifest.write();
  return 0;
}

drag::AlignDataset load_align_dataset(const std::string& sketches_path,
                                      const std::string& diagrams_path) {
  drag::AlignDataset dataset;
  for (auto& v : drag::read_embedding_file(diagrams_path))
    dataset.diagrams[v.id] = std::move(v.values);
  std::map<std::string, std::map<int, std::pair<std::string, std::vector<float>>>>
      staged;
  for (auto& v : drag::read_embedding_file(sketches_path)) {
    auto hash_pos = v.id.rfind('#');
    if (hash_pos == std::string::npos)
      drag::throw_error(drag::ErrorKind::SchemaViolation,
                        "sketch id '" + v.id + "' is not '<diagram>#<variant>'");
    std::string diagram = v.id.substr(0, hash_pos);
    std::string variant = v.id.substr(hash_pos + 1);
    int rank = 0;
    for (size_t i = 0; i < drag::kAllVariants.size(); ++i)
      if (variant == to_string(drag::kAllVariants[i])) rank = static_cast<int>(i);
    staged[diagram][rank] = {variant, std::move(v.values)};
  }
  for (auto& [diagram, by_rank] : staged)
    for (auto& [rank, entry] : by_rank)
      dataset.sketches[diagram].push_back(std::move(entry));
  return dataset;
}

int cmd_train(const std::string& sketches_path, const std::string& diagrams_path,
              const drag::TrainConfig& cfg, const std::string& out_path,
              const std::string& log_path, ManifestWriter& manifest) {
  manifest.add_input(sketches_path);
  manifest.add_input(diagrams_path);
  drag::AlignDataset dataset = load_align_dataset(sketches_path, diagrams_path);
  drag::TrainResult result = drag::train_projection(dataset, cfg);
  drag::save_head(result.head, out_path);
  manifest.add_output(out_path);
  if (!log_path.empty()) {
    drag::write_file_bytes(log_path, drag::train_log_to_jsonl(result.log));
    manifest.add_output(log_path);
  }
  double first = result.log.empty() ? 0 : result.log.front().loss;
  double last = result.log.empty() ? 0 : result.log.back().loss;
  std::cout << "{\"micro_batches\": " << result.log.size()
            << ", \"first_loss\": " << first << ", \"last_loss\": " << last
            << "}\n";
  manifest.write();
  return 0;
}

int cmd_index_build(const std::string& embeddings_path, const std::string& head_path,
                    const std::string& out_path, ManifestWriter& manifest) {
  manifest.add_input(embeddings_path);
  auto vectors = drag::read_embedding_file(embeddings_path);
  std::optional<drag::ProjectionHead> head;
  if (!head_path.empty()) {
    manifest.add_input(head_path);
    head = drag::load_head(head_path);
  }
  drag::RetrievalIndex index =
      drag::build_index(vectors, head ? &*head : nullptr);
  drag::save_index(index, out_path);
  manifest.add_output(out_path);
  manifest.write();
  std::cout << "{\"entries\": " << index.size() << ", \"dim\": " << index.dim
            << "}\n";
  return 0;
}

int cmd_index_query(const std::string& index_path, const std::string& query,
                    const std::string& head_path, size_t k,
                    const std::string& format, bool pretty) {
  drag::RetrievalIndex index = drag::load_index(index_path);
  std::optional<drag::ProjectionHead> head;
  if (!head_path.empty()) head = drag::load_head(head_path);

  std::vector<drag::EmbeddingVector> queries;
  if (fs::exists(query)) {
    queries = drag::read_embedding_file(query);
  } else {
    // Not a file: treat as an id already present in the index.
    bool found = false;
    for (const auto& entry : index.entries) {
      if (entry.id == query) {
        queries.push_back(entry);
        found = true;
        break;
      }
    }
    if (!found)
      drag::throw_error(drag::ErrorKind::MissingGroundTruth,
                        "'" + query + "' is neither a file nor an indexed id");
  }

  for (const auto& q : queries) {
    // An id-query against an index already has the head baked in.
    bool id_query = !fs::exists(query);
    drag::QueryResult result =
        drag::query_top_k(index, q, k, (!id_query && head) ? &*head : nullptr);
    if (pretty) {
      std::cout << result.query_id << "\n";
      for (const auto& hit : result.hits)
        std::cout << "  " << hit.id << "  " << hit.score << "\n";
    } else if (format == "tsv") {
      std::cout << drag::query_result_to_tsv(result);
    } else {
      std::cout << drag::query_result_to_json(result) << "\n";
    }
  }
  return 0;
}

int cmd_prompts_assemble(const std::string& sketch, std::vector<std::string> refs,
                         bool no_plan, bool no_style, size_t refs_topk,
                         const std::string& templates_dir, const std::string& model,
                         const drag::GenClientConfig& gen_config,
                         const std::string& out_path, ManifestWriter& manifest) {
  if (refs.size() > refs_topk) refs.resize(refs_topk);
  drag::PromptTemplates templates = drag::load_templates(templates_dir);
  drag::AgentFlags flags{!no_plan, !no_style};
  drag::PromptBundle bundle =
      drag::make_prompt_bundle(templates, sketch, refs, flags);
  drag::GenerationRequest request =
      drag::assemble_generation_request(bundle, model);
  std::string json = drag::generation_request_to_json(request);
  if (!out_path.empty()) {
    drag::write_file_bytes(out_path, json + "\n");
    manifest.add_output(out_path);
    manifest.write();
  }
  if (!gen_config.endpoint.empty()) {
    drag::GenerationResponse res = drag::submit_generation(gen_config, request);
    ordered_json r;
    r["request_id"] = res.request_id;
    r["artifact_ref"] = res.artifact_ref;
    r["status"] = res.status;
    std::cout << r.dump() << "\n";
    return 0;
  }
  std::cout << json << "\n";
  return 0;
}

int cmd_eval_retrieval(const std::string& rankings_path, const std::string& gt_path,
                       const std::string& out_path, bool pretty,
                       ManifestWriter& manifest) {
  manifest.add_input(rankings_path);
  manifest.add_input(gt_path);
  std::vector<std::pair<std::string, std::vector<std::string>>> rankings;
  for (const auto& line : read_lines(rankings_path)) {
    ordered_json j = ordered_json::parse(line);
    std::vector<std::string> ranking;
    for (const auto& id : j.at("ranking")) ranking.push_back(id.get<std::string>());
    rankings.emplace_back(j.at("query_id").get<std::string>(), std::move(ranking));
  }
  std::map<std::string, std::string> ground_truth;
  for (const auto& line : read_lines(gt_path)) {
    ordered_json j = ordered_json::parse(line);
    ground_truth[j.at("query_id").get<std::string>()] =
        j.at("diagram_id").get<std::string>();
  }
  drag::RetrievalEvalReport report =
      drag::compute_retrieval_metrics(rankings, ground_truth);
  std::string json = drag::retrieval_report_to_json(report);
  if (!out_path.empty()) {
    drag::write_file_bytes(out_path, json + "\n");
    manifest.add_output(out_path);
    manifest.write();
  }
  if (pretty) {
    std::cout << "queries     " << report.per_query_rank.size() << "\n"
              << "mrr         " << report.mrr << "\n"
              << "accuracy    " << report.accuracy << "\n"
              << "recall@1    " << report.recall_at_1 << "\n"
              << "recall@5    " << report.recall_at_5 << "\n"
              << "f1          " << report.f1 << "\n";
  } else {
    std::cout << json << "\n";
  }
  return 0;
}

int cmd_eval_judge(const std::string& verdicts_path, const std::string& out_path,
                   bool pretty, ManifestWriter& manifest) {
  manifest.add_input(verdicts_path);
  std::vector<drag::JudgeVerdict> verdicts;
  size_t line_no = 0;
  for (const auto& line : read_lines(verdicts_path)) {
    ++line_no;
    try {
      verdicts.push_back(drag::parse_judge_verdict(line));
    } catch (const drag::Error& e) {
      drag::throw_error(e.kind(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  drag::JudgeAggregate aggregate = drag::aggregate_judge_verdicts(verdicts);
  std::string json = drag::judge_aggregate_to_json(aggregate);
  if (!out_path.empty()) {
    drag::write_file_bytes(out_path, json + "\n");
    manifest.add_output(out_path);
    manifest.write();
  }
  if (pretty) {
    for (size_t i = 0; i < drag::kJudgeScoreKeys.size(); ++i)
      std::cout << drag::kJudgeScoreKeys[i] << "  " << aggregate.mean_scores[i]
                << "\n";
    std::cout << "judge overall  " << aggregate.judge_overall_mean << "\n"
              << "mean of eight  " << aggregate.mean_of_eight << "\n";
  } else {
    std::cout << json << "\n";
  }
  return 0;
}

// Synthetic desk-scale experiment: corpus -> variants -> embeddings ->
// trained head -> held-out-diagram retrieval, trained vs untrained.
int cmd_pipeline_e2e(size_t n, size_t dim, uint64_t seed, int epochs,
                     double peak_lr, const std::string& out_dir,
                     ManifestWriter& manifest) {
  fs::create_directories(out_dir);
  auto out_file = [&](const char* name) {
    return (fs::path(out_dir) / name).string();
  };

  auto corpus = drag::make_synthetic_corpus(n, seed);
  std::ostringstream kg_out;
  for (const auto& g : corpus) kg_out << drag::serialize_graph_record(g) << "\n";
  drag::write_file_bytes(out_file("kg.jsonl"), kg_out.str());

  drag::SeedSpec spec{seed, 0.05};
  std::vector<drag::VariantRecord> variants;
  std::ostringstream variants_out;
  for (const auto& g : corpus) {
    for (auto& record : drag::generate_variant_set(g, spec)) {
      variants_out << drag::serialize_variant_record(record) << "\n";
      variants.push_back(std::move(record));
    }
  }
  drag::write_file_bytes(out_file("variants.jsonl"), variants_out.str());

  std::vector<drag::EmbeddingVector> diagram_vecs, sketch_vecs;
  for (const auto& g : corpus)
    diagram_vecs.push_back(drag::embed_feature_hash(g, dim));
  for (const auto& r : variants) {
    drag::EmbeddingVector v = drag::embed_feature_hash(r.graph, dim);
    v.id = r.source_diagram_id + "#" + to_string(r.variant);
    sketch_vecs.push_back(std::move(v));
  }
  drag::write_embedding_file(diagram_vecs, out_file("diagrams.drix"));
  drag::write_embedding_file(sketch_vecs, out_file("sketches.drix"));

  // Held-out split: the head never sees queries for these diagrams.
  std::vector<std::string> ids;
  for (const auto& g : corpus) ids.push_back(g.diagram_id);
  std::sort(ids.begin(), ids.end());
  drag::SplitMix64 split_rng(drag::stable_seed(seed, "pipeline-e2e", "split"));
  for (size_t i = ids.size(); i > 1; --i)
    std::swap(ids[i - 1], ids[split_rng.next_below(i)]);
  size_t train_count = ids.size() * 4 / 5;
  std::set<std::string> train_ids(ids.begin(), ids.begin() + train_count);

  drag::AlignDataset dataset;
  for (const auto& v : diagram_vecs)
    if (train_ids.count(v.id)) dataset.diagrams[v.id] = v.values;
  for (const auto& r : variants) {
    if (!train_ids.count(r.source_diagram_id)) continue;
    for (const auto& v : sketch_vecs)
      if (v.id == r.source_diagram_id + "#" + to_string(r.variant))
        dataset.sketches[r.source_diagram_id].emplace_back(to_string(r.variant),
                                                           v.values);
  }

  drag::TrainConfig cfg;
  cfg.seed = seed;
  cfg.epochs = epochs;
  cfg.peak_lr = peak_lr;
  cfg.targets_per_micro_batch = std::min<int>(
      cfg.targets_per_micro_batch, static_cast<int>(dataset.diagrams.size()));
  drag::TrainResult trained = drag::train_projection(dataset, cfg);
  drag::save_head(trained.head, out_file("head.drph"));
  drag::write_file_bytes(out_file("train_log.jsonl"),
                         drag::train_log_to_jsonl(trained.log));

  // Rank every held-out variant against the full diagram index.
  auto evaluate = [&](const drag::ProjectionHead* head) {
    drag::RetrievalIndex index = drag::build_index(diagram_vecs, head);
    std::vector<std::pair<std::string, std::vector<std::string>>> rankings;
    std::map<std::string, std::string> ground_truth;
    for (const auto& v : sketch_vecs) {
      std::string diagram = v.id.substr(0, v.id.rfind('#'));
      if (train_ids.count(diagram)) continue;
      drag::QueryResult result = drag::query_top_k(index, v, index.size(), head);
      std::vector<std::string> ranking;
      for (const auto& hit : result.hits) ranking.push_back(hit.id);
      rankings.emplace_back(v.id, std::move(ranking));
      ground_truth[v.id] = diagram;
    }
    return drag::compute_retrieval_metrics(rankings, ground_truth);
  };
  drag::RetrievalEvalReport untrained_report = evaluate(nullptr);
  drag::RetrievalEvalReport trained_report = evaluate(&trained.head);

  ordered_json report;
  report["n"] = n;
  report["dim"] = dim;
  report["seed"] = seed;
  report["train_diagrams"] = train_ids.size();
  report["eval_diagrams"] = ids.size() - train_ids.size();
  report["eval_queries"] = untrained_report.per_query_rank.size();
  ordered_json u, t;
  u["recall_at_1"] = untrained_report.recall_at_1;
  u["recall_at_5"] = untrained_report.recall_at_5;
  u["mrr"] = untrained_report.mrr;
  t["recall_at_1"] = trained_report.recall_at_1;
  t["recall_at_5"] = trained_report.recall_at_5;
  t["mrr"] = trained_report.mrr;
  report["untrained"] = u;
  report["trained"] = t;
  report["improved"] =
      trained_report.recall_at_1 >= untrained_report.recall_at_1;
  drag::write_file_bytes(out_file("report.json"), report.dump(2) + "\n");
  std::cout << report.dump(2) << "\n";

  manifest.add_output(out_dir);
  manifest.write();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structure-aware sketch-to-diagram retrieval toolkit"};
  app.require_subcommand(1);
  app.set_config("--config");
  app.allow_config_extras(CLI::config_extras_mode::ignore_all);

  uint64_t seed = 42;
  int jobs = 1;
  bool pretty = false;
  app.add_option("--seed", seed, "global random seed")->capture_default_str();
  app.add_option("--jobs", jobs, "worker threads for per-record stages")
      ->capture_default_str();
  app.add_flag("--pretty", pretty, "human-readable tables instead of JSON");

  std::vector<std::string> argv_copy(argv, argv + argc);

  // kg
  auto* kg = app.add_subcommand("kg", "canonical topology-KG tools");
  std::string kg_in, kg_out;
  auto* kg_normalize = kg->add_subcommand("normalize", "clean records");
  kg_normalize->add_option("--in", kg_in)->required();
  kg_normalize->add_option("-o,--out", kg_out)->required();
  auto* kg_infer = kg->add_subcommand("infer-layout", "fill missing layout fields");
  kg_infer->add_option("--in", kg_in)->required();
  kg_infer->add_option("-o,--out", kg_out)->required();
  auto* kg_validate = kg->add_subcommand("validate", "report invariant violations");
  kg_validate->add_option("--in", kg_in)->required();

  // variants
  auto* variants = app.add_subcommand("variants", "sketch-variant synthesis");
  std::string var_in, var_out, var_dir;
  double rho = 0.05;
  int canvas = 1000;
  auto* var_generate = variants->add_subcommand("generate", "derive the five variants");
  var_generate->add_option("--in", var_in)->required();
  var_generate->add_option("-o,--out", var_out)->required();
  var_generate->add_option("--rho", rho, "jitter fraction")
      ->check(CLI::Range(0.0, 0.5))
      ->capture_default_str();
  auto* var_render = variants->add_subcommand("render", "render SVG sketches");
  var_render->add_option("--in", var_in)->required();
  var_render->add_option("--out-dir", var_dir)->required();
  var_render->add_option("--canvas", canvas)->capture_default_str();

  // loss
  auto* loss = app.add_subcommand("loss", "degradation statistics");
  std::string loss_in, loss_out, loss_csv;
  auto* loss_aggregate = loss->add_subcommand("aggregate", "mean loss per variant");
  loss_aggregate->add_option("--in", loss_in)->required();
  loss_aggregate->add_option("-o,--out", loss_out);
  loss_aggregate->add_option("--csv", loss_csv);

  // filter
  auto* filter = app.add_subcommand("filter", "diagram curation filtering");
  std::vector<std::string> filter_images;
  std::string filter_margins, filter_out, filter_features_path, filter_labels,
      filter_verdicts;
  double accept = 0.8, reject = 0.2;
  bool no_coarse = false;
  auto* filter_features = filter->add_subcommand("features", "visual feature CSV");
  filter_features->add_option("--images", filter_images, "PPM images")->required();
  filter_features->add_option("--margins", filter_margins,
                              "JSONL with id/positive_sim/negative_sim/margin");
  filter_features->add_option("-o,--out", filter_out)->required();
  auto* filter_decide = filter->add_subcommand("decide", "retention decisions");
  filter_decide->add_option("--features", filter_features_path)->required();
  filter_decide->add_option("--labels", filter_labels, "CSV id,keep for fitting")
      ->required();
  filter_decide->add_option("--verdicts", filter_verdicts,
                            "JSONL id/verdict for uncertain samples");
  filter_decide->add_option("--accept", accept)->capture_default_str();
  filter_decide->add_option("--reject", reject)->capture_default_str();
  filter_decide->add_flag("--no-coarse", no_coarse, "skip coarse visual rules");
  filter_decide->add_option("-o,--out", filter_out)->required();

  // embed
  auto* embed = app.add_subcommand("embed", "base embedding vectors");
  std::string embed_in, embed_out, embed_kind = "diagram";
  size_t dim = 256;
  drag::RemoteEmbedConfig remote_cfg;
  auto* embed_hash = embed->add_subcommand("hash", "deterministic feature-hash vectors");
  embed_hash->add_option("--in", embed_in)->required();
  embed_hash->add_option("--dim", dim)->capture_default_str();
  embed_hash->add_option("-o,--out", embed_out)->required();
  auto* embed_remote = embed->add_subcommand("remote", "provider-served vectors");
  embed_remote->add_option("--in", embed_in)->required();
  embed_remote->add_option("--kind", embed_kind, "sketch or diagram")
      ->capture_default_str();
  embed_remote->add_option("--embed-endpoint", remote_cfg.endpoint)
      ->envname("DRAG_EMBED_ENDPOINT")
      ->required();
  embed_remote->add_option("--embed-timeout-ms", remote_cfg.timeout_ms)
      ->capture_default_str();
  embed_remote->add_option("--embed-retries", remote_cfg.retries)
      ->capture_default_str();
  embed_remote->add_option("--api-key", remote_cfg.api_key)->envname("DRAG_API_KEY");
  embed_remote->add_option("-o,--out", embed_out)->required();

  // train
  auto* train = app.add_subcommand("train", "contrastive projection-head training");
  std::string train_sketches, train_diagrams, train_out, train_log;
  drag::TrainConfig train_cfg;
  train->add_option("--sketches", train_sketches)->required();
  train->add_option("--diagrams", train_diagrams)->required();
  train->add_option("-o,--out", train_out)->required();
  train->add_option("--log", train_log);
  train->add_option("--epochs", train_cfg.epochs)->capture_default_str();
  train->add_option("--peak-lr", train_cfg.peak_lr)->capture_default_str();
  train->add_option("--warmup", train_cfg.warmup_fraction)->capture_default_str();
  train->add_option("--tau", train_cfg.temperature)->capture_default_str();
  train->add_option("--accumulation", train_cfg.accumulation_steps)
      ->capture_default_str();
  train->add_option("--targets", train_cfg.targets_per_micro_batch)
      ->capture_default_str();
  train->add_option("--negatives", train_cfg.explicit_negatives)
      ->capture_default_str();
  bool no_in_batch = false;
  train->add_flag("--no-in-batch-negatives", no_in_batch);

  // index
  auto* index = app.add_subcommand("index", "offline retrieval index");
  std::string index_embeddings, index_head, index_out, index_path, index_query,
      index_format = "json";
  size_t top_k = 3;
  auto* index_build = index->add_subcommand("build", "build and persist an index");
  index_build->add_option("--embeddings", index_embeddings)->required();
  index_build->add_option("--head", index_head);
  index_build->add_option("-o,--out", index_out)->required();
  auto* index_query_cmd = index->add_subcommand("query", "exact cosine top-k");
  index_query_cmd->add_option("--idx", index_path)->required();
  index_query_cmd->add_option("--query", index_query, "embedding file or indexed id")
      ->required();
  index_query_cmd->add_option("--head", index_head);
  index_query_cmd->add_option("-k", top_k)->capture_default_str();
  index_query_cmd->add_option("--format", index_format, "json or tsv")
      ->capture_default_str();

  // prompts
  auto* prompts = app.add_subcommand("prompts", "generation prompt assembly");
  std::string sketch_ref, prompts_out, target_model = "nano-banana-pro";
  std::string templates_dir = default_template_dir();
  std::vector<std::string> reference_refs;
  bool no_plan = false, no_style = false;
  size_t refs_topk = 3;
  drag::GenClientConfig gen_cfg;
  auto* prompts_assemble = prompts->add_subcommand("assemble", "build one request");
  prompts_assemble->add_option("--sketch", sketch_ref)->required();
  prompts_assemble->add_option("--refs", reference_refs, "reference refs in rank order");
  prompts_assemble->add_flag("--no-plan-agent", no_plan);
  prompts_assemble->add_flag("--no-style-agent", no_style);
  prompts_assemble->add_option("--refs-topk", refs_topk)->capture_default_str();
  prompts_assemble->add_option("--templates", templates_dir)->capture_default_str();
  prompts_assemble->add_option("--model", target_model)->capture_default_str();
  prompts_assemble->add_option("--gen-endpoint", gen_cfg.endpoint,
                               "submit the request to this generation service")
      ->envname("DRAG_GEN_ENDPOINT");
  prompts_assemble->add_option("--gen-timeout-ms", gen_cfg.timeout_ms)
      ->capture_default_str();
  prompts_assemble->add_option("--api-key", gen_cfg.api_key)->envname("DRAG_API_KEY");
  prompts_assemble->add_option("-o,--out", prompts_out);

  // eval
  auto* eval = app.add_subcommand("eval", "retrieval metrics and judge parsing");
  std::string eval_rankings, eval_gt, eval_verdicts, eval_out;
  auto* eval_retrieval = eval->add_subcommand("retrieval", "MRR/recall/F1 report");
  eval_retrieval->add_option("--rankings", eval_rankings)->required();
  eval_retrieval->add_option("--gt", eval_gt)->required();
  eval_retrieval->add_option("-o,--out", eval_out);
  auto* eval_judge = eval->add_subcommand("judge", "aggregate judge verdicts");
  eval_judge->add_option("--verdicts", eval_verdicts)->required();
  eval_judge->add_option("-o,--out", eval_out);

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "composed experiments");
  size_t e2e_n = 100, e2e_dim = 256;
  int e2e_epochs = 50;
  double e2e_peak_lr = 1e-5;
  std::string e2e_out = "e2e-out";
  auto* pipeline_e2e = pipeline->add_subcommand(
      "e2e", "synthetic corpus -> variants -> training -> retrieval eval");
  pipeline_e2e->add_option("--n", e2e_n)->capture_default_str();
  pipeline_e2e->add_option("--dim", e2e_dim)->capture_default_str();
  pipeline_e2e->add_option("--epochs", e2e_epochs)->capture_default_str();
  pipeline_e2e->add_option("--peak-lr", e2e_peak_lr)->capture_default_str();
  pipeline_e2e->add_option("-o,--out", e2e_out)->capture_default_str();

  // Global flags may appear after the subcommand, per the documented usage.
  std::function<void(CLI::App*)> allow_fallthrough = [&](CLI::App* cmd) {
    cmd->fallthrough();
    for (CLI::App* sub : cmd->get_subcommands([](CLI::App*) { return true; }))
      allow_fallthrough(sub);
  };
  allow_fallthrough(&app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << "\n";
    return 1;
  }

  ManifestWriter manifest(argv_copy, seed);
  manifest.set_config("seed", seed);
  manifest.set_config("jobs", jobs);

  try {
    if (kg_normalize->parsed()) return cmd_kg("normalize", kg_in, kg_out, manifest);
    if (kg_infer->parsed()) return cmd_kg("infer-layout", kg_in, kg_out, manifest);
    if (kg_validate->parsed()) return cmd_kg_validate(kg_in);
    if (var_generate->parsed()) {
      manifest.set_config("rho", rho);
      return cmd_variants_generate(var_in, var_out, seed, rho, jobs, manifest);
    }
    if (var_render->parsed())
      return cmd_variants_render(var_in, var_dir, canvas, manifest);
    if (loss_aggregate->parsed())
      return cmd_loss_aggregate(loss_in, loss_out, loss_csv, pretty, manifest);
    if (filter_features->parsed())
      return cmd_filter_features(filter_images, filter_margins, filter_out,
                                 manifest);
    if (filter_decide->parsed()) {
      manifest.set_config("accept", accept);
      manifest.set_config("reject", reject);
      return cmd_filter_decide(filter_features_path, filter_labels,
                               filter_verdicts, accept, reject, !no_coarse,
                               filter_out, manifest);
    }
    if (embed_hash->parsed()) {
      manifest.set_config("dim", dim);
      return cmd_embed_hash(embed_in, dim, jobs, embed_out, manifest);
    }
    if (embed_remote->parsed())
      return cmd_embed_remote(embed_in, embed_kind, remote_cfg, embed_out,
                              manifest);
    if (train->parsed()) {
      train_cfg.seed = seed;
      train_cfg.in_batch_negatives = !no_in_batch;
      manifest.set_config("epochs", train_cfg.epochs);
      manifest.set_config("peak_lr", train_cfg.peak_lr);
      manifest.set_config("tau", train_cfg.temperature);
      return cmd_train(train_sketches, train_diagrams, train_cfg, train_out,
                       train_log, manifest);
    }
    if (index_build->parsed())
      return cmd_index_build(index_embeddings, index_head, index_out, manifest);
    if (index_query_cmd->parsed())
      return cmd_index_query(index_path, index_query, index_head, top_k,
                             index_format, pretty);
    if (prompts_assemble->parsed())
      return cmd_prompts_assemble(sketch_ref, reference_refs, no_plan, no_style,
                                  refs_topk, templates_dir, target_model,
                                  gen_cfg, prompts_out, manifest);
    if (eval_retrieval->parsed())
      return cmd_eval_retrieval(eval_rankings, eval_gt, eval_out, pretty,
                                manifest);
    if (eval_judge->parsed())
      return cmd_eval_judge(eval_verdicts, eval_out, pretty, manifest);
    if (pipeline_e2e->parsed()) {
      manifest.set_config("n", e2e_n);
      manifest.set_config("dim", e2e_dim);
      manifest.set_config("epochs", e2e_epochs);
      return cmd_pipeline_e2e(e2e_n, e2e_dim, seed, e2e_epochs, e2e_peak_lr,
                              e2e_out, manifest);
    }
    std::cerr << "error: no subcommand\n\n" << app.help() << "\n";
    return 1;
  } catch (const drag::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
