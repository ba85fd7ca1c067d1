// Python bindings for the main operations. Graphs travel as JSONL record
// strings; vectors as lists/arrays of floats.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

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

namespace py = pybind11;
using namespace drag;

namespace {

TopologyGraph graph_of(const std::string& record_json) {
  return parse_graph_record(record_json);
}

std::vector<float> to_floats(const std::vector<double>& v) {
  return std::vector<float>(v.begin(), v.end());
}

py::dict loss_dict(const LossRecord& loss) {
  py::dict d;
  d["node_loss"] = loss.node_loss;
  d["edge_loss"] = loss.edge_loss;
  d["text_loss"] = loss.text_loss;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "structure-aware sketch-to-diagram retrieval core";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("normalize_record", [](const std::string& record) {
    return serialize_graph_record(normalize_graph(graph_of(record)));
  }, py::arg("record"), "Clean one KG record; returns the canonical JSON line.");

  m.def("infer_layout", [](const std::string& record) {
    TopologyGraph g = normalize_graph(graph_of(record));
    g.layout = infer_layout_fields(g);
    return serialize_graph_record(g);
  }, py::arg("record"));

  m.def("validate_record", [](const std::string& record) {
    std::vector<std::string> out;
    for (const auto& v : validate_graph(graph_of(record)).violations)
      out.push_back(v.where + ": " + v.message);
    return out;
  }, py::arg("record"));

  m.def("stable_seed", &stable_seed, py::arg("global_seed"), py::arg("diagram_id"),
        py::arg("variant_name"));

  m.def("generate_variants", [](const std::string& record, uint64_t seed, double rho) {
    TopologyGraph g = normalize_graph(graph_of(record));
    std::vector<std::string> lines;
    for (const auto& r : generate_variant_set(g, {seed, rho}))
      lines.push_back(serialize_variant_record(r));
    return lines;
  }, py::arg("record"), py::arg("seed") = 0, py::arg("rho") = 0.05,
     "Five variant records as JSON lines, fixed order.");

  m.def("variant_loss", [](const std::string& original, const std::string& variant) {
    return loss_dict(compute_variant_loss(graph_of(original), graph_of(variant)));
  }, py::arg("original"), py::arg("variant"));

  m.def("render_svg", [](const std::string& record, int canvas_px) {
    return render_sketch_svg(normalize_graph(graph_of(record)), canvas_px);
  }, py::arg("record"), py::arg("canvas_px") = 1000);

  m.def("feature_hash_embedding", [](const std::string& record, size_t dim) {
    return embed_feature_hash(normalize_graph(graph_of(record)), dim).values;
  }, py::arg("record"), py::arg("dim") = 256);

  m.def("cosine_similarity", [](const std::vector<double>& u, const std::vector<double>& v) {
    return cosine_similarity(u, v);
  }, py::arg("u"), py::arg("v"));

  m.def("learning_rate_at", [](long step, long total_steps, double peak_lr,
                               double warmup_fraction) {
    TrainConfig cfg;
    cfg.peak_lr = peak_lr;
    cfg.warmup_fraction = warmup_fraction;
    return learning_rate_at(step, total_steps, cfg);
  }, py::arg("step"), py::arg("total_steps"), py::arg("peak_lr") = 1e-5,
     py::arg("warmup_fraction") = 0.05);

  m.def("info_nce_loss", [](const std::vector<double>& sketch,
                            const std::vector<double>& positive,
                            const std::vector<std::vector<double>>& negatives,
                            double tau) {
    TripletBatch batch;
    batch.diagrams["positive"] = to_floats(positive);
    TripletQuery q;
    q.sketch = to_floats(sketch);
    q.positive_id = "positive";
    for (size_t i = 0; i < negatives.size(); ++i) {
      std::string id = "negative" + std::to_string(i);
      batch.diagrams[id] = to_floats(negatives[i]);
      q.negative_ids.push_back(id);
    }
    batch.queries.push_back(std::move(q));
    ProjectionHead head = ProjectionHead::identity(sketch.size());
    return info_nce_loss_and_grad(batch, head, tau, false).loss;
  }, py::arg("sketch"), py::arg("positive"), py::arg("negatives"),
     py::arg("tau") = 0.05,
     "Contrastive loss of one query under the identity head.");

  py::class_<RetrievalIndex>(m, "Index")
      .def_static("build", [](const std::vector<std::string>& ids,
                              const std::vector<std::vector<double>>& vectors) {
        if (ids.size() != vectors.size())
          throw_error(ErrorKind::DimMismatch, "ids and vectors differ in length");
        std::vector<EmbeddingVector> entries;
        for (size_t i = 0; i < ids.size(); ++i)
          entries.push_back({ids[i], to_floats(vectors[i])});
        return build_index(entries);
      }, py::arg("ids"), py::arg("vectors"))
      .def_static("load", &load_index, py::arg("path"))
      .def("save", [](const RetrievalIndex& index, const std::string& path) {
        return save_index(index, path);
      }, py::arg("path"))
      .def("__len__", [](const RetrievalIndex& index) { return index.size(); })
      .def("query", [](const RetrievalIndex& index, const std::vector<double>& vector,
                       size_t k) {
        EmbeddingVector q{"query", to_floats(vector)};
        std::vector<std::pair<std::string, double>> out;
        for (const auto& hit : query_top_k(index, q, k).hits)
          out.emplace_back(hit.id, hit.score);
        return out;
      }, py::arg("vector"), py::arg("k") = 3);

  m.def("retrieval_metrics", [](const std::vector<std::pair<std::string,
                                                            std::vector<std::string>>>& rankings,
                                const std::map<std::string, std::string>& ground_truth) {
    RetrievalEvalReport r = compute_retrieval_metrics(rankings, ground_truth);
    py::dict d;
    d["mrr"] = r.mrr;
    d["accuracy"] = r.accuracy;
    d["recall_at_1"] = r.recall_at_1;
    d["recall_at_5"] = r.recall_at_5;
    d["f1"] = r.f1;
    return d;
  }, py::arg("rankings"), py::arg("ground_truth"));

  m.def("parse_judge_verdict", [](const std::string& text) {
    JudgeVerdict v = parse_judge_verdict(text);
    py::dict scores;
    for (size_t i = 0; i < kJudgeScoreKeys.size(); ++i)
      scores[kJudgeScoreKeys[i]] = v.scores[i];
    py::dict d;
    d["scores"] = scores;
    d["overall"] = v.overall;
    d["strengths"] = v.strengths;
    d["weaknesses"] = v.weaknesses;
    d["most_important_fix"] = v.most_important_fix;
    return d;
  }, py::arg("text"));

  m.def("parse_filter_verdict", [](const std::string& text) {
    FilterVerdict v = parse_filter_verdict(text);
    py::dict d;
    d["decision"] = v.decision;
    d["label"] = v.label;
    d["confidence"] = v.confidence;
    d["reason"] = v.reason;
    return d;
  }, py::arg("text"));

  m.def("extract_visual_features", [](py::array_t<uint8_t, py::array::c_style |
                                                               py::array::forcecast> image) {
    auto buf = image.request();
    if (buf.ndim != 3 || buf.shape[2] != 3)
      throw_error(ErrorKind::EmptyImage, "expected an HxWx3 uint8 array");
    ImageBuffer img;
    img.height = static_cast<int>(buf.shape[0]);
    img.width = static_cast<int>(buf.shape[1]);
    const auto* data = static_cast<const uint8_t*>(buf.ptr);
    img.rgb.assign(data, data + img.pixel_count() * 3);
    VisualFeatures f = extract_visual_features(img);
    py::dict d;
    d["width_px"] = f.width_px;
    d["height_px"] = f.height_px;
    d["aspect_ratio"] = f.aspect_ratio;
    d["colorfulness"] = f.colorfulness;
    d["mean_saturation"] = f.mean_saturation;
    d["color_entropy"] = f.color_entropy;
    d["grayscale_ratio"] = f.grayscale_ratio;
    d["edge_density"] = f.edge_density;
    d["spatial_frequency"] = f.spatial_frequency;
    d["image_entropy"] = f.image_entropy;
    d["foreground_ratio"] = f.foreground_ratio;
    d["connected_components"] = f.connected_components;
    return d;
  }, py::arg("image"));

  m.def("clip_margin", [](const std::vector<double>& image_embedding,
                          const std::vector<std::vector<double>>& positives,
                          const std::vector<std::vector<double>>& negatives) {
    ClipMarginInput input;
    input.image_embedding = to_floats(image_embedding);
    for (const auto& p : positives) input.positive_prototypes.push_back(to_floats(p));
    for (const auto& n : negatives) input.negative_prototypes.push_back(to_floats(n));
    return clip_margin(input);
  }, py::arg("image_embedding"), py::arg("positives"), py::arg("negatives"));

  m.def("build_generation_request", [](const std::string& template_dir,
                                       const std::string& sketch_ref,
                                       const std::vector<std::string>& references,
                                       bool planning, bool guidance,
                                       const std::string& model) {
    PromptTemplates t = load_templates(template_dir);
    PromptBundle bundle =
        make_prompt_bundle(t, sketch_ref, references, {planning, guidance});
    GenerationRequest r = assemble_generation_request(bundle, model);
    py::dict d;
    d["request_id"] = r.request_id;
    d["model"] = r.target_model;
    d["system"] = r.system_text;
    d["user"] = r.user_text;
    d["attachments"] = r.attachments;
    return d;
  }, py::arg("template_dir"), py::arg("sketch_ref"), py::arg("references"),
     py::arg("planning") = true, py::arg("guidance") = true,
     py::arg("model") = "nano-banana-pro");

  m.def("synthetic_corpus", [](size_t count, uint64_t seed) {
    std::vector<std::string> lines;
    for (const auto& g : make_synthetic_corpus(count, seed))
      lines.push_back(serialize_graph_record(g));
    return lines;
  }, py::arg("count"), py::arg("seed") = 0);
}
