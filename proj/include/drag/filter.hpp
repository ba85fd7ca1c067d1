#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace drag {

// Interleaved 8-bit RGB raster, row-major.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> rgb;  // width * height * 3 bytes

  size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

// Binary PPM (P6, maxval 255); enough raster input for desk-scale filtering.
ImageBuffer read_ppm(const std::string& path);
void write_ppm(const ImageBuffer& image, const std::string& path);

struct VisualFeatures {
  int width_px = 0;
  int height_px = 0;
  double aspect_ratio = 0;
  double colorfulness = 0;      // Hasler-Suesstrunk, 0..255 channel scale
  double mean_saturation = 0;   // mean HSV S in [0,1]
  double color_entropy = 0;     // bits over an 8x8x8 RGB histogram
  double grayscale_ratio = 0;   // fraction with max-min channel <= 8
  double edge_density = 0;      // Sobel magnitude > 0.1 * max, replicate border
  double spatial_frequency = 0; // row/col difference RMS on gray in [0,1]
  double image_entropy = 0;     // bits over a 256-bin gray histogram
  double foreground_ratio = 0;  // below-Otsu fraction (dark on light)
  int connected_components = 0; // 4-connected count on the foreground mask
};

// Deterministic; throws Error{EmptyImage} on a zero-sized buffer.
VisualFeatures extract_visual_features(const ImageBuffer& image);

struct CoarseRules {
  double min_edge_density = 0.005;
  double min_image_entropy = 0.5;
  double min_foreground_ratio = 0.002;
  double max_foreground_ratio = 0.98;
  int min_side_px = 128;
};

struct CoarseDecision {
  bool keep = true;
  std::vector<std::string> reasons;  // every violated rule
};

CoarseDecision apply_coarse_rules(const VisualFeatures& f, const CoarseRules& rules);

struct ClipMarginInput {
  std::vector<float> image_embedding;
  std::vector<std::vector<float>> positive_prototypes;
  std::vector<std::vector<float>> negative_prototypes;
};

// Mean cosine to the positive prototypes minus mean cosine to the negative
// prototypes; in [-2, 2].
double clip_margin(const ClipMarginInput& input);

// Logistic-regression stand-in behind the retention-classifier interface:
// feature standardization + fixed-iteration gradient descent on log-loss.
struct LogisticModel {
  std::vector<double> means;
  std::vector<double> stds;
  std::vector<double> weights;
  double bias = 0;
};

struct LabeledExample {
  std::vector<double> features;
  bool keep = false;
};

LogisticModel fit_logistic(const std::vector<LabeledExample>& examples,
                           uint64_t seed = 0, int iterations = 500,
                           double learning_rate = 0.5);
double predict_retention(const LogisticModel& model, const std::vector<double>& features);

enum class RetentionGroup { Accepted, Rejected, Uncertain };

const char* to_string(RetentionGroup g);

// accepted iff p >= accept_threshold; rejected iff p <= reject_threshold.
RetentionGroup stratify_decision(double p_keep, double accept_threshold,
                                 double reject_threshold);

struct FilterVerdict {
  std::string decision;  // "keep" | "drop"
  std::string label;     // drop => "other"; keep => one of the five diagram labels
  double confidence = 0;
  std::string reason;
};

// Parses exactly one JSON object and enforces the verdict schema rules.
FilterVerdict parse_filter_verdict(const std::string& text);

struct RetentionDecision {
  double p_keep = 0;
  RetentionGroup group = RetentionGroup::Uncertain;
  bool keep = false;  // final
  std::string reason;
};

// Decision fusion: high-confidence groups decide directly; uncertain samples
// follow the verifier verdict, and any unusable verdict means drop.
RetentionDecision fuse_decision(double p_keep, double accept_threshold,
                                double reject_threshold,
                                const std::optional<std::string>& verdict_text);

}  // namespace drag
