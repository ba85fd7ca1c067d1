#include "drag/filter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "drag/binio.hpp"
#include "drag/errors.hpp"
#include "drag/train.hpp"
#include "json.hpp"

namespace drag {

// ---------------------------------------------------------------------------
// PPM io

ImageBuffer read_ppm(const std::string& path) {
  std::string bytes = read_file_bytes(path);
  std::istringstream in(bytes);
  std::string magic;
  in >> magic;
  if (magic != "P6")
    throw_error(ErrorKind::BadMagic, "'" + path + "' is not a binary PPM (P6)");
  auto next_int = [&]() {
    // Skip whitespace and '#' comment lines.
    while (true) {
      int c = in.peek();
      if (c == '#') {
        std::string line;
        std::getline(in, line);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
    long v = -1;
    in >> v;
    if (!in || v < 0)
      throw_error(ErrorKind::MalformedJson, "bad PPM header in '" + path + "'");
    return v;
  };
  ImageBuffer img;
  img.width = static_cast<int>(next_int());
  img.height = static_cast<int>(next_int());
  long maxval = next_int();
  if (maxval != 255)
    throw_error(ErrorKind::UnsupportedVersion, "PPM maxval must be 255");
  in.get();  // single whitespace after header
  size_t need = img.pixel_count() * 3;
  size_t offset = static_cast<size_t>(in.tellg());
  if (bytes.size() < offset + need)
    throw_error(ErrorKind::TruncatedFile,
                "'" + path + "' truncated at byte " + std::to_string(bytes.size()));
  img.rgb.assign(bytes.begin() + offset, bytes.begin() + offset + need);
  return img;
}

void write_ppm(const ImageBuffer& image, const std::string& path) {
  std::ostringstream out;
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.rgb.data()),
            static_cast<std::streamsize>(image.rgb.size()));
  write_file_bytes(path, out.str());
}

// ---------------------------------------------------------------------------
// Visual features

namespace {

double shannon_entropy(const std::vector<size_t>& histogram, size_t total) {
  double h = 0;
  for (size_t count : histogram) {
    if (count == 0) continue;
    double p = static_cast<double>(count) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

// Otsu threshold over a 256-bin histogram; smallest argmax on ties.
int otsu_threshold(const std::vector<size_t>& hist, size_t total) {
  double sum = 0;
  for (int i = 0; i < 256; ++i) sum += static_cast<double>(i) * hist[i];
  double sum_b = 0, w_b = 0;
  double best_var = -1;
  int best_t = 0;
  for (int t = 0; t < 256; ++t) {
    w_b += static_cast<double>(hist[t]);
    if (w_b == 0) continue;
    double w_f = static_cast<double>(total) - w_b;
    if (w_f == 0) break;
    sum_b += static_cast<double>(t) * hist[t];
    double m_b = sum_b / w_b;
    double m_f = (sum - sum_b) / w_f;
    double between = w_b * w_f * (m_b - m_f) * (m_b - m_f);
    if (between > best_var) {
      best_var = between;
      best_t = t;
    }
  }
  return best_t;
}

}  // namespace

VisualFeatures extract_visual_features(const ImageBuffer& image) {
  const int w = image.width, h = image.height;
  if (w < 1 || h < 1 || image.rgb.size() < static_cast<size_t>(w) * h * 3)
    throw_error(ErrorKind::EmptyImage, "image has no pixels");
  const size_t n = image.pixel_count();

  VisualFeatures f;
  f.width_px = w;
  f.height_px = h;
  f.aspect_ratio = static_cast<double>(w) / static_cast<double>(h);

  std::vector<double> gray(n);           // luma in [0,1]
  std::vector<uint8_t> gray_bin(n);      // 256-bin index
  std::vector<size_t> gray_hist(256, 0);
  std::vector<size_t> rgb_hist(512, 0);  // 8x8x8

  double sum_rg = 0, sum_yb = 0, sum_rg2 = 0, sum_yb2 = 0;
  double sum_sat = 0;
  size_t grayscale_pixels = 0;

  for (size_t i = 0; i < n; ++i) {
    double r = image.rgb[3 * i];
    double g = image.rgb[3 * i + 1];
    double b = image.rgb[3 * i + 2];

    double rg = r - g;
    double yb = (r + g) / 2.0 - b;
    sum_rg += rg;
    sum_yb += yb;
    sum_rg2 += rg * rg;
    sum_yb2 += yb * yb;

    double mx = std::max({r, g, b});
    double mn = std::min({r, g, b});
    sum_sat += mx > 0 ? (mx - mn) / mx : 0.0;
    if (mx - mn <= 8.0) ++grayscale_pixels;

    double luma = 0.299 * r + 0.587 * g + 0.114 * b;
    int bin = static_cast<int>(std::lround(luma));
    bin = std::clamp(bin, 0, 255);
    gray[i] = luma / 255.0;
    gray_bin[i] = static_cast<uint8_t>(bin);
    ++gray_hist[bin];
    ++rgb_hist[(static_cast<size_t>(image.rgb[3 * i]) >> 5) * 64 +
               (static_cast<size_t>(image.rgb[3 * i + 1]) >> 5) * 8 +
               (static_cast<size_t>(image.rgb[3 * i + 2]) >> 5)];
  }

  double inv_n = 1.0 / static_cast<double>(n);
  double mean_rg = sum_rg * inv_n, mean_yb = sum_yb * inv_n;
  double var_rg = sum_rg2 * inv_n - mean_rg * mean_rg;
  double var_yb = sum_yb2 * inv_n - mean_yb * mean_yb;
  var_rg = std::max(0.0, var_rg);
  var_yb = std::max(0.0, var_yb);
  f.colorfulness = std::sqrt(var_rg + var_yb) +
                   0.3 * std::sqrt(mean_rg * mean_rg + mean_yb * mean_yb);
  f.mean_saturation = sum_sat * inv_n;
  f.color_entropy = shannon_entropy(rgb_hist, n);
  f.grayscale_ratio = static_cast<double>(grayscale_pixels) * inv_n;
  f.image_entropy = shannon_entropy(gray_hist, n);

  // Sobel magnitude with replicate borders.
  auto at = [&](int y, int x) {
    y = std::clamp(y, 0, h - 1);
    x = std::clamp(x, 0, w - 1);
    return gray[static_cast<size_t>(y) * w + x];
  };
  std::vector<double> magnitude(n);
  double max_magnitude = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double gx = -at(y - 1, x - 1) + at(y - 1, x + 1) - 2 * at(y, x - 1) +
                  2 * at(y, x + 1) - at(y + 1, x - 1) + at(y + 1, x + 1);
      double gy = -at(y - 1, x - 1) - 2 * at(y - 1, x) - at(y - 1, x + 1) +
                  at(y + 1, x - 1) + 2 * at(y + 1, x) + at(y + 1, x + 1);
      double m = std::sqrt(gx * gx + gy * gy);
      magnitude[static_cast<size_t>(y) * w + x] = m;
      max_magnitude = std::max(max_magnitude, m);
    }
  }
  if (max_magnitude > 0) {
    size_t strong = 0;
    for (double m : magnitude)
      if (m > 0.1 * max_magnitude) ++strong;
    f.edge_density = static_cast<double>(strong) * inv_n;
  }

  // RMS of horizontal and vertical first differences.
  double row_sq = 0, col_sq = 0;
  size_t row_terms = 0, col_terms = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 1; x < w; ++x) {
      double d = at(y, x) - at(y, x - 1);
      row_sq += d * d;
      ++row_terms;
    }
  for (int y = 1; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double d = at(y, x) - at(y - 1, x);
      col_sq += d * d;
      ++col_terms;
    }
  double row_rms = row_terms ? row_sq / static_cast<double>(row_terms) : 0;
  double col_rms = col_terms ? col_sq / static_cast<double>(col_terms) : 0;
  f.spatial_frequency = std::sqrt(row_rms + col_rms);

  // Otsu foreground (dark on light); uniform images have no foreground.
  bool uniform = false;
  for (size_t count : gray_hist)
    if (count == n) uniform = true;
  if (!uniform) {
    int threshold = otsu_threshold(gray_hist, n);
    std::vector<uint8_t> mask(n);
    size_t foreground = 0;
    for (size_t i = 0; i < n; ++i) {
      mask[i] = gray_bin[i] <= threshold ? 1 : 0;
      foreground += mask[i];
    }
    f.foreground_ratio = static_cast<double>(foreground) * inv_n;

    // 4-connected component count via iterative flood fill.
    int components = 0;
    std::vector<size_t> stack;
    for (size_t start = 0; start < n; ++start) {
      if (mask[start] != 1) continue;
      ++components;
      mask[start] = 2;
      stack.push_back(start);
      while (!stack.empty()) {
        size_t p = stack.back();
        stack.pop_back();
        int y = static_cast<int>(p / w), x = static_cast<int>(p % w);
        const int dy[4] = {-1, 1, 0, 0};
        const int dx[4] = {0, 0, -1, 1};
        for (int d = 0; d < 4; ++d) {
          int ny = y + dy[d], nx = x + dx[d];
          if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
          size_t q = static_cast<size_t>(ny) * w + nx;
          if (mask[q] == 1) {
            mask[q] = 2;
            stack.push_back(q);
          }
        }
      }
    }
    f.connected_components = components;
  }
  return f;
}

// ---------------------------------------------------------------------------
// Coarse rules

CoarseDecision apply_coarse_rules(const VisualFeatures& f, const CoarseRules& rules) {
  CoarseDecision d;
  auto violate = [&](const std::string& reason) {
    d.keep = false;
    d.reasons.push_back(reason);
  };
  if (f.edge_density < rules.min_edge_density)
    violate("edge_density " + std::to_string(f.edge_density) + " < min " +
            std::to_string(rules.min_edge_density));
  if (f.image_entropy < rules.min_image_entropy)
    violate("image_entropy " + std::to_string(f.image_entropy) + " < min " +
            std::to_string(rules.min_image_entropy));
  if (f.foreground_ratio < rules.min_foreground_ratio ||
      f.foreground_ratio > rules.max_foreground_ratio)
    violate("foreground_ratio " + std::to_string(f.foreground_ratio) +
            " outside [" + std::to_string(rules.min_foreground_ratio) + ", " +
            std::to_string(rules.max_foreground_ratio) + "]");
  if (std::min(f.width_px, f.height_px) < rules.min_side_px)
    violate("min side " + std::to_string(std::min(f.width_px, f.height_px)) +
            " px < " + std::to_string(rules.min_side_px));
  return d;
}

// ---------------------------------------------------------------------------
// Semantic margin

double clip_margin(const ClipMarginInput& input) {
  if (input.positive_prototypes.empty() || input.negative_prototypes.empty())
    throw_error(ErrorKind::PreconditionViolated, "prototype lists must be non-empty");
  auto mean_cos = [&](const std::vector<std::vector<float>>& prototypes) {
    double sum = 0;
    for (const auto& p : prototypes)
      sum += cosine_similarity(input.image_embedding, p);
    return sum / static_cast<double>(prototypes.size());
  };
  return mean_cos(input.positive_prototypes) - mean_cos(input.negative_prototypes);
}

// ---------------------------------------------------------------------------
// Logistic retention model

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double dot_product(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> standardize(const LogisticModel& model,
                                const std::vector<double>& x) {
  std::vector<double> z(x.size());
  for (size_t i = 0; i < x.size(); ++i)
    z[i] = (x[i] - model.means[i]) / model.stds[i];
  return z;
}

}  // namespace

LogisticModel fit_logistic(const std::vector<LabeledExample>& examples,
                           uint64_t /*seed*/, int iterations,
                           double learning_rate) {
  if (examples.size() < 2)
    throw_error(ErrorKind::PreconditionViolated, "need at least two examples");
  bool any_keep = false, any_drop = false;
  for (const auto& e : examples) (e.keep ? any_keep : any_drop) = true;
  if (!any_keep || !any_drop)
    throw_error(ErrorKind::DegenerateLabels, "both labels must be present");
  const size_t dim = examples.front().features.size();
  for (const auto& e : examples)
    if (e.features.size() != dim)
      throw_error(ErrorKind::DimMismatch, "inconsistent feature dims");

  LogisticModel model;
  model.means.assign(dim, 0.0);
  model.stds.assign(dim, 0.0);
  const double inv_n = 1.0 / static_cast<double>(examples.size());
  for (const auto& e : examples)
    for (size_t i = 0; i < dim; ++i) model.means[i] += e.features[i];
  for (auto& m : model.means) m *= inv_n;
  for (const auto& e : examples)
    for (size_t i = 0; i < dim; ++i) {
      double d = e.features[i] - model.means[i];
      model.stds[i] += d * d;
    }
  for (auto& s : model.stds) {
    s = std::sqrt(s * inv_n);
    if (s == 0) s = 1.0;  // constant feature carries no signal
  }

  std::vector<std::vector<double>> z;
  z.reserve(examples.size());
  for (const auto& e : examples) z.push_back(standardize(model, e.features));

  model.weights.assign(dim, 0.0);
  model.bias = 0;
  for (int iter = 0; iter < iterations; ++iter) {
    std::vector<double> grad(dim, 0.0);
    double grad_bias = 0;
    for (size_t k = 0; k < examples.size(); ++k) {
      double p = sigmoid(dot_product(model.weights, z[k]) + model.bias);
      double err = p - (examples[k].keep ? 1.0 : 0.0);
      for (size_t i = 0; i < dim; ++i) grad[i] += err * z[k][i];
      grad_bias += err;
    }
    for (size_t i = 0; i < dim; ++i)
      model.weights[i] -= learning_rate * grad[i] * inv_n;
    model.bias -= learning_rate * grad_bias * inv_n;
  }
  return model;
}

double predict_retention(const LogisticModel& model,
                         const std::vector<double>& features) {
  if (features.size() != model.weights.size())
    throw_error(ErrorKind::DimMismatch,
                "feature dim " + std::to_string(features.size()) + " vs model " +
                    std::to_string(model.weights.size()));
  auto z = standardize(model, features);
  return sigmoid(dot_product(model.weights, z) + model.bias);
}

// ---------------------------------------------------------------------------
// Stratification and fusion

const char* to_string(RetentionGroup g) {
  switch (g) {
    case RetentionGroup::Accepted: return "accepted";
    case RetentionGroup::Rejected: return "rejected";
    case RetentionGroup::Uncertain: return "uncertain";
  }
  return "uncertain";
}

RetentionGroup stratify_decision(double p_keep, double accept_threshold,
                                 double reject_threshold) {
  if (!(reject_threshold >= 0 && reject_threshold < accept_threshold &&
        accept_threshold <= 1))
    throw_error(ErrorKind::InvalidThresholds,
                "need 0 <= reject < accept <= 1");
  if (p_keep >= accept_threshold) return RetentionGroup::Accepted;
  if (p_keep <= reject_threshold) return RetentionGroup::Rejected;
  return RetentionGroup::Uncertain;
}

FilterVerdict parse_filter_verdict(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw_error(ErrorKind::MalformedJson,
                "verdict JSON syntax error at byte " + std::to_string(e.byte));
  }
  if (!j.is_object())
    throw_error(ErrorKind::SchemaViolation, "$: verdict must be an object");

  FilterVerdict v;
  auto require_string = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string())
      throw_error(ErrorKind::SchemaViolation,
                  std::string("$.") + key + ": missing or not a string");
    return it->get<std::string>();
  };
  v.decision = require_string("decision");
  v.label = require_string("label");
  if (v.decision != "keep" && v.decision != "drop")
    throw_error(ErrorKind::SchemaViolation, "$.decision: must be keep or drop");
  if (v.decision == "drop" && v.label != "other")
    throw_error(ErrorKind::SchemaViolation,
                "$.label: must be 'other' when decision is drop");
  if (v.decision == "keep") {
    static const char* allowed[] = {"architecture", "pipeline", "workflow",
                                    "flowchart", "overview"};
    bool ok = false;
    for (const char* a : allowed)
      if (v.label == a) ok = true;
    if (!ok)
      throw_error(ErrorKind::SchemaViolation,
                  "$.label: '" + v.label + "' not allowed for keep");
  }
  auto conf = j.find("confidence");
  if (conf == j.end() || !conf->is_number())
    throw_error(ErrorKind::SchemaViolation, "$.confidence: missing or not a number");
  v.confidence = conf->get<double>();
  if (v.confidence < 0 || v.confidence > 1)
    throw_error(ErrorKind::SchemaViolation, "$.confidence: outside [0,1]");
  if (auto it = j.find("reason"); it != j.end() && it->is_string())
    v.reason = it->get<std::string>();
  return v;
}

RetentionDecision fuse_decision(double p_keep, double accept_threshold,
                                double reject_threshold,
                                const std::optional<std::string>& verdict_text) {
  RetentionDecision d;
  d.p_keep = p_keep;
  d.group = stratify_decision(p_keep, accept_threshold, reject_threshold);
  switch (d.group) {
    case RetentionGroup::Accepted:
      d.keep = true;
      d.reason = "high-confidence accept";
      return d;
    case RetentionGroup::Rejected:
      d.keep = false;
      d.reason = "high-confidence reject";
      return d;
    case RetentionGroup::Uncertain:
      break;
  }
  if (!verdict_text) {
    d.keep = false;
    d.reason = "uncertain and no verifier verdict";
    return d;
  }
  try {
    FilterVerdict v = parse_filter_verdict(*verdict_text);
    d.keep = v.decision == "keep";
    d.reason = "verifier: " + v.decision +
               (v.reason.empty() ? "" : " (" + v.reason + ")");
  } catch (const Error& e) {
    d.keep = false;  // unreliable verdict rejects by default
    d.reason = std::string("verdict unusable: ") + e.what();
  }
  return d;
}

}  // namespace drag
