#include "cropsight/pipeline.hpp"

#include <charconv>
#include <chrono>
#include <filesystem>
#include <json.hpp>

#include "cropsight/error.hpp"
#include "cropsight/icon_query.hpp"
#include "cropsight/synth.hpp"

namespace cropsight::pipeline {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view why) {
  throw Error(ErrorCode::InvalidConfig,
              "config key '" + std::string(key) + "' = '" + std::string(value) + "': " + std::string(why));
}

double parse_double(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    double d = std::stod(std::string(v), &used);
    if (used != v.size()) bad_value(key, v, "not a number");
    return d;
  } catch (const std::logic_error&) {
    bad_value(key, v, "not a number");
  }
}

long long parse_int(std::string_view key, std::string_view v) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "not an integer");
  return out;
}

std::string resolve(std::string_view v, const std::string& base_dir) {
  fs::path p{std::string(v)};
  if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
  return p.lexically_normal().string();
}

void set_threshold(segmentation::ThresholdSpec& spec, std::string_view field, std::string_view key,
                   std::string_view v) {
  if (field == "mode") {
    if (v == "otsu") spec.mode = segmentation::ThresholdMode::Otsu;
    else if (v == "fixed") spec.mode = segmentation::ThresholdMode::Fixed;
    else bad_value(key, v, "expected otsu or fixed");
  } else if (field == "value") {
    spec.value = parse_double(key, v);
  } else if (field == "polarity") {
    if (v == "above") spec.polarity = segmentation::Polarity::Above;
    else if (v == "below") spec.polarity = segmentation::Polarity::Below;
    else bad_value(key, v, "expected above or below");
  } else if (field == "levels") {
    spec.levels = static_cast<int>(parse_int(key, v));
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown config key '" + std::string(key) + "'");
  }
}

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& out) : out_(out), start_(Clock::now()) {}
  void lap(std::string_view stage) {
    auto now = Clock::now();
    out_.push_back({std::string(stage), std::chrono::duration<double, std::milli>(now - start_).count()});
    start_ = now;
  }

 private:
  std::vector<StageTiming>& out_;
  Clock::time_point start_;
};

std::string sanitize(std::string id) {
  for (auto& c : id) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return id.empty() ? "image" : id;
}

void dump_debug(const Segmentation& seg, const std::string& dir, const std::string& image_id) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const std::string stem = (fs::path(dir) / sanitize(image_id)).string();
  imaging::write_file(stem + ".saturation_mask.pgm", imaging::encode_pgm(seg.saturation_mask));
  imaging::write_file(stem + ".spot_mask.pgm", imaging::encode_pgm(seg.spot_mask));
  imaging::write_file(stem + ".labels.pgm", imaging::encode_pgm16(seg.regions.labels));
}

}  // namespace

void set_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value, const std::string& base_dir) {
  const std::string_view v = trim(value);
  if (key == "enhance.brightness_delta") {
    cfg.enhance.brightness_delta = parse_double(key, v);
  } else if (key == "enhance.contrast_gain") {
    cfg.enhance.contrast_gain = parse_double(key, v);
  } else if (key.starts_with("saturation.")) {
    set_threshold(cfg.saturation_threshold, key.substr(11), key, v);
  } else if (key.starts_with("hue.")) {
    set_threshold(cfg.hue_threshold, key.substr(4), key, v);
  } else if (key == "connectivity") {
    auto c = parse_int(key, v);
    if (c != 4 && c != 8) bad_value(key, v, "expected 4 or 8");
    cfg.connectivity = c == 4 ? segmentation::Connectivity::Four : segmentation::Connectivity::Eight;
  } else if (key == "min_spot_area") {
    auto a = parse_int(key, v);
    if (a < 1) bad_value(key, v, "must be at least 1");
    cfg.min_spot_area = static_cast<std::size_t>(a);
  } else if (key == "model") {
    cfg.model_path = resolve(v, base_dir);
  } else if (key == "taxonomy") {
    cfg.taxonomy_path = resolve(v, base_dir);
  } else if (key == "knowledge_base") {
    cfg.kb_path = resolve(v, base_dir);
  } else if (key == "faq") {
    cfg.faq_path = resolve(v, base_dir);
  } else if (key == "messages") {
    cfg.messages_path = resolve(v, base_dir);
  } else if (key == "assets_dir") {
    cfg.assets_dir = resolve(v, base_dir);
  } else if (key == "static_dir") {
    cfg.static_dir = resolve(v, base_dir);
  } else if (key == "debug_dump_dir") {
    cfg.debug_dump_dir = resolve(v, base_dir);
  } else if (key == "listen") {
    auto colon = v.rfind(':');
    if (colon == std::string_view::npos) bad_value(key, v, "expected host:port");
    cfg.listen_host = std::string(v.substr(0, colon));
    auto port = parse_int(key, v.substr(colon + 1));
    if (port < 0 || port > 65535) bad_value(key, v, "port out of range");
    cfg.listen_port = static_cast<int>(port);
  } else if (key == "default_locale") {
    if (v.empty()) bad_value(key, v, "must not be empty");
    cfg.default_locale = std::string(v);
  } else if (key == "max_upload_bytes") {
    auto n = parse_int(key, v);
    if (n < 1) bad_value(key, v, "must be positive");
    cfg.max_upload_bytes = static_cast<std::size_t>(n);
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown config key '" + std::string(key) + "'");
  }
}

PipelineConfig parse_config(std::string_view text, const std::string& base_dir) {
  PipelineConfig cfg;
  int line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::InvalidConfig, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    set_config_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1), base_dir);
  }
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  const std::string text = icons::read_text_file(path);
  return parse_config(text, fs::absolute(path).parent_path().string());
}

void validate_config(const PipelineConfig& cfg, bool require_model, bool require_catalog) {
  if (!(cfg.enhance.contrast_gain > 0.0)) throw Error(ErrorCode::InvalidConfig, "enhance.contrast_gain must be > 0");
  for (const auto* spec : {&cfg.saturation_threshold, &cfg.hue_threshold}) {
    if (spec->levels < 2) throw Error(ErrorCode::InvalidConfig, "threshold levels must be at least 2");
    if (spec->mode == segmentation::ThresholdMode::Fixed && !(spec->value >= spec->lo && spec->value <= spec->hi)) {
      throw Error(ErrorCode::InvalidConfig, "fixed threshold outside its plane's domain");
    }
  }
  auto must_exist = [](const std::string& path, const char* key) {
    if (path.empty()) throw Error(ErrorCode::InvalidConfig, std::string("config key '") + key + "' is required");
    if (!fs::exists(path)) throw Error(ErrorCode::InvalidConfig, std::string(key) + " file not found: " + path);
  };
  if (require_model) must_exist(cfg.model_path, "model");
  if (require_catalog) {
    must_exist(cfg.taxonomy_path, "taxonomy");
    must_exist(cfg.kb_path, "knowledge_base");
    must_exist(cfg.faq_path, "faq");
  }
  if (!cfg.messages_path.empty()) must_exist(cfg.messages_path, "messages");
}

Segmentation segment_and_measure(const imaging::RgbImage& img, const PipelineConfig& cfg) {
  Segmentation seg;
  StageClock clock(seg.timings);

  auto normalized = imaging::normalize_size(img);
  clock.lap("normalize");
  seg.prepared = imaging::enhance(normalized, cfg.enhance);
  clock.lap("enhance");
  auto hsi = imaging::rgb_to_hsi(seg.prepared);
  clock.lap("rgb_to_hsi");
  auto bsm = segmentation::binary_saturation_mask(hsi.saturation, cfg.saturation_threshold);
  if (bsm.degenerate) seg.warnings.push_back("saturation histogram is degenerate");
  seg.saturation_mask = std::move(bsm.mask);
  clock.lap("binary_saturation_mask");
  auto masked = segmentation::mask_hue(hsi.hue, seg.saturation_mask);
  clock.lap("mask_hue");
  const auto& hs = cfg.hue_threshold;
  auto hist = segmentation::histogram(masked, hs.levels, hs.lo, hs.hi);
  clock.lap("histogram");
  auto spots = masked.valid_count() && hist.total()
                   ? segmentation::threshold_segment(masked, hs, &hist)
                   : segmentation::threshold_segment(masked, hs);
  if (spots.degenerate) seg.warnings.push_back("hue histogram is degenerate");
  seg.spot_mask = std::move(spots.mask);
  clock.lap("threshold_segment");
  auto labeled = segmentation::label_components(seg.spot_mask, cfg.connectivity);
  clock.lap("label_components");
  seg.regions = segmentation::min_spot_filter(labeled, cfg.min_spot_area);
  clock.lap("min_spot_filter");
  seg.features.reserve(seg.regions.regions.size());
  for (const auto& spot : seg.regions.regions) seg.features.push_back(features::extract_features(spot));
  clock.lap("extract_features");
  return seg;
}

PipelineResult run_pipeline(const imaging::RgbImage& img, const PipelineConfig& cfg, const classifier::MlpModel& model,
                            std::string image_id) {
  Segmentation seg = segment_and_measure(img, cfg);
  if (!cfg.debug_dump_dir.empty()) dump_debug(seg, cfg.debug_dump_dir, image_id);
  if (seg.features.empty()) {
    throw Error(ErrorCode::Undiagnosable, "no disease spots detected in the image");
  }
  PipelineResult result;
  StageClock clock(seg.timings);
  result.diagnosis = classifier::classify_image(model, seg.features, std::move(image_id));
  clock.lap("classify_image");
  result.spot_features = std::move(seg.features);
  result.warnings = std::move(seg.warnings);
  result.timings = std::move(seg.timings);
  return result;
}

PipelineResult run_pipeline(std::span<const std::uint8_t> image_bytes, const PipelineConfig& cfg,
                            const classifier::MlpModel& model, std::string image_id) {
  if (image_bytes.size() > cfg.max_upload_bytes) {
    throw Error(ErrorCode::PayloadTooLarge, "image exceeds the upload limit of " + std::to_string(cfg.max_upload_bytes) + " bytes");
  }
  return run_pipeline(imaging::load_image(image_bytes), cfg, model, std::move(image_id));
}

std::string diagnosis_json(const PipelineResult& result) {
  using nlohmann::json;
  const auto& d = result.diagnosis;
  json spots = json::array();
  for (std::size_t i = 0; i < d.spot_predictions.size(); ++i) {
    const auto& p = d.spot_predictions[i];
    json feats = json::object();
    const auto values = result.spot_features[i].values();
    for (std::size_t k = 0; k < features::kFeatureCount; ++k) feats[std::string(features::kFeatureNames[k])] = values[k];
    spots.push_back({{"index", i + 1},
                     {"class", classifier::class_name(p.predicted_class)},
                     {"probabilities",
                      {{"LeafBlast", p.probabilities[0]}, {"BrownSpot", p.probabilities[1]}}},
                     {"features", feats}});
  }
  json timings = json::array();
  for (const auto& t : result.timings) timings.push_back({{"stage", t.stage}, {"ms", t.milliseconds}});
  json out = {{"image_id", d.image_id},
              {"final_class", classifier::class_name(d.final_class)},
              {"confidence", d.confidence},
              {"spot_count", d.spot_predictions.size()},
              {"votes", {{"LeafBlast", d.votes[0]}, {"BrownSpot", d.votes[1]}}},
              {"spots", spots},
              {"timings", timings},
              {"warnings", result.warnings}};
  return out.dump();
}

std::vector<classifier::LabeledImage> measure_split(const std::string& corpus_dir, const std::string& split,
                                                    const PipelineConfig& cfg) {
  const auto manifest = synth::read_manifest(corpus_dir);
  std::vector<classifier::LabeledImage> out;
  for (const auto& e : manifest.split(split)) {
    auto img = imaging::load_image_file((fs::path(corpus_dir) / e.path).string());
    auto seg = segment_and_measure(img, cfg);
    out.push_back({e.path, e.disease, std::move(seg.features)});
  }
  return out;
}

classifier::TrainResult train_on_corpus(const std::string& corpus_dir, const PipelineConfig& cfg,
                                        const classifier::TrainingConfig& tcfg) {
  std::vector<classifier::LabeledFeatures> samples;
  for (const auto& img : measure_split(corpus_dir, "train", cfg)) {
    for (const auto& f : img.spots) samples.push_back({f, img.label});
  }
  return classifier::train(samples, tcfg);
}

classifier::AccuracyReport evaluate_on_corpus(const classifier::MlpModel& model, const std::string& corpus_dir,
                                              const PipelineConfig& cfg) {
  auto images = measure_split(corpus_dir, "test", cfg);
  return classifier::evaluate(model, images);
}

classifier::MlpModel load_model_file(const std::string& path) {
  return classifier::load_model(imaging::read_file(path));
}

void save_model_file(const classifier::MlpModel& model, const std::string& path) {
  imaging::write_file(path, classifier::save_model(model));
}

}  // namespace cropsight::pipeline
