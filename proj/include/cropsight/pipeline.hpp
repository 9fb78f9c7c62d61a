#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cropsight/classifier.hpp"
#include "cropsight/features.hpp"
#include "cropsight/imaging.hpp"
#include "cropsight/segmentation.hpp"

namespace cropsight::pipeline {

struct PipelineConfig {
  imaging::EnhanceParams enhance;
  segmentation::ThresholdSpec saturation_threshold{segmentation::ThresholdMode::Otsu, 0.0,
                                                   segmentation::Polarity::Above, 256, 0.0, 1.0};
  segmentation::ThresholdSpec hue_threshold{segmentation::ThresholdMode::Fixed, 90.0, segmentation::Polarity::Below,
                                            256, 0.0, 360.0};
  segmentation::Connectivity connectivity = segmentation::Connectivity::Eight;
  std::size_t min_spot_area = 3;

  std::string model_path;
  std::string taxonomy_path;
  std::string kb_path;
  std::string faq_path;
  std::string messages_path;  // optional localized error messages
  std::string assets_dir;     // optional; served under /assets
  std::string static_dir;     // optional; served under /
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  std::string default_locale = "en";
  std::size_t max_upload_bytes = 5u * 1024u * 1024u;
  std::string debug_dump_dir;  // optional; masks and labels written as PGM
};

// `key = value` lines; '#' starts a comment. Relative paths are resolved
// against the config file's directory. Unknown keys are rejected.
PipelineConfig parse_config(std::string_view text, const std::string& base_dir = {});
PipelineConfig load_config(const std::string& path);
void set_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value,
                      const std::string& base_dir = {});
// Checks numeric bounds and that referenced files exist (for the keys whose
// features are in use).
void validate_config(const PipelineConfig& cfg, bool require_model, bool require_catalog);

// Stage names in execution order.
inline constexpr std::string_view kStageOrder[] = {
    "normalize",         "enhance",        "rgb_to_hsi",       "binary_saturation_mask",
    "mask_hue",          "histogram",      "threshold_segment", "label_components",
    "min_spot_filter",   "extract_features", "classify_image"};

struct StageTiming {
  std::string stage;
  double milliseconds = 0.0;
};

struct Segmentation {
  imaging::RgbImage prepared;  // normalised + enhanced
  segmentation::BinaryMask saturation_mask;
  segmentation::BinaryMask spot_mask;
  segmentation::LabeledRegions regions;  // after min_spot_filter
  std::vector<features::FeatureVector> features;
  std::vector<std::string> warnings;
  std::vector<StageTiming> timings;
};

// Everything up to and including extract_features.
Segmentation segment_and_measure(const imaging::RgbImage& img, const PipelineConfig& cfg);

struct PipelineResult {
  classifier::Diagnosis diagnosis;
  std::vector<features::FeatureVector> spot_features;
  std::vector<std::string> warnings;
  std::vector<StageTiming> timings;
};

// Full stage order. Throws Undiagnosable when no spot survives filtering.
PipelineResult run_pipeline(const imaging::RgbImage& img, const PipelineConfig& cfg, const classifier::MlpModel& model,
                            std::string image_id = {});
PipelineResult run_pipeline(std::span<const std::uint8_t> image_bytes, const PipelineConfig& cfg,
                            const classifier::MlpModel& model, std::string image_id = {});

std::string diagnosis_json(const PipelineResult& result);

// Corpus helpers: run segmentation over every image of a manifest split.
std::vector<classifier::LabeledImage> measure_split(const std::string& corpus_dir, const std::string& split,
                                                    const PipelineConfig& cfg);
classifier::TrainResult train_on_corpus(const std::string& corpus_dir, const PipelineConfig& cfg,
                                        const classifier::TrainingConfig& tcfg);
classifier::AccuracyReport evaluate_on_corpus(const classifier::MlpModel& model, const std::string& corpus_dir,
                                              const PipelineConfig& cfg);

classifier::MlpModel load_model_file(const std::string& path);
void save_model_file(const classifier::MlpModel& model, const std::string& path);

}  // namespace cropsight::pipeline
