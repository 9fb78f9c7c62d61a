#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cropsight/features.hpp"

namespace cropsight::classifier {

enum class DiseaseClass : int { LeafBlast = 0, BrownSpot = 1 };
inline constexpr int kClassCount = 2;

std::string_view class_name(DiseaseClass c) noexcept;  // "LeafBlast" / "BrownSpot"
std::string_view class_slug(DiseaseClass c) noexcept;  // "leafblast" / "brownspot"
DiseaseClass parse_class(std::string_view text);       // accepts either form

struct FeatureStat {
  double mean = 0.0;
  double stddev = 1.0;
  friend bool operator==(const FeatureStat&, const FeatureStat&) = default;
};

// Dense layer: weights are row-major (outputs x inputs).
struct Layer {
  int inputs = 0;
  int outputs = 0;
  std::vector<double> weights;
  std::vector<double> biases;

  double& w(int out, int in) noexcept { return weights[static_cast<std::size_t>(out) * inputs + in]; }
  double w(int out, int in) const noexcept { return weights[static_cast<std::size_t>(out) * inputs + in]; }
  friend bool operator==(const Layer&, const Layer&) = default;
};

// d_in -> h1 (sigmoid) -> h2 (sigmoid) -> 2 (softmax).
struct MlpModel {
  std::array<Layer, 3> layers;
  std::vector<FeatureStat> feature_stats;

  int input_dim() const noexcept { return layers[0].inputs; }
  std::array<int, 4> layer_sizes() const noexcept {
    return {layers[0].inputs, layers[0].outputs, layers[1].outputs, layers[2].outputs};
  }
  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

// Zero-initialised model with the given shape; stats default to (0, 1).
MlpModel make_model(int d_in, int h1, int h2);

struct TrainingConfig {
  double learning_rate = 0.05;
  int epochs = 300;
  int batch_size = 16;
  std::uint64_t seed = 42;
  int h1 = 16;
  int h2 = 8;
  double l2 = 1e-4;
};

struct SpotPrediction {
  std::array<double, kClassCount> probabilities{0.5, 0.5};
  DiseaseClass predicted_class = DiseaseClass::LeafBlast;
};

struct Diagnosis {
  std::string image_id;
  std::vector<SpotPrediction> spot_predictions;
  std::array<int, kClassCount> votes{0, 0};
  DiseaseClass final_class = DiseaseClass::LeafBlast;
  double confidence = 0.0;
};

struct Sample {
  std::vector<double> x;
  DiseaseClass label = DiseaseClass::LeafBlast;
};

struct LabeledFeatures {
  features::FeatureVector features;
  DiseaseClass label = DiseaseClass::LeafBlast;
};

// Same shapes as the model's layers.
struct Gradients {
  std::array<Layer, 3> layers;
  double loss = 0.0;  // summed cross-entropy over the samples
};

std::vector<FeatureStat> compute_feature_stats(std::span<const features::FeatureVector> vectors);

// (x - mean) / stddev per feature.
std::vector<double> normalize_features(const features::FeatureVector& v, std::span<const FeatureStat> stats);

SpotPrediction forward(const MlpModel& m, std::span<const double> x);

double cross_entropy(const MlpModel& m, std::span<const double> x, DiseaseClass target);

// Analytic gradient of the summed cross-entropy over `batch`. L2 is not
// included; train() adds it.
Gradients backprop_gradients(const MlpModel& m, std::span<const Sample> batch);
Gradients backprop_gradients(const MlpModel& m, std::span<const double> x, DiseaseClass target);

// In-place SGD step: theta -= rate * (grad / batch + l2 * w).
void apply_gradients(MlpModel& m, const Gradients& g, double rate, double l2, std::size_t batch);

struct TrainResult {
  MlpModel model;
  std::vector<double> epoch_loss;  // mean cross-entropy per epoch
};

// Deterministic for a fixed seed. Each spot is a separate sample.
TrainResult train(std::span<const LabeledFeatures> dataset, const TrainingConfig& cfg);

// Majority vote; ties go to the larger summed probability, then LeafBlast.
Diagnosis classify_image(const MlpModel& m, std::span<const features::FeatureVector> spots,
                         std::string image_id = {});
Diagnosis tally_votes(std::vector<SpotPrediction> predictions, std::string image_id = {});

struct LabeledImage {
  std::string image_id;
  DiseaseClass label = DiseaseClass::LeafBlast;
  std::vector<features::FeatureVector> spots;  // may be empty (undiagnosable)
};

struct AccuracyReport {
  int images = 0;
  int images_correct = 0;
  int undiagnosable = 0;
  int spots = 0;
  int spots_correct = 0;
  // [true][predicted]; undiagnosable images are counted in no cell.
  std::array<std::array<int, kClassCount>, kClassCount> confusion{};

  double image_accuracy() const noexcept { return images ? 100.0 * images_correct / images : 0.0; }
  double spot_accuracy() const noexcept { return spots ? 100.0 * spots_correct / spots : 0.0; }
  std::string to_text() const;
  std::string to_csv() const;
};

AccuracyReport evaluate(const MlpModel& m, std::span<const LabeledImage> testset);

inline constexpr std::uint8_t kModelFormatVersion = 1;

std::vector<std::uint8_t> save_model(const MlpModel& m);
MlpModel load_model(std::span<const std::uint8_t> bytes);

}  // namespace cropsight::classifier
