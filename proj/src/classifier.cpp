#include "cropsight/classifier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "cropsight/error.hpp"
#include "cropsight/rng.hpp"

namespace cropsight::classifier {

namespace {

constexpr char kMagic[4] = {'C', 'S', 'G', 'T'};
constexpr std::uint32_t kMaxWidth = 1u << 16;

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

Layer make_layer(int inputs, int outputs) {
  return {inputs, outputs, std::vector<double>(static_cast<std::size_t>(inputs) * outputs, 0.0),
          std::vector<double>(static_cast<std::size_t>(outputs), 0.0)};
}

std::vector<double> affine(const Layer& l, std::span<const double> in) {
  std::vector<double> out(l.biases);
  for (int o = 0; o < l.outputs; ++o) {
    double acc = out[static_cast<std::size_t>(o)];
    const double* row = l.weights.data() + static_cast<std::size_t>(o) * l.inputs;
    for (int i = 0; i < l.inputs; ++i) acc += row[i] * in[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(o)] = acc;
  }
  return out;
}

struct Activations {
  std::vector<double> a1;
  std::vector<double> a2;
  std::array<double, kClassCount> logits{};
  std::array<double, kClassCount> probs{};
};

Activations run(const MlpModel& m, std::span<const double> x) {
  if (static_cast<int>(x.size()) != m.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "input has " + std::to_string(x.size()) + " features, model expects " +
                                                  std::to_string(m.input_dim()));
  }
  Activations a;
  a.a1 = affine(m.layers[0], x);
  for (auto& v : a.a1) v = sigmoid(v);
  a.a2 = affine(m.layers[1], a.a1);
  for (auto& v : a.a2) v = sigmoid(v);
  auto z = affine(m.layers[2], a.a2);
  const double mx = std::max(z[0], z[1]);
  const double e0 = std::exp(z[0] - mx);
  const double e1 = std::exp(z[1] - mx);
  a.logits = {z[0], z[1]};
  a.probs = {e0 / (e0 + e1), e1 / (e0 + e1)};
  return a;
}

double loss_from_logits(const std::array<double, kClassCount>& z, int target) noexcept {
  const double mx = std::max(z[0], z[1]);
  const double lse = mx + std::log(std::exp(z[0] - mx) + std::exp(z[1] - mx));
  return lse - z[static_cast<std::size_t>(target)];
}

Gradients zero_gradients(const MlpModel& m) {
  Gradients g;
  for (std::size_t i = 0; i < 3; ++i) g.layers[i] = make_layer(m.layers[i].inputs, m.layers[i].outputs);
  return g;
}

void accumulate(const MlpModel& m, std::span<const double> x, int target, Gradients& g) {
  const Activations a = run(m, x);
  g.loss += loss_from_logits(a.logits, target);

  std::vector<double> delta3 = {a.probs[0] - (target == 0 ? 1.0 : 0.0), a.probs[1] - (target == 1 ? 1.0 : 0.0)};

  auto backward = [](const Layer& layer, Layer& grad, std::span<const double> delta, std::span<const double> input) {
    for (int o = 0; o < layer.outputs; ++o) {
      const double d = delta[static_cast<std::size_t>(o)];
      grad.biases[static_cast<std::size_t>(o)] += d;
      double* row = grad.weights.data() + static_cast<std::size_t>(o) * layer.inputs;
      for (int i = 0; i < layer.inputs; ++i) row[i] += d * input[static_cast<std::size_t>(i)];
    }
  };
  auto propagate = [](const Layer& layer, std::span<const double> delta, const std::vector<double>& act) {
    std::vector<double> prev(static_cast<std::size_t>(layer.inputs), 0.0);
    for (int o = 0; o < layer.outputs; ++o) {
      for (int i = 0; i < layer.inputs; ++i) prev[static_cast<std::size_t>(i)] += layer.w(o, i) * delta[static_cast<std::size_t>(o)];
    }
    for (std::size_t i = 0; i < prev.size(); ++i) prev[i] *= act[i] * (1.0 - act[i]);
    return prev;
  };

  backward(m.layers[2], g.layers[2], delta3, a.a2);
  auto delta2 = propagate(m.layers[2], delta3, a.a2);
  backward(m.layers[1], g.layers[1], delta2, a.a1);
  auto delta1 = propagate(m.layers[1], delta2, a.a1);
  backward(m.layers[0], g.layers[0], delta1, x);
}

void check_shapes(const MlpModel& m) {
  const auto& L = m.layers;
  if (L[0].outputs != L[1].inputs || L[1].outputs != L[2].inputs || L[2].outputs != kClassCount) {
    throw Error(ErrorCode::DimensionMismatch, "model layer shapes do not chain");
  }
}

class Writer {
 public:
  void bytes(std::span<const std::uint8_t> b) { out.insert(out.end(), b.begin(), b.end()); }
  void u8(std::uint8_t v) { out.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw Error(ErrorCode::CorruptModel, "model stream truncated");
  }
  std::uint8_t u8() {
    need(1);
    return b_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{b_[pos_++]} << (8 * i);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{b_[pos_++]} << (8 * i);
    return std::bit_cast<double>(v);
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string_view class_name(DiseaseClass c) noexcept {
  return c == DiseaseClass::LeafBlast ? "LeafBlast" : "BrownSpot";
}

std::string_view class_slug(DiseaseClass c) noexcept {
  return c == DiseaseClass::LeafBlast ? "leafblast" : "brownspot";
}

DiseaseClass parse_class(std::string_view text) {
  if (text == "LeafBlast" || text == "leafblast") return DiseaseClass::LeafBlast;
  if (text == "BrownSpot" || text == "brownspot") return DiseaseClass::BrownSpot;
  throw Error(ErrorCode::InvalidParams, "unknown disease class: " + std::string(text));
}

MlpModel make_model(int d_in, int h1, int h2) {
  if (d_in <= 0 || h1 <= 0 || h2 <= 0) throw Error(ErrorCode::InvalidParams, "layer widths must be positive");
  MlpModel m;
  m.layers = {make_layer(d_in, h1), make_layer(h1, h2), make_layer(h2, kClassCount)};
  m.feature_stats.assign(static_cast<std::size_t>(d_in), FeatureStat{});
  return m;
}

std::vector<FeatureStat> compute_feature_stats(std::span<const features::FeatureVector> vectors) {
  std::vector<FeatureStat> stats(features::kFeatureCount);
  if (vectors.empty()) return stats;
  const double n = static_cast<double>(vectors.size());
  for (std::size_t k = 0; k < features::kFeatureCount; ++k) {
    double sum = 0.0;
    for (const auto& v : vectors) sum += v.values()[k];
    const double mean = sum / n;
    double sq = 0.0;
    for (const auto& v : vectors) {
      double d = v.values()[k] - mean;
      sq += d * d;
    }
    double sd = std::sqrt(sq / n);
    stats[k] = {mean, sd > 1e-12 ? sd : 1.0};
  }
  return stats;
}

std::vector<double> normalize_features(const features::FeatureVector& v, std::span<const FeatureStat> stats) {
  if (stats.size() != features::kFeatureCount) {
    throw Error(ErrorCode::DimensionMismatch, "feature statistics do not cover the feature vector");
  }
  auto raw = v.values();
  std::vector<double> out(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) out[k] = (raw[k] - stats[k].mean) / stats[k].stddev;
  return out;
}

SpotPrediction forward(const MlpModel& m, std::span<const double> x) {
  auto a = run(m, x);
  SpotPrediction p;
  p.probabilities = a.probs;
  p.predicted_class = a.probs[1] > a.probs[0] ? DiseaseClass::BrownSpot : DiseaseClass::LeafBlast;
  return p;
}

double cross_entropy(const MlpModel& m, std::span<const double> x, DiseaseClass target) {
  return loss_from_logits(run(m, x).logits, static_cast<int>(target));
}

Gradients backprop_gradients(const MlpModel& m, std::span<const Sample> batch) {
  check_shapes(m);
  Gradients g = zero_gradients(m);
  for (const auto& s : batch) accumulate(m, s.x, static_cast<int>(s.label), g);
  return g;
}

Gradients backprop_gradients(const MlpModel& m, std::span<const double> x, DiseaseClass target) {
  check_shapes(m);
  Gradients g = zero_gradients(m);
  accumulate(m, x, static_cast<int>(target), g);
  return g;
}

void apply_gradients(MlpModel& m, const Gradients& g, double rate, double l2, std::size_t batch) {
  const double scale = batch ? 1.0 / static_cast<double>(batch) : 1.0;
  for (std::size_t l = 0; l < 3; ++l) {
    auto& layer = m.layers[l];
    const auto& grad = g.layers[l];
    for (std::size_t i = 0; i < layer.weights.size(); ++i) {
      layer.weights[i] -= rate * (grad.weights[i] * scale + l2 * layer.weights[i]);
    }
    for (std::size_t i = 0; i < layer.biases.size(); ++i) layer.biases[i] -= rate * grad.biases[i] * scale;
  }
}

TrainResult train(std::span<const LabeledFeatures> dataset, const TrainingConfig& cfg) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "training set is empty");
  bool seen[kClassCount] = {false, false};
  for (const auto& s : dataset) seen[static_cast<int>(s.label)] = true;
  if (!seen[0] || !seen[1]) throw Error(ErrorCode::SingleClassDataset, "training set must contain both classes");
  if (!(cfg.learning_rate > 0.0) || cfg.epochs < 1 || cfg.batch_size < 1 || cfg.h1 < 1 || cfg.h2 < 1 ||
      !(cfg.l2 >= 0.0)) {
    throw Error(ErrorCode::InvalidParams, "invalid training configuration");
  }

  std::vector<features::FeatureVector> raw;
  raw.reserve(dataset.size());
  for (const auto& s : dataset) raw.push_back(s.features);

  TrainResult result;
  MlpModel& m = result.model;
  m = make_model(static_cast<int>(features::kFeatureCount), cfg.h1, cfg.h2);
  m.feature_stats = compute_feature_stats(raw);

  std::vector<Sample> samples;
  samples.reserve(dataset.size());
  for (const auto& s : dataset) samples.push_back({normalize_features(s.features, m.feature_stats), s.label});

  Rng rng(cfg.seed);
  for (auto& layer : m.layers) {
    const double limit = std::sqrt(6.0 / (layer.inputs + layer.outputs));
    for (auto& w : layer.weights) w = rng.uniform(-limit, limit);
  }

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Sample> batch;
  batch.reserve(static_cast<std::size_t>(cfg.batch_size));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      batch.clear();
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      for (std::size_t i = start; i < end; ++i) batch.push_back(samples[order[i]]);
      Gradients g = backprop_gradients(m, batch);
      epoch_loss += g.loss;
      apply_gradients(m, g, cfg.learning_rate, cfg.l2, batch.size());
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(samples.size()));
  }
  return result;
}

Diagnosis tally_votes(std::vector<SpotPrediction> predictions, std::string image_id) {
  if (predictions.empty()) throw Error(ErrorCode::NoSpots, "no spots to classify");
  Diagnosis d;
  d.image_id = std::move(image_id);
  std::array<double, kClassCount> mass{0.0, 0.0};
  for (const auto& p : predictions) {
    ++d.votes[static_cast<std::size_t>(p.predicted_class)];
    mass[0] += p.probabilities[0];
    mass[1] += p.probabilities[1];
  }
  if (d.votes[1] > d.votes[0] || (d.votes[1] == d.votes[0] && mass[1] > mass[0])) {
    d.final_class = DiseaseClass::BrownSpot;
  } else {
    d.final_class = DiseaseClass::LeafBlast;
  }
  d.confidence = static_cast<double>(d.votes[static_cast<std::size_t>(d.final_class)]) /
                 static_cast<double>(predictions.size());
  d.spot_predictions = std::move(predictions);
  return d;
}

Diagnosis classify_image(const MlpModel& m, std::span<const features::FeatureVector> spots, std::string image_id) {
  if (spots.empty()) throw Error(ErrorCode::NoSpots, "no spots to classify");
  std::vector<SpotPrediction> preds;
  preds.reserve(spots.size());
  for (const auto& f : spots) preds.push_back(forward(m, normalize_features(f, m.feature_stats)));
  return tally_votes(std::move(preds), std::move(image_id));
}

AccuracyReport evaluate(const MlpModel& m, std::span<const LabeledImage> testset) {
  if (testset.empty()) throw Error(ErrorCode::EmptyDataset, "test set is empty");
  AccuracyReport r;
  for (const auto& img : testset) {
    ++r.images;
    if (img.spots.empty()) {
      ++r.undiagnosable;
      continue;
    }
    Diagnosis d = classify_image(m, img.spots, img.image_id);
    const auto truth = static_cast<std::size_t>(img.label);
    ++r.confusion[truth][static_cast<std::size_t>(d.final_class)];
    if (d.final_class == img.label) ++r.images_correct;
    for (const auto& p : d.spot_predictions) {
      ++r.spots;
      if (p.predicted_class == img.label) ++r.spots_correct;
    }
  }
  return r;
}

std::string AccuracyReport::to_text() const {
  char buf[512];
  std::ostringstream os;
  std::snprintf(buf, sizeof buf, "images:          %d\n", images);
  os << buf;
  std::snprintf(buf, sizeof buf, "images correct:  %d\n", images_correct);
  os << buf;
  std::snprintf(buf, sizeof buf, "undiagnosable:   %d\n", undiagnosable);
  os << buf;
  std::snprintf(buf, sizeof buf, "spot accuracy:   %.2f%% (%d/%d)\n", spot_accuracy(), spots_correct, spots);
  os << buf;
  os << "confusion matrix (rows = true class, columns = predicted):\n";
  std::snprintf(buf, sizeof buf, "%12s %10s %10s\n", "", "LeafBlast", "BrownSpot");
  os << buf;
  for (int t = 0; t < kClassCount; ++t) {
    std::snprintf(buf, sizeof buf, "%12s %10d %10d\n", std::string(class_name(static_cast<DiseaseClass>(t))).c_str(),
                  confusion[static_cast<std::size_t>(t)][0], confusion[static_cast<std::size_t>(t)][1]);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "image_accuracy=%.2f\n", image_accuracy());
  os << buf;
  return os.str();
}

std::string AccuracyReport::to_csv() const {
  char buf[128];
  std::ostringstream os;
  os << "metric,value\n";
  os << "images," << images << "\n";
  os << "images_correct," << images_correct << "\n";
  os << "undiagnosable," << undiagnosable << "\n";
  std::snprintf(buf, sizeof buf, "image_accuracy,%.4f\n", image_accuracy());
  os << buf;
  os << "spots," << spots << "\n";
  os << "spots_correct," << spots_correct << "\n";
  std::snprintf(buf, sizeof buf, "spot_accuracy,%.4f\n", spot_accuracy());
  os << buf;
  for (int t = 0; t < kClassCount; ++t) {
    for (int p = 0; p < kClassCount; ++p) {
      os << "confusion_" << class_slug(static_cast<DiseaseClass>(t)) << "_as_"
         << class_slug(static_cast<DiseaseClass>(p)) << "," << confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)]
         << "\n";
    }
  }
  return os.str();
}

std::vector<std::uint8_t> save_model(const MlpModel& m) {
  check_shapes(m);
  Writer w;
  w.bytes({reinterpret_cast<const std::uint8_t*>(kMagic), 4});
  w.u8(kModelFormatVersion);
  const auto sizes = m.layer_sizes();
  w.u32(static_cast<std::uint32_t>(sizes.size()));
  for (int s : sizes) w.u32(static_cast<std::uint32_t>(s));
  for (const auto& layer : m.layers) {
    for (double v : layer.weights) w.f64(v);
    for (double v : layer.biases) w.f64(v);
  }
  for (const auto& st : m.feature_stats) {
    w.f64(st.mean);
    w.f64(st.stddev);
  }
  return std::move(w.out);
}

MlpModel load_model(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.need(4);
  for (char c : kMagic) {
    if (r.u8() != static_cast<std::uint8_t>(c)) throw Error(ErrorCode::CorruptModel, "bad model magic");
  }
  const std::uint8_t version = r.u8();
  if (version != kModelFormatVersion) {
    throw Error(ErrorCode::CorruptModel, "unsupported model format version " + std::to_string(version) +
                                             " (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  if (r.u32() != 4) throw Error(ErrorCode::CorruptModel, "model must have exactly two hidden layers");
  std::array<std::uint32_t, 4> sizes{};
  for (auto& s : sizes) {
    s = r.u32();
    if (s == 0 || s > kMaxWidth) throw Error(ErrorCode::CorruptModel, "layer width out of range");
  }
  if (sizes[3] != kClassCount) throw Error(ErrorCode::CorruptModel, "output layer must have two classes");

  std::size_t expected = 0;
  for (std::size_t l = 0; l < 3; ++l) expected += (std::size_t{sizes[l]} + 1) * sizes[l + 1];
  expected += 2 * std::size_t{sizes[0]};
  r.need(expected * 8);

  MlpModel m = make_model(static_cast<int>(sizes[0]), static_cast<int>(sizes[1]), static_cast<int>(sizes[2]));
  for (auto& layer : m.layers) {
    for (auto& v : layer.weights) v = r.f64();
    for (auto& v : layer.biases) v = r.f64();
  }
  for (auto& st : m.feature_stats) {
    st.mean = r.f64();
    st.stddev = r.f64();
    if (!(st.stddev > 0.0) || !std::isfinite(st.stddev) || !std::isfinite(st.mean)) {
      throw Error(ErrorCode::CorruptModel, "invalid feature statistics");
    }
  }
  if (!r.done()) throw Error(ErrorCode::CorruptModel, "trailing bytes after model");
  return m;
}

}  // namespace cropsight::classifier
