// Central-difference gradient of the summed cross-entropy.
#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "cropsight/classifier.hpp"
#include "cropsight/rng.hpp"

namespace oracle {

inline double summed_loss(const cropsight::classifier::MlpModel& m,
                          std::span<const cropsight::classifier::Sample> batch) {
  double total = 0.0;
  for (const auto& s : batch) total += cropsight::classifier::cross_entropy(m, s.x, s.label);
  return total;
}

// Gradients smaller than this are compared absolutely: at that scale the
// finite difference is dominated by rounding, not by the derivative.
inline constexpr double kGradFloor = 1e-6;

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic) + std::abs(numeric), kGradFloor});
}

// Largest relative error between backprop_gradients and central
// differences with step h, over every weight and bias.
inline double max_gradient_error(cropsight::classifier::MlpModel m,
                                 std::span<const cropsight::classifier::Sample> batch, double h = 1e-5) {
  const auto g = cropsight::classifier::backprop_gradients(m, batch);
  double worst = 0.0;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    auto probe = [&](double& param, double analytic) {
      const double saved = param;
      param = saved + h;
      const double up = summed_loss(m, batch);
      param = saved - h;
      const double down = summed_loss(m, batch);
      param = saved;
      worst = std::max(worst, relative_error(analytic, (up - down) / (2.0 * h)));
    };
    for (std::size_t i = 0; i < m.layers[l].weights.size(); ++i) probe(m.layers[l].weights[i], g.layers[l].weights[i]);
    for (std::size_t i = 0; i < m.layers[l].biases.size(); ++i) probe(m.layers[l].biases[i], g.layers[l].biases[i]);
  }
  return worst;
}

// A network with random shape and weights plus a random batch.
struct GradCase {
  cropsight::classifier::MlpModel model;
  std::vector<cropsight::classifier::Sample> batch;
};

inline GradCase random_grad_case(cropsight::Rng& rng, int samples) {
  using namespace cropsight::classifier;
  GradCase c;
  const int d_in = rng.range(2, 12);
  c.model = make_model(d_in, rng.range(2, 16), rng.range(2, 8));
  for (auto& layer : c.model.layers) {
    for (auto& w : layer.weights) w = rng.uniform(-1.5, 1.5);
    for (auto& b : layer.biases) b = rng.uniform(-0.5, 0.5);
  }
  for (int i = 0; i < samples; ++i) {
    Sample s;
    for (int k = 0; k < d_in; ++k) s.x.push_back(rng.normal());
    s.label = rng.below(2) ? DiseaseClass::BrownSpot : DiseaseClass::LeafBlast;
    c.batch.push_back(std::move(s));
  }
  return c;
}

}  // namespace oracle
