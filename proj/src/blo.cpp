//
// Copyright 2026 The forgeset Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "forgeset/blo.hpp"

#include <cmath>
#include <string>

#include "forgeset/error.hpp"
#include "forgeset/unlearn.hpp"

namespace forgeset {

std::string_view GranularityName(Granularity g) {
  return g == Granularity::kSample ? "sample" : "class";
}
std::string_view DirectionName(Direction d) {
  return d == Direction::kWorst ? "worst" : "easiest";
}
std::string_view LowerInitName(LowerInit i) {
  return i == LowerInit::kPretrained ? "pretrained" : "random";
}
std::string_view WeightInitName(WeightInit i) {
  return i == WeightInit::kUniform ? "uniform" : "random_binary";
}

void SignSgdStep(ModelParams& theta, const GradParams& grad, double beta,
                 std::size_t first_layer) {
  for (std::size_t l = first_layer; l < theta.layers.size(); ++l) {
    SignSgdStep(theta.layers[l].weight.data(), grad.layers[l].weight.data(), beta);
    SignSgdStep(theta.layers[l].bias, grad.layers[l].bias, beta);
  }
}

void SignSgdStep(std::span<double> theta, std::span<const double> grad, double beta) {
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= beta * Sign(grad[i]);
}

ModelParams LowerSignSgdWeighted(const ModelParams& theta_init, const Dataset& data,
                                 std::span<const double> sample_weights, double beta,
                                 std::size_t steps) {
  if (!(beta > 0.0)) Fail(ErrorCode::kBadSpec, "sign-SGD step size must be > 0");
  if (sample_weights.size() != data.size()) {
    Fail(ErrorCode::kShape, "lower-level weights length differs from dataset size");
  }
  ModelParams theta = theta_init;
  for (std::size_t k = 0; k < steps; ++k) {
    const auto [loss, grad] =
        ComputeLossAndGrad(theta, data.x, data.y, sample_weights, ParamScope::kAll);
    if (!std::isfinite(loss.total) || std::abs(loss.total) > kDivergenceLimit) {
      Fail(ErrorCode::kDivergence, "lower-level sign-SGD diverged at step " +
                                       std::to_string(k) + " (loss " +
                                       FormatDouble(loss.total) + ")");
    }
    SignSgdStep(theta, grad, beta);
  }
  return theta;
}

ModelParams LowerSignSgd(std::span<const double> w, const ModelParams& theta_init,
                         const Dataset& data, double beta, std::size_t steps,
                         double loss_scale) {
  if (w.size() != data.size()) {
    Fail(ErrorCode::kShape, "selection weights length differs from dataset size");
  }
  if (!(loss_scale > 0.0)) Fail(ErrorCode::kBadSpec, "loss scale must be > 0");
  Vector weights = MuSampleWeights(w);
  if (loss_scale != 1.0) {
    for (double& v : weights) v *= loss_scale;
  }
  return LowerSignSgdWeighted(theta_init, data, weights, beta, steps);
}

namespace {

std::vector<std::size_t> ClassCounts(const Dataset& data) {
  std::vector<std::size_t> counts(data.num_classes, 0);
  for (int label : data.y) ++counts[static_cast<std::size_t>(label)];
  return counts;
}

std::size_t UnitCount(const Dataset& data, Granularity granularity) {
  return granularity == Granularity::kSample ? data.size() : data.num_classes;
}

}  // namespace

Vector ClassSampleWeights(std::span<const double> class_w, const Dataset& data) {
  if (class_w.size() != data.num_classes) {
    Fail(ErrorCode::kShape, "class weights length differs from class count");
  }
  const auto counts = ClassCounts(data);
  const double n = static_cast<double>(data.size());
  Vector out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto c = static_cast<std::size_t>(data.y[i]);
    out[i] = (1.0 - 2.0 * class_w[c]) * n / static_cast<double>(counts[c]);
  }
  return out;
}

Vector ClassMeanLoss(std::span<const double> per_sample, const Dataset& data) {
  const auto counts = ClassCounts(data);
  Vector sums(data.num_classes, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    sums[static_cast<std::size_t>(data.y[i])] += per_sample[i];
  }
  for (std::size_t c = 0; c < sums.size(); ++c) {
    if (counts[c] > 0) sums[c] /= static_cast<double>(counts[c]);
  }
  return sums;
}

Vector UnitLosses(const ModelParams& theta_u, const Dataset& data,
                  Granularity granularity) {
  Vector losses = PerSampleLoss(theta_u, data.x, data.y);
  if (granularity == Granularity::kClass) return ClassMeanLoss(losses, data);
  return losses;
}

Vector UpperGradient(std::span<const double> w, const ModelParams& theta_u,
                     const Dataset& data, double gamma, Granularity granularity,
                     Direction direction) {
  if (w.size() != UnitCount(data, granularity)) {
    Fail(ErrorCode::kShape, "selection weights length " + std::to_string(w.size()) +
                                " does not match " +
                                std::to_string(UnitCount(data, granularity)) +
                                " selection units");
  }
  Vector g = UnitLosses(theta_u, data, granularity);
  const double s = direction == Direction::kWorst ? 1.0 : -1.0;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = s * g[i] + 2.0 * gamma * w[i];
  return g;
}

double UpperObjective(std::span<const double> w, const ModelParams& theta_u,
                      const Dataset& data, double gamma, Granularity granularity,
                      Direction direction) {
  if (w.size() != UnitCount(data, granularity)) {
    Fail(ErrorCode::kShape, "selection weights length does not match selection units");
  }
  const Vector losses = UnitLosses(theta_u, data, granularity);
  const double s = direction == Direction::kWorst ? 1.0 : -1.0;
  double f = 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    f += w[i] * s * losses[i];
    sq += w[i] * w[i];
  }
  return f + gamma * sq;
}

SelectionResult Select(const Dataset& data, std::size_t m, const ModelParams& theta_o,
                       const BloConfig& config) {
  data.Validate();
  theta_o.Validate();
  if (theta_o.input_width() != data.dim()) {
    Fail(ErrorCode::kShape, "model and dataset feature widths differ");
  }
  if (!(config.alpha > 0.0) || !(config.beta > 0.0) || !(config.gamma >= 0.0)) {
    Fail(ErrorCode::kBadSpec, "need alpha > 0, beta > 0, gamma >= 0");
  }
  const std::size_t units = UnitCount(data, config.granularity);
  if (m > units) {
    Fail(ErrorCode::kBudget, "budget " + std::to_string(m) + " exceeds " +
                                 std::to_string(units) + " selection units");
  }

  Vector w(units, units ? static_cast<double>(m) / static_cast<double>(units) : 0.0);
  if (config.weight_init == WeightInit::kRandomBinary) {
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i : RandomMask(units, m, config.rng.Derive(1)).indices) w[i] = 1.0;
  }

  const ModelParams theta_start =
      config.lower_init == LowerInit::kPretrained
          ? theta_o
          : InitParams(theta_o.LayerSizes(), config.rng.Derive(2), theta_o.activation);

  auto solve_lower = [&](const Vector& weights) {
    const Vector sample_weights = config.granularity == Granularity::kSample
                                      ? MuSampleWeights(weights)
                                      : ClassSampleWeights(weights, data);
    return LowerSignSgdWeighted(theta_start, data, sample_weights, config.beta,
                                config.inner_steps);
  };

  SelectionResult result;
  result.trajectory.reserve(config.outer_steps + 1);
  for (std::size_t t = 0;; ++t) {
    const ModelParams theta_u = solve_lower(w);
    result.trajectory.push_back(UpperObjective(w, theta_u, data, config.gamma,
                                               config.granularity, config.direction));
    if (t == config.outer_steps) break;
    const Vector g = UpperGradient(w, theta_u, data, config.gamma, config.granularity,
                                   config.direction);
    Vector step(units);
    for (std::size_t i = 0; i < units; ++i) step[i] = w[i] - config.alpha * g[i];
    w = ProjectCappedSimplex(step, m).w;
  }
  result.mask = MaskFromWeights(w, m);
  result.weights = SelectionWeights{std::move(w), m};
  return result;
}

bool IgProbe(std::span<const double> w, const ModelParams& theta_init,
             const Dataset& data, double beta, std::size_t steps, double epsilon,
             std::size_t coordinate) {
  if (coordinate >= w.size()) {
    Fail(ErrorCode::kShape, "probe coordinate outside the selection vector");
  }
  const ModelParams base = LowerSignSgd(w, theta_init, data, beta, steps);
  Vector nudged(w.begin(), w.end());
  nudged[coordinate] += epsilon;
  const ModelParams moved = LowerSignSgd(nudged, theta_init, data, beta, steps);
  return base == moved;
}

}  // namespace forgeset
