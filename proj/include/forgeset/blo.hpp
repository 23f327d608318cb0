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

// Bi-level forget-set selection.
//
// The upper level chooses relaxed selection weights w over the capped simplex
// {w in [0,1]^N, sum(w) = m} to minimise
//
//   f(w, theta_u) = sum_i w_i * s * CE(theta_u; z_i) + gamma * ||w||^2
//
// where s = +1 searches for the worst-case (hardest to forget) set and s = -1
// for the easiest one. The lower level produces theta_u(w) by K full-batch
// sign-gradient steps on mean_i (1 - 2 w_i) CE(theta; z_i), i.e. fine-tuning
// on the retained points while ascending on the forgotten ones.
//
// Because every lower step moves parameters by beta * sign(grad), theta_u is
// piecewise constant in w and its derivative with respect to w vanishes
// wherever no gradient component changes sign. The upper gradient therefore
// reduces to the partial derivative of f in w with theta_u held fixed, and
// the whole method needs only first-order information: alternate K sign
// steps with one projected gradient step on w.

#ifndef FORGESET_BLO_HPP_
#define FORGESET_BLO_HPP_

#include <cstddef>
#include <span>
#include <string_view>

#include "forgeset/data.hpp"
#include "forgeset/models.hpp"
#include "forgeset/numcore.hpp"
#include "forgeset/projection.hpp"

namespace forgeset {

enum class Granularity { kSample, kClass };
enum class Direction { kWorst, kEasiest };
// Starting point of every lower-level solve.
enum class LowerInit { kPretrained, kRandom };
// Starting selection weights.
enum class WeightInit { kUniform, kRandomBinary };

std::string_view GranularityName(Granularity g);
std::string_view DirectionName(Direction d);
std::string_view LowerInitName(LowerInit i);
std::string_view WeightInitName(WeightInit i);

struct BloConfig {
  double gamma = 1e-4;
  double alpha = 1e-3;
  double beta = 0.01;
  std::size_t inner_steps = 10;   // K
  std::size_t outer_steps = 20;   // T
  Granularity granularity = Granularity::kSample;
  Direction direction = Direction::kWorst;
  LowerInit lower_init = LowerInit::kPretrained;
  WeightInit weight_init = WeightInit::kUniform;
  RngStream rng;
};

struct SelectionResult {
  SelectionWeights weights;
  // Over samples for kSample, over classes for kClass.
  ForgetMask mask;
  // Upper objective f(w_t, theta_u(w_t)) for t = 0..T.
  Vector trajectory;
};

// theta <- theta - beta * sign(grad), restricted to layers at or after
// `first_layer`.
void SignSgdStep(ModelParams& theta, const GradParams& grad, double beta,
                 std::size_t first_layer = 0);
void SignSgdStep(std::span<double> theta, std::span<const double> grad, double beta);

// K sign-gradient steps on mean_i sample_weights[i] * CE_i from theta_init.
ModelParams LowerSignSgdWeighted(const ModelParams& theta_init, const Dataset& data,
                                 std::span<const double> sample_weights, double beta,
                                 std::size_t steps);

// K sign-gradient steps on loss_scale * mean_i (1 - 2 w_i) CE_i. Throws
// kDivergence on a non-finite or runaway loss.
ModelParams LowerSignSgd(std::span<const double> w, const ModelParams& theta_init,
                         const Dataset& data, double beta, std::size_t steps,
                         double loss_scale = 1.0);

// Per-sample lower-level weights induced by class weights:
// (1 - 2 w_c) * N / |D_c|, so the batch mean equals
// sum_c (1 - 2 w_c) * mean_{D_c} CE.
Vector ClassSampleWeights(std::span<const double> class_w, const Dataset& data);

// Mean CE per class (0 for classes without samples).
Vector ClassMeanLoss(std::span<const double> per_sample, const Dataset& data);

// Loss term per selection unit: per-sample CE, or per-class mean CE.
Vector UnitLosses(const ModelParams& theta_u, const Dataset& data,
                  Granularity granularity);

// Partial derivative of f in w with theta_u fixed:
// s * loss_unit + 2 * gamma * w_unit.
Vector UpperGradient(std::span<const double> w, const ModelParams& theta_u,
                     const Dataset& data, double gamma,
                     Granularity granularity = Granularity::kSample,
                     Direction direction = Direction::kWorst);

// f(w, theta_u).
double UpperObjective(std::span<const double> w, const ModelParams& theta_u,
                      const Dataset& data, double gamma,
                      Granularity granularity = Granularity::kSample,
                      Direction direction = Direction::kWorst);

// Alternating projected gradient descent on w and sign-SGD on theta.
SelectionResult Select(const Dataset& data, std::size_t m, const ModelParams& theta_o,
                       const BloConfig& config);

// True iff nudging w[coordinate] by epsilon leaves the K-step sign-SGD
// solution bit-identical, the empirical witness that the implicit gradient is
// zero at w.
bool IgProbe(std::span<const double> w, const ModelParams& theta_init,
             const Dataset& data, double beta, std::size_t steps, double epsilon,
             std::size_t coordinate = 0);

}  // namespace forgeset

#endif  // FORGESET_BLO_HPP_
