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

#ifndef FORGESET_UNLEARN_HPP_
#define FORGESET_UNLEARN_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forgeset/data.hpp"
#include "forgeset/models.hpp"
#include "forgeset/numcore.hpp"

namespace forgeset {

// Losses beyond this magnitude (or non-finite) abort a run with kDivergence.
inline constexpr double kDivergenceLimit = 1e6;

enum class Method { kRetrain, kFineTune, kGradientAscent, kRandomLabel, kL1Sparse };

std::string_view MethodName(Method method);
// Accepts the names produced by MethodName (case-insensitive).
std::optional<Method> ParseMethod(std::string_view name);

struct UnlearnConfig {
  Method method = Method::kFineTune;
  // Weight on the forget-set term of retain_loss + lambda * forget_loss with
  // forget_loss = -CE. Only FT reads it; 0 means plain retain fine-tuning.
  double lambda_reg = 0.0;
  double lr = 0.1;
  std::size_t epochs = 10;
  // L1Sparse only.
  double l1_coef = 0.0;
  ParamScope scope = ParamScope::kAll;
  RngStream rng;
};

// Full-batch gradient descent on the mean cross-entropy from a fresh
// InitParams(sizes, rng). Deterministic per rng.
ModelParams Train(const Dataset& data, std::span<const std::size_t> sizes,
                  std::size_t epochs, double lr, RngStream rng,
                  Activation activation = Activation::kReLU);

// Per-sample weight (1 - 2 w_i): +1 on retained points, -1 on forgotten ones
// when w is binary.
Vector MuSampleWeights(std::span<const double> w);

// Exact unlearning: Train on the retain set with theta_o's architecture and a
// fresh init from config.rng. With kLastLayer only the last layer is
// re-initialised and trained; the rest stays at theta_o.
ModelParams Retrain(const ModelParams& theta_o, const Dataset& data,
                    const ForgetMask& mask, const UnlearnConfig& config);

// config.epochs of full-batch descent from theta_o on
// mean_{D_r} CE + lambda_reg * mean_{D_f} (-CE).
ModelParams FineTune(const ModelParams& theta_o, const Dataset& data,
                     const ForgetMask& mask, const UnlearnConfig& config);

// Descends mean_i (1 - 2 w_i) CE_i from theta_o.
ModelParams GradientAscentMu(const ModelParams& theta_o, const Dataset& data,
                             std::span<const double> w, const UnlearnConfig& config);

// Each forgotten sample receives a uniformly drawn wrong label (drawn once),
// then FT on the whole relabelled training set.
ModelParams RandomLabel(const ModelParams& theta_o, const Dataset& data,
                        const ForgetMask& mask, const UnlearnConfig& config);

// FT on the retain set with an added l1_coef * ||theta||_1 penalty.
ModelParams L1Sparse(const ModelParams& theta_o, const Dataset& data,
                     const ForgetMask& mask, const UnlearnConfig& config);

// Dispatches on config.method; kGradientAscent uses the mask indicator as w.
ModelParams Unlearn(const ModelParams& theta_o, const Dataset& data,
                    const ForgetMask& mask, const UnlearnConfig& config);

// Forgotten labels as RandomLabel assigns them, in mask order.
std::vector<int> RelabelForgotten(const Dataset& data, const ForgetMask& mask,
                                  RngStream rng);

}  // namespace forgeset

#endif  // FORGESET_UNLEARN_HPP_
