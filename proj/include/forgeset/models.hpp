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

#ifndef FORGESET_MODELS_HPP_
#define FORGESET_MODELS_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forgeset/numcore.hpp"

namespace forgeset {

enum class Activation { kReLU, kIdentity };

// Which parameters a gradient (and therefore an update) may touch.
enum class ParamScope { kAll, kLastLayer };

// Dense layer computing x * weight + bias, weight is (fan_in x fan_out).
struct Layer {
  Matrix weight;
  Vector bias;

  friend bool operator==(const Layer&, const Layer&) = default;
};

// A stack of dense layers. Hidden layers use `activation`; the last layer is
// always linear and produces class logits.
struct ModelParams {
  std::vector<Layer> layers;
  Activation activation = Activation::kReLU;

  std::size_t input_width() const { return layers.front().weight.rows(); }
  std::size_t num_classes() const { return layers.back().weight.cols(); }
  std::vector<std::size_t> LayerSizes() const;
  std::size_t ParameterCount() const;

  // Throws kBadSpec if the layer shapes do not chain or any entry is
  // non-finite.
  void Validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Gradients share the parameter layout.
using GradParams = ModelParams;

// Zero-valued parameters with the same shapes as `like`.
ModelParams ZerosLike(const ModelParams& like);

// params += scale * delta, block by block.
void AddScaled(ModelParams& params, const ModelParams& delta, double scale);

// Visits every scalar parameter of each layer: weights then bias.
template <typename Fn>
void ForEachParam(ModelParams& params, Fn&& fn) {
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    for (double& v : params.layers[l].weight.data()) fn(l, v);
    for (double& v : params.layers[l].bias) fn(l, v);
  }
}

double L1Norm(const ModelParams& params);

struct LossValue {
  double total = 0.0;
  Vector per_sample;  // weight_i * CE_i, so total == mean(per_sample)
};

// Glorot-uniform weights, zero biases. `sizes` lists input width, hidden
// widths, class count.
ModelParams InitParams(std::span<const std::size_t> sizes, RngStream rng,
                       Activation activation = Activation::kReLU);

// Glorot bound sqrt(6 / (fan_in + fan_out)).
double GlorotBound(std::size_t fan_in, std::size_t fan_out);

Matrix Forward(const ModelParams& params, const Matrix& x);

// Row-wise softmax with max subtraction.
Matrix Softmax(const Matrix& logits);

// Per-sample cross-entropy for the given labels.
Vector PerSampleLoss(const ModelParams& params, const Matrix& x,
                     std::span<const int> y);

// total = mean_i weight_i * CE_i (weight defaults to 1); the gradient is
// exact for `total`. With kLastLayer every non-final block of the gradient is
// zero. Weights may be negative.
struct LossAndGrad {
  LossValue loss;
  GradParams grad;
};
LossAndGrad ComputeLossAndGrad(const ModelParams& params, const Matrix& x,
                               std::span<const int> y,
                               std::optional<std::span<const double>> weights,
                               ParamScope scope = ParamScope::kAll);

// Argmax class per row, ties to the lowest index.
std::vector<int> Predict(const ModelParams& params, const Matrix& x);

// Checkpoint text format:
//
//   forgeset-model 1
//   activation relu|identity
//   layers <L>
//   layer <fan_in> <fan_out>
//   <fan_in lines of fan_out weights>
//   <one line of fan_out biases>
//   ...            (repeated per layer)
//
// Values are written in shortest round-trip decimal form, so load(save(p))
// reproduces p bit for bit.
void SaveCheckpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams LoadCheckpoint(const std::filesystem::path& path);
std::string CheckpointToString(const ModelParams& params);
ModelParams CheckpointFromString(const std::string& text);

}  // namespace forgeset

#endif  // FORGESET_MODELS_HPP_
