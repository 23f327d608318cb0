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

#include "forgeset/unlearn.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>

#include "forgeset/error.hpp"

namespace forgeset {

std::string_view MethodName(Method method) {
  switch (method) {
    case Method::kRetrain: return "Retrain";
    case Method::kFineTune: return "FT";
    case Method::kGradientAscent: return "GA";
    case Method::kRandomLabel: return "RL";
    case Method::kL1Sparse: return "L1Sparse";
  }
  return "?";
}

std::optional<Method> ParseMethod(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (Method m : {Method::kRetrain, Method::kFineTune, Method::kGradientAscent,
                   Method::kRandomLabel, Method::kL1Sparse}) {
    std::string candidate(MethodName(m));
    std::transform(candidate.begin(), candidate.end(), candidate.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (candidate == lower) return m;
  }
  return std::nullopt;
}

namespace {

void CheckLoss(double loss, std::size_t epoch, std::string_view what) {
  if (!std::isfinite(loss) || std::abs(loss) > kDivergenceLimit) {
    Fail(ErrorCode::kDivergence, std::string(what) + " diverged at epoch " +
                                     std::to_string(epoch) + " (loss " +
                                     FormatDouble(loss) + ")");
  }
}

void CheckShapes(const ModelParams& theta, const Dataset& data) {
  theta.Validate();
  data.Validate();
  if (theta.input_width() != data.dim()) {
    Fail(ErrorCode::kShape, "model expects " + std::to_string(theta.input_width()) +
                                " features, dataset has " + std::to_string(data.dim()));
  }
}

// Gradient of any extra penalty added on top of the data loss.
using PenaltyGrad = std::function<double(const ModelParams&, GradParams&)>;

// Plain full-batch gradient descent; out-of-scope layers are never written.
void Descend(ModelParams& theta, const Dataset& data,
             std::optional<std::span<const double>> weights, std::size_t epochs,
             double lr, ParamScope scope, std::string_view what,
             const PenaltyGrad& penalty = nullptr) {
  const std::size_t first =
      scope == ParamScope::kLastLayer ? theta.layers.size() - 1 : 0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    auto [loss, grad] = ComputeLossAndGrad(theta, data.x, data.y, weights, scope);
    double total = loss.total;
    if (penalty) total += penalty(theta, grad);
    CheckLoss(total, epoch, what);
    for (std::size_t l = first; l < theta.layers.size(); ++l) {
      auto& w = theta.layers[l].weight.data();
      const auto& gw = grad.layers[l].weight.data();
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * gw[i];
      auto& b = theta.layers[l].bias;
      const auto& gb = grad.layers[l].bias;
      for (std::size_t i = 0; i < b.size(); ++i) b[i] -= lr * gb[i];
    }
  }
}

Dataset RetainSet(const Dataset& data, const ForgetMask& mask) {
  const auto keep = Complement(mask, data.size());
  if (keep.empty()) {
    Fail(ErrorCode::kEmptyRetainSet, "forget mask covers the whole training set");
  }
  return data.Subset(keep);
}

void CheckMask(const ForgetMask& mask, std::size_t n) {
  for (std::size_t k = 0; k < mask.indices.size(); ++k) {
    if (mask.indices[k] >= n || (k > 0 && mask.indices[k] <= mask.indices[k - 1])) {
      Fail(ErrorCode::kBudget, "forget mask is not a sorted index set within [0, " +
                                   std::to_string(n) + ")");
    }
  }
}

}  // namespace

ModelParams Train(const Dataset& data, std::span<const std::size_t> sizes,
                  std::size_t epochs, double lr, RngStream rng, Activation activation) {
  ModelParams theta = InitParams(sizes, rng, activation);
  CheckShapes(theta, data);
  Descend(theta, data, std::nullopt, epochs, lr, ParamScope::kAll, "training");
  return theta;
}

Vector MuSampleWeights(std::span<const double> w) {
  Vector out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = 1.0 - 2.0 * w[i];
  return out;
}

ModelParams Retrain(const ModelParams& theta_o, const Dataset& data,
                    const ForgetMask& mask, const UnlearnConfig& config) {
  CheckShapes(theta_o, data);
  CheckMask(mask, data.size());
  const Dataset retain = RetainSet(data, mask);
  const auto sizes = theta_o.LayerSizes();
  if (config.scope == ParamScope::kAll) {
    return Train(retain, sizes, config.epochs, config.lr, config.rng,
                 theta_o.activation);
  }
  ModelParams theta = theta_o;
  const std::size_t fan_in = sizes[sizes.size() - 2];
  const std::size_t fan_out = sizes.back();
  const std::size_t last_sizes[] = {fan_in, fan_out};
  theta.layers.back() = InitParams(last_sizes, config.rng).layers.front();
  Descend(theta, retain, std::nullopt, config.epochs, config.lr, ParamScope::kLastLayer,
          "retrain");
  return theta;
}

ModelParams FineTune(const ModelParams& theta_o, const Dataset& data,
                     const ForgetMask& mask, const UnlearnConfig& config) {
  CheckShapes(theta_o, data);
  CheckMask(mask, data.size());
  ModelParams theta = theta_o;
  if (config.lambda_reg == 0.0 || mask.indices.empty()) {
    Descend(theta, RetainSet(data, mask), std::nullopt, config.epochs, config.lr,
            config.scope, "fine-tuning");
    return theta;
  }
  // mean over the whole set with these weights equals
  // mean_{D_r} CE - lambda * mean_{D_f} CE.
  const double n = static_cast<double>(data.size());
  const double n_forget = static_cast<double>(mask.size());
  const double n_retain = n - n_forget;
  if (n_retain == 0.0) {
    Fail(ErrorCode::kEmptyRetainSet, "forget mask covers the whole training set");
  }
  Vector weights(data.size(), n / n_retain);
  for (std::size_t i : mask.indices) weights[i] = -config.lambda_reg * n / n_forget;
  Descend(theta, data, weights, config.epochs, config.lr, config.scope, "fine-tuning");
  return theta;
}

ModelParams GradientAscentMu(const ModelParams& theta_o, const Dataset& data,
                             std::span<const double> w, const UnlearnConfig& config) {
  CheckShapes(theta_o, data);
  if (w.size() != data.size()) {
    Fail(ErrorCode::kShape, "selection weights length differs from dataset size");
  }
  for (double v : w) {
    if (!(v >= 0.0 && v <= 1.0)) {
      Fail(ErrorCode::kBadSpec, "selection weights must lie in [0, 1]");
    }
  }
  ModelParams theta = theta_o;
  const Vector weights = MuSampleWeights(w);
  Descend(theta, data, weights, config.epochs, config.lr, config.scope,
          "gradient ascent");
  return theta;
}

std::vector<int> RelabelForgotten(const Dataset& data, const ForgetMask& mask,
                                  RngStream rng) {
  if (data.num_classes < 2) {
    Fail(ErrorCode::kSingleClass, "random labelling needs at least two classes");
  }
  Rng gen(rng);
  std::vector<int> labels;
  labels.reserve(mask.size());
  const auto wrong = static_cast<std::uint64_t>(data.num_classes - 1);
  for (std::size_t i : mask.indices) {
    // Draw among the C-1 classes that are not the true one.
    int label = static_cast<int>(gen.Below(wrong));
    if (label >= data.y[i]) ++label;
    labels.push_back(label);
  }
  return labels;
}

ModelParams RandomLabel(const ModelParams& theta_o, const Dataset& data,
                        const ForgetMask& mask, const UnlearnConfig& config) {
  CheckShapes(theta_o, data);
  CheckMask(mask, data.size());
  const auto labels = RelabelForgotten(data, mask, config.rng);
  Dataset relabelled = data;
  for (std::size_t k = 0; k < mask.size(); ++k) relabelled.y[mask.indices[k]] = labels[k];
  ModelParams theta = theta_o;
  Descend(theta, relabelled, std::nullopt, config.epochs, config.lr, config.scope,
          "random labelling");
  return theta;
}

ModelParams L1Sparse(const ModelParams& theta_o, const Dataset& data,
                     const ForgetMask& mask, const UnlearnConfig& config) {
  CheckShapes(theta_o, data);
  CheckMask(mask, data.size());
  if (!(config.l1_coef >= 0.0)) Fail(ErrorCode::kBadSpec, "l1_coef must be >= 0");
  ModelParams theta = theta_o;
  const double coef = config.l1_coef;
  const std::size_t first =
      config.scope == ParamScope::kLastLayer ? theta.layers.size() - 1 : 0;
  PenaltyGrad penalty;
  if (coef > 0.0) {
    penalty = [coef, first](const ModelParams& p, GradParams& g) {
      double norm = 0.0;
      for (std::size_t l = first; l < p.layers.size(); ++l) {
        const auto& w = p.layers[l].weight.data();
        auto& gw = g.layers[l].weight.data();
        for (std::size_t i = 0; i < w.size(); ++i) {
          norm += std::abs(w[i]);
          gw[i] += coef * Sign(w[i]);
        }
        const auto& b = p.layers[l].bias;
        auto& gb = g.layers[l].bias;
        for (std::size_t i = 0; i < b.size(); ++i) {
          norm += std::abs(b[i]);
          gb[i] += coef * Sign(b[i]);
        }
      }
      return coef * norm;
    };
  }
  Descend(theta, RetainSet(data, mask), std::nullopt, config.epochs, config.lr,
          config.scope, "l1-sparse fine-tuning", penalty);
  return theta;
}

ModelParams Unlearn(const ModelParams& theta_o, const Dataset& data,
                    const ForgetMask& mask, const UnlearnConfig& config) {
  switch (config.method) {
    case Method::kRetrain: return Retrain(theta_o, data, mask, config);
    case Method::kFineTune: return FineTune(theta_o, data, mask, config);
    case Method::kGradientAscent: {
      CheckMask(mask, data.size());
      Vector w(data.size(), 0.0);
      for (std::size_t i : mask.indices) w[i] = 1.0;
      return GradientAscentMu(theta_o, data, w, config);
    }
    case Method::kRandomLabel: return RandomLabel(theta_o, data, mask, config);
    case Method::kL1Sparse: return L1Sparse(theta_o, data, mask, config);
  }
  Fail(ErrorCode::kBadSpec, "unknown unlearning method");
}

}  // namespace forgeset
