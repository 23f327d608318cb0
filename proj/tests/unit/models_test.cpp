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

#include "forgeset/models.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "test_util.hpp"

namespace forgeset {
namespace {

Matrix RandomMatrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.data()) v = rng.Normal();
  return m;
}

std::vector<int> RandomLabels(std::size_t n, std::size_t classes, Rng& rng) {
  std::vector<int> y(n);
  for (int& v : y) v = static_cast<int>(rng.Below(classes));
  return y;
}

ModelParams RandomModel(std::vector<std::size_t> sizes, Rng& rng, Activation act) {
  ModelParams p = InitParams(sizes, {rng.NextU64(), 0}, act);
  for (auto& layer : p.layers) {
    for (double& b : layer.bias) b = 0.3 * rng.Normal();
  }
  return p;
}

// Independent mean weighted cross-entropy, layer by layer.
double ReferenceLoss(const ModelParams& p, const Matrix& x, const std::vector<int>& y,
                     const std::vector<double>* w) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::vector<double> h(x.row(i).begin(), x.row(i).end());
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
      const auto& layer = p.layers[l];
      std::vector<double> out(layer.weight.cols());
      for (std::size_t j = 0; j < out.size(); ++j) {
        double s = layer.bias[j];
        for (std::size_t k = 0; k < h.size(); ++k) s += h[k] * layer.weight(k, j);
        const bool hidden = l + 1 < p.layers.size();
        out[j] = hidden && p.activation == Activation::kReLU ? std::max(s, 0.0) : s;
      }
      h = out;
    }
    double mx = h[0];
    for (double v : h) mx = std::max(mx, v);
    double z = 0.0;
    for (double v : h) z += std::exp(v - mx);
    const double ce = std::log(z) + mx - h[static_cast<std::size_t>(y[i])];
    total += (w ? (*w)[i] : 1.0) * ce;
  }
  return total / static_cast<double>(x.rows());
}

TEST(InitParams, DeterministicWithZeroBias) {
  const std::vector<std::size_t> sizes = {2, 3};
  const auto a = InitParams(sizes, {4, 1});
  const auto b = InitParams(sizes, {4, 1});
  EXPECT_EQ(a, b);
  for (double v : a.layers[0].bias) EXPECT_EQ(v, 0.0);
  EXPECT_NE(a, InitParams(sizes, {5, 1}));
}

TEST(InitParams, GlorotBound) {
  const std::vector<std::size_t> sizes = {4, 8, 3};
  const auto p = InitParams(sizes, {11, 0});
  for (std::size_t l = 0; l < 2; ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(sizes[l] + sizes[l + 1]));
    EXPECT_DOUBLE_EQ(GlorotBound(sizes[l], sizes[l + 1]), bound);
    for (double v : p.layers[l].weight.data()) EXPECT_LE(std::abs(v), bound);
  }
  EXPECT_EQ(p.LayerSizes(), sizes);
  EXPECT_EQ(p.ParameterCount(), 4u * 8 + 8 + 8 * 3 + 3);
}

TEST(InitParams, RejectsShortSpec) {
  EXPECT_FS_ERROR(InitParams(std::vector<std::size_t>{3}, {1, 0}), ErrorCode::kBadSpec);
}

TEST(Forward, ZeroModelGivesZeroLogits) {
  ModelParams p = ZerosLike(InitParams(std::vector<std::size_t>{3, 4, 2}, {1, 0}));
  Rng rng({1, 2});
  const Matrix logits = Forward(p, RandomMatrix(5, 3, rng));
  for (double v : logits.data()) EXPECT_EQ(v, 0.0);
}

TEST(Forward, IdentityLayer) {
  ModelParams p = InitParams(std::vector<std::size_t>{3, 3}, {1, 0});
  p.layers[0].weight = Matrix(3, 3);
  for (std::size_t i = 0; i < 3; ++i) p.layers[0].weight(i, i) = 1.0;
  Rng rng({1, 3});
  const Matrix x = RandomMatrix(4, 3, rng);
  EXPECT_EQ(Forward(p, x), x);
}

TEST(Forward, MatchesHandComputation) {
  Rng rng({2, 0});
  const ModelParams p = RandomModel({3, 4, 2}, rng, Activation::kReLU);
  const Matrix x = RandomMatrix(3, 3, rng);
  const Matrix logits = Forward(p, x);
  for (std::size_t i = 0; i < 3; ++i) {
    double hidden[4];
    for (std::size_t j = 0; j < 4; ++j) {
      double s = p.layers[0].bias[j];
      for (std::size_t k = 0; k < 3; ++k) s += x(i, k) * p.layers[0].weight(k, j);
      hidden[j] = s > 0 ? s : 0;
    }
    for (std::size_t c = 0; c < 2; ++c) {
      double s = p.layers[1].bias[c];
      for (std::size_t j = 0; j < 4; ++j) s += hidden[j] * p.layers[1].weight(j, c);
      EXPECT_NEAR(logits(i, c), s, 1e-12);
    }
  }
}

TEST(Softmax, RowsSumToOneAndSurviveLargeLogits) {
  Matrix logits(2, 3);
  logits(0, 0) = 1000;
  logits(0, 1) = 999;
  logits(0, 2) = -1000;
  logits(1, 0) = -5;
  const Matrix p = Softmax(logits);
  for (std::size_t r = 0; r < 2; ++r) {
    double s = 0.0;
    for (double v : p.row(r)) {
      EXPECT_TRUE(std::isfinite(v));
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-15);
  }
  EXPECT_NEAR(p(0, 0), 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
}

TEST(Loss, UniformLogitsGiveLogC) {
  const std::size_t c = 5;
  ModelParams p = ZerosLike(InitParams(std::vector<std::size_t>{2, c}, {1, 0}));
  Rng rng({3, 0});
  const Matrix x = RandomMatrix(6, 2, rng);
  const auto y = RandomLabels(6, c, rng);
  for (double l : PerSampleLoss(p, x, y)) EXPECT_NEAR(l, std::log(5.0), 1e-14);
}

TEST(Loss, ZeroWeightsGiveZeroLossAndGrad) {
  Rng rng({4, 0});
  const ModelParams p = RandomModel({3, 5, 3}, rng, Activation::kReLU);
  const Matrix x = RandomMatrix(6, 3, rng);
  const auto y = RandomLabels(6, 3, rng);
  const std::vector<double> w(6, 0.0);
  const auto [loss, grad] = ComputeLossAndGrad(p, x, y, w);
  EXPECT_EQ(loss.total, 0.0);
  for (const auto& layer : grad.layers) {
    for (double v : layer.weight.data()) EXPECT_EQ(v, 0.0);
    for (double v : layer.bias) EXPECT_EQ(v, 0.0);
  }
}

TEST(Loss, MatchesReference) {
  Rng rng({5, 0});
  const ModelParams p = RandomModel({3, 4, 3}, rng, Activation::kReLU);
  const Matrix x = RandomMatrix(7, 3, rng);
  const auto y = RandomLabels(7, 3, rng);
  std::vector<double> w(7);
  for (double& v : w) v = rng.Uniform(-1, 1);
  const auto lg = ComputeLossAndGrad(p, x, y, w);
  EXPECT_NEAR(lg.loss.total, ReferenceLoss(p, x, y, &w), 1e-12);
  double mean = 0.0;
  for (double v : lg.loss.per_sample) mean += v;
  EXPECT_NEAR(mean / 7.0, lg.loss.total, 1e-14);
}

// Central differences with step 1e-6 against the analytic gradient.
void CheckGradient(Activation act, std::uint64_t seed, bool weighted) {
  Rng rng({seed, 7});
  const ModelParams p = RandomModel({3, 4, 3}, rng, act);
  const Matrix x = RandomMatrix(5, 3, rng);
  const auto y = RandomLabels(5, 3, rng);
  std::vector<double> w(5);
  for (double& v : w) v = rng.Uniform(-1, 2);
  const auto* wp = weighted ? &w : nullptr;
  const auto lg = weighted ? ComputeLossAndGrad(p, x, y, w)
                           : ComputeLossAndGrad(p, x, y, std::nullopt);
  const double h = 1e-6;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto probe = [&](auto get) {
      ModelParams plus = p, minus = p;
      get(plus) += h;
      get(minus) -= h;
      return (ReferenceLoss(plus, x, y, wp) - ReferenceLoss(minus, x, y, wp)) / (2 * h);
    };
    for (std::size_t k = 0; k < p.layers[l].weight.size(); ++k) {
      const double fd = probe([&](ModelParams& q) -> double& { return q.layers[l].weight.data()[k]; });
      const double g = lg.grad.layers[l].weight.data()[k];
      EXPECT_LE(std::abs(fd - g), std::max(1e-5 * std::abs(g), 1e-7)) << "layer " << l << " w" << k;
    }
    for (std::size_t k = 0; k < p.layers[l].bias.size(); ++k) {
      const double fd = probe([&](ModelParams& q) -> double& { return q.layers[l].bias[k]; });
      const double g = lg.grad.layers[l].bias[k];
      EXPECT_LE(std::abs(fd - g), std::max(1e-5 * std::abs(g), 1e-7)) << "layer " << l << " b" << k;
    }
  }
}

TEST(Gradient, FiniteDifferenceRelu) {
  for (std::uint64_t s = 0; s < 10; ++s) CheckGradient(Activation::kReLU, s, false);
}

TEST(Gradient, FiniteDifferenceIdentityWeighted) {
  for (std::uint64_t s = 0; s < 10; ++s) CheckGradient(Activation::kIdentity, s, true);
}

TEST(Gradient, WeightLinearity) {
  Rng rng({6, 0});
  for (int rep = 0; rep < 20; ++rep) {
    const ModelParams p = RandomModel({2, 3, 3}, rng, Activation::kReLU);
    const Matrix x = RandomMatrix(6, 2, rng);
    const auto y = RandomLabels(6, 3, rng);
    std::vector<double> w1(6), w2(6), w12(6);
    for (std::size_t i = 0; i < 6; ++i) {
      w1[i] = rng.Uniform(-1, 1);
      w2[i] = rng.Uniform(-1, 1);
      w12[i] = w1[i] + w2[i];
    }
    const auto a = ComputeLossAndGrad(p, x, y, w1);
    const auto b = ComputeLossAndGrad(p, x, y, w2);
    const auto c = ComputeLossAndGrad(p, x, y, w12);
    EXPECT_NEAR(c.loss.total, a.loss.total + b.loss.total, 1e-10);
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
      for (std::size_t k = 0; k < p.layers[l].weight.size(); ++k) {
        EXPECT_NEAR(c.grad.layers[l].weight.data()[k],
                    a.grad.layers[l].weight.data()[k] + b.grad.layers[l].weight.data()[k],
                    1e-10);
      }
      for (std::size_t k = 0; k < p.layers[l].bias.size(); ++k) {
        EXPECT_NEAR(c.grad.layers[l].bias[k],
                    a.grad.layers[l].bias[k] + b.grad.layers[l].bias[k], 1e-10);
      }
    }
  }
}

TEST(Gradient, LastLayerScopeZeroesEarlierBlocks) {
  Rng rng({7, 0});
  const ModelParams p = RandomModel({3, 4, 2}, rng, Activation::kReLU);
  const Matrix x = RandomMatrix(5, 3, rng);
  const auto y = RandomLabels(5, 2, rng);
  const auto full = ComputeLossAndGrad(p, x, y, std::nullopt, ParamScope::kAll);
  const auto last = ComputeLossAndGrad(p, x, y, std::nullopt, ParamScope::kLastLayer);
  for (double v : last.grad.layers[0].weight.data()) EXPECT_EQ(v, 0.0);
  for (double v : last.grad.layers[0].bias) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(last.grad.layers[1], full.grad.layers[1]);
  EXPECT_EQ(last.loss.total, full.loss.total);
}

TEST(Gradient, Errors) {
  Rng rng({8, 0});
  const ModelParams p = RandomModel({2, 2}, rng, Activation::kReLU);
  EXPECT_FS_ERROR(ComputeLossAndGrad(p, Matrix(0, 2), std::vector<int>{}, std::nullopt),
                  ErrorCode::kEmptyBatch);
  EXPECT_FS_ERROR(ComputeLossAndGrad(p, Matrix(1, 3), std::vector<int>{0}, std::nullopt),
                  ErrorCode::kShape);
  EXPECT_FS_ERROR(ComputeLossAndGrad(p, Matrix(1, 2), std::vector<int>{2}, std::nullopt),
                  ErrorCode::kLabelOutOfRange);
}

TEST(Predict, TiesGoToLowestClass) {
  ModelParams p = ZerosLike(InitParams(std::vector<std::size_t>{2, 3}, {1, 0}));
  p.layers[0].bias = {0.5, 1.0, 1.0};
  const auto pred = Predict(p, Matrix(2, 2));
  EXPECT_EQ(pred, (std::vector<int>{1, 1}));
}

TEST(Checkpoint, RoundTripsBitExactly) {
  Rng rng({9, 0});
  for (Activation act : {Activation::kReLU, Activation::kIdentity}) {
    const ModelParams p = RandomModel({3, 5, 4}, rng, act);
    const ModelParams back = CheckpointFromString(CheckpointToString(p));
    EXPECT_EQ(back, p);
  }
  testing::TempDir dir("ckpt");
  const ModelParams p = RandomModel({2, 2}, rng, Activation::kReLU);
  SaveCheckpoint(p, dir / "m.ckpt");
  EXPECT_EQ(LoadCheckpoint(dir / "m.ckpt"), p);
}

TEST(Checkpoint, Errors) {
  EXPECT_FS_ERROR(CheckpointFromString("not-a-model 1\n"), ErrorCode::kParse);
  EXPECT_FS_ERROR(CheckpointFromString("forgeset-model 1\nactivation relu\nlayers 1\n"
                                       "layer 1 1\nzz\n0\n"),
                  ErrorCode::kParse);
  EXPECT_FS_ERROR(LoadCheckpoint("/nonexistent/dir/m.ckpt"), ErrorCode::kFile);
}

TEST(Params, AddScaledAndL1) {
  Rng rng({10, 0});
  ModelParams p = RandomModel({2, 3}, rng, Activation::kReLU);
  const ModelParams q = p;
  AddScaled(p, q, -1.0);
  EXPECT_EQ(L1Norm(p), 0.0);
  double l1 = 0.0;
  ModelParams r = q;
  ForEachParam(r, [&](std::size_t, double& v) { l1 += std::abs(v); });
  EXPECT_DOUBLE_EQ(L1Norm(q), l1);
}

}  // namespace
}  // namespace forgeset
