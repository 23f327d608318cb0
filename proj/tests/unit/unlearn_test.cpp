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

#include <gtest/gtest.h>

#include <cmath>

#include "forgeset/metrics.hpp"
#include "test_util.hpp"

namespace forgeset {
namespace {

class UnlearnTest : public ::testing::Test {
 protected:
  void SetUp() override {
    data_ = GenBlobs(30, 3, 2, 0.8, {21, 1});
    sizes_ = {2, 6, 3};
    theta_o_ = Train(data_, sizes_, 150, 0.3, {21, 2});
    mask_ = RandomMask(data_.size(), 9, {21, 3});
    config_.lr = 0.1;
    config_.epochs = 10;
    config_.rng = {21, 4};
  }

  Dataset data_;
  std::vector<std::size_t> sizes_;
  ModelParams theta_o_;
  ForgetMask mask_;
  UnlearnConfig config_;
};

TEST_F(UnlearnTest, TrainZeroEpochsIsInit) {
  EXPECT_EQ(Train(data_, sizes_, 0, 0.3, {1, 1}), InitParams(sizes_, {1, 1}));
}

TEST_F(UnlearnTest, TrainIsDeterministicAndLearns) {
  EXPECT_EQ(Train(data_, sizes_, 150, 0.3, {21, 2}), theta_o_);
  const Dataset easy = GenBlobs(40, 2, 2, 0.3, {5, 5});
  const std::vector<std::size_t> lin = {2, 2};
  EXPECT_GT(Accuracy(Train(easy, lin, 200, 0.5, {5, 6}), easy.x, easy.y), 95.0);
}

TEST_F(UnlearnTest, RetrainEmptyMaskEqualsTrain) {
  config_.epochs = 40;
  config_.lr = 0.3;
  const ModelParams r = Retrain(theta_o_, data_, ForgetMask{}, config_);
  EXPECT_EQ(r, Train(data_, sizes_, 40, 0.3, config_.rng));
}

TEST_F(UnlearnTest, RetrainWithoutClassForgetsIt) {
  ForgetMask all_of_two;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (data_.y[i] == 2) all_of_two.indices.push_back(i);
  }
  config_.epochs = 150;
  config_.lr = 0.3;
  const ModelParams r = Retrain(theta_o_, data_, all_of_two, config_);
  const Dataset forget = data_.Subset(all_of_two.indices);
  EXPECT_LT(Accuracy(r, forget.x, forget.y), 100.0 / 3.0 + 10.0);
}

TEST_F(UnlearnTest, LastLayerRetrainKeepsHiddenLayers) {
  config_.scope = ParamScope::kLastLayer;
  for (const ForgetMask& m : {ForgetMask{}, mask_}) {
    const ModelParams r = Retrain(theta_o_, data_, m, config_);
    EXPECT_EQ(r.layers[0], theta_o_.layers[0]);
    EXPECT_NE(r.layers[1], theta_o_.layers[1]);
  }
}

TEST_F(UnlearnTest, RetrainErrors) {
  ForgetMask everything;
  for (std::size_t i = 0; i < data_.size(); ++i) everything.indices.push_back(i);
  EXPECT_FS_ERROR(Retrain(theta_o_, data_, everything, config_), ErrorCode::kEmptyRetainSet);
  EXPECT_FS_ERROR(Retrain(theta_o_, data_, ForgetMask{{3, 1}}, config_), ErrorCode::kBudget);
  EXPECT_FS_ERROR(Retrain(theta_o_, data_, ForgetMask{{1000}}, config_), ErrorCode::kBudget);
}

TEST_F(UnlearnTest, FineTuneNoOps) {
  config_.epochs = 0;
  EXPECT_EQ(FineTune(theta_o_, data_, mask_, config_), theta_o_);
  EXPECT_EQ(RandomLabel(theta_o_, data_, mask_, config_), theta_o_);
  EXPECT_EQ(L1Sparse(theta_o_, data_, mask_, config_), theta_o_);
  config_.epochs = 10;
  config_.lr = 0.0;
  EXPECT_EQ(FineTune(theta_o_, data_, mask_, config_), theta_o_);
}

TEST_F(UnlearnTest, FineTuneKeepsRetainAccuracy) {
  const Dataset retain = data_.Subset(Complement(mask_, data_.size()));
  const ModelParams u = FineTune(theta_o_, data_, mask_, config_);
  EXPECT_GE(Accuracy(u, retain.x, retain.y), Accuracy(theta_o_, retain.x, retain.y));
}

TEST_F(UnlearnTest, FineTuneLambdaMatchesWeightedObjective) {
  // One step from theta_o equals one step on the objective computed by hand:
  // mean over D_r of CE minus lambda times mean over D_f of CE.
  config_.epochs = 1;
  config_.lambda_reg = 0.5;
  const ModelParams u = FineTune(theta_o_, data_, mask_, config_);
  const Dataset forget = data_.Subset(mask_.indices);
  const Dataset retain = data_.Subset(Complement(mask_, data_.size()));
  const auto gr = ComputeLossAndGrad(theta_o_, retain.x, retain.y, std::nullopt).grad;
  const auto gf = ComputeLossAndGrad(theta_o_, forget.x, forget.y, std::nullopt).grad;
  ModelParams expect = theta_o_;
  AddScaled(expect, gr, -config_.lr);
  AddScaled(expect, gf, config_.lr * config_.lambda_reg);
  for (std::size_t l = 0; l < u.layers.size(); ++l) {
    for (std::size_t k = 0; k < u.layers[l].weight.size(); ++k) {
      EXPECT_NEAR(u.layers[l].weight.data()[k], expect.layers[l].weight.data()[k], 1e-12);
    }
  }
}

TEST_F(UnlearnTest, GradientAscentSpecialWeights) {
  const std::vector<double> zeros(data_.size(), 0.0);
  const std::vector<double> halves(data_.size(), 0.5);
  const ModelParams ga0 = GradientAscentMu(theta_o_, data_, zeros, config_);
  const ModelParams ft = FineTune(theta_o_, data_, ForgetMask{}, config_);
  for (std::size_t l = 0; l < ga0.layers.size(); ++l) {
    for (std::size_t k = 0; k < ga0.layers[l].weight.size(); ++k) {
      EXPECT_NEAR(ga0.layers[l].weight.data()[k], ft.layers[l].weight.data()[k], 1e-13);
    }
  }
  EXPECT_EQ(GradientAscentMu(theta_o_, data_, halves, config_), theta_o_);
  std::vector<double> bad(data_.size(), 0.0);
  bad[0] = 1.5;
  EXPECT_FS_ERROR(GradientAscentMu(theta_o_, data_, bad, config_), ErrorCode::kBadSpec);
}

TEST_F(UnlearnTest, GradientAscentBinaryWeightsAreSignedRetainForget) {
  // The first step of GA with binary w matches a hand-coded (+1 retain, -1
  // forget) mean objective.
  config_.epochs = 1;
  std::vector<double> w(data_.size(), 0.0);
  for (std::size_t i : mask_.indices) w[i] = 1.0;
  const ModelParams u = GradientAscentMu(theta_o_, data_, w, config_);
  const double n = static_cast<double>(data_.size());
  const Dataset forget = data_.Subset(mask_.indices);
  const Dataset retain = data_.Subset(Complement(mask_, data_.size()));
  const auto gr = ComputeLossAndGrad(theta_o_, retain.x, retain.y, std::nullopt).grad;
  const auto gf = ComputeLossAndGrad(theta_o_, forget.x, forget.y, std::nullopt).grad;
  ModelParams expect = theta_o_;
  AddScaled(expect, gr, -config_.lr * static_cast<double>(retain.size()) / n);
  AddScaled(expect, gf, config_.lr * static_cast<double>(forget.size()) / n);
  for (std::size_t l = 0; l < u.layers.size(); ++l) {
    for (std::size_t k = 0; k < u.layers[l].bias.size(); ++k) {
      EXPECT_NEAR(u.layers[l].bias[k], expect.layers[l].bias[k], 1e-12);
    }
  }
  EXPECT_EQ(Unlearn(theta_o_, data_, mask_,
                    UnlearnConfig{Method::kGradientAscent, 0, 0.1, 1, 0, ParamScope::kAll, {}}),
            u);
}

TEST_F(UnlearnTest, GradientAscentRaisesForgetLoss) {
  // Mislabelled points act as outliers.
  Dataset d = GenBlobs(30, 2, 2, 0.5, {9, 9});
  for (std::size_t i = 0; i < 4; ++i) d.y[i] = 1 - d.y[i];
  const std::vector<std::size_t> lin = {2, 2};
  const ModelParams theta = Train(d, lin, 100, 0.5, {9, 10});
  const ForgetMask forget_mask{{0, 1, 2, 3}};
  std::vector<double> w(d.size(), 0.0);
  for (std::size_t i : forget_mask.indices) w[i] = 1.0;
  const Dataset forget = d.Subset(forget_mask.indices);
  UnlearnConfig c;
  c.lr = 0.5;
  double prev = Mean(PerSampleLoss(theta, forget.x, forget.y));
  for (std::size_t e = 1; e <= 3; ++e) {
    c.epochs = e;
    const double now =
        Mean(PerSampleLoss(GradientAscentMu(theta, d, w, c), forget.x, forget.y));
    EXPECT_GT(now, prev);
    prev = now;
  }
}

TEST_F(UnlearnTest, DivergenceIsDetected) {
  std::vector<double> w(data_.size(), 1.0);
  config_.lr = 1e6;
  config_.epochs = 50;
  EXPECT_FS_ERROR(GradientAscentMu(theta_o_, data_, w, config_), ErrorCode::kDivergence);
}

TEST_F(UnlearnTest, RandomLabelDrawsWrongClasses) {
  const auto labels = RelabelForgotten(data_, mask_, {3, 3});
  ASSERT_EQ(labels.size(), mask_.size());
  for (std::size_t k = 0; k < labels.size(); ++k) {
    EXPECT_NE(labels[k], data_.y[mask_.indices[k]]);
    EXPECT_GE(labels[k], 0);
    EXPECT_LT(labels[k], 3);
  }
  EXPECT_EQ(labels, RelabelForgotten(data_, mask_, {3, 3}));
  const Dataset binary = GenBlobs(10, 2, 2, 1.0, {1, 1});
  const ForgetMask m{{0, 1, 2, 3}};
  const auto flipped = RelabelForgotten(binary, m, {4, 4});
  for (std::size_t k = 0; k < m.size(); ++k) EXPECT_EQ(flipped[k], 1 - binary.y[k]);
  Dataset single = binary;
  single.num_classes = 1;
  std::fill(single.y.begin(), single.y.end(), 0);
  EXPECT_FS_ERROR(RelabelForgotten(single, m, {4, 4}), ErrorCode::kSingleClass);
}

TEST_F(UnlearnTest, RandomLabelFineTunesOnRelabelledData) {
  const auto labels = RelabelForgotten(data_, mask_, config_.rng);
  Dataset relabelled = data_;
  for (std::size_t k = 0; k < mask_.size(); ++k) relabelled.y[mask_.indices[k]] = labels[k];
  EXPECT_EQ(RandomLabel(theta_o_, data_, mask_, config_),
            FineTune(theta_o_, relabelled, ForgetMask{}, config_));
}

TEST_F(UnlearnTest, RandomLabelLowersForgetConfidence) {
  config_.epochs = 60;
  config_.lr = 0.3;
  const ModelParams u = RandomLabel(theta_o_, data_, mask_, config_);
  const Dataset forget = data_.Subset(mask_.indices);
  EXPECT_GT(Mean(PerSampleLoss(u, forget.x, forget.y)),
            Mean(PerSampleLoss(theta_o_, forget.x, forget.y)));
}

TEST_F(UnlearnTest, L1Sparse) {
  config_.l1_coef = 0.0;
  EXPECT_EQ(L1Sparse(theta_o_, data_, mask_, config_), FineTune(theta_o_, data_, mask_, config_));
  config_.l1_coef = 0.5;
  config_.epochs = 30;
  const ModelParams sparse = L1Sparse(theta_o_, data_, mask_, config_);
  config_.l1_coef = 0.0;
  EXPECT_LT(L1Norm(sparse), L1Norm(FineTune(theta_o_, data_, mask_, config_)));
}

TEST_F(UnlearnTest, LastLayerScopeNeverTouchesHiddenLayers) {
  config_.scope = ParamScope::kLastLayer;
  config_.l1_coef = 0.1;
  config_.lambda_reg = 0.3;
  for (Method m : {Method::kRetrain, Method::kFineTune, Method::kGradientAscent,
                   Method::kRandomLabel, Method::kL1Sparse}) {
    config_.method = m;
    const ModelParams u = Unlearn(theta_o_, data_, mask_, config_);
    EXPECT_EQ(u.layers[0], theta_o_.layers[0]) << MethodName(m);
  }
}

TEST_F(UnlearnTest, EveryMethodIsDeterministic) {
  config_.lambda_reg = 0.2;
  config_.l1_coef = 0.01;
  for (Method m : {Method::kRetrain, Method::kFineTune, Method::kGradientAscent,
                   Method::kRandomLabel, Method::kL1Sparse}) {
    config_.method = m;
    EXPECT_EQ(Unlearn(theta_o_, data_, mask_, config_), Unlearn(theta_o_, data_, mask_, config_))
        << MethodName(m);
  }
}

TEST(Methods, NamesRoundTrip) {
  for (Method m : {Method::kRetrain, Method::kFineTune, Method::kGradientAscent,
                   Method::kRandomLabel, Method::kL1Sparse}) {
    EXPECT_EQ(ParseMethod(MethodName(m)), m);
  }
  EXPECT_EQ(ParseMethod("ft"), Method::kFineTune);
  EXPECT_EQ(ParseMethod("l1sparse"), Method::kL1Sparse);
  EXPECT_FALSE(ParseMethod("scrub"));
}

}  // namespace
}  // namespace forgeset
