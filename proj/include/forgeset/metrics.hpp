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

#ifndef FORGESET_METRICS_HPP_
#define FORGESET_METRICS_HPP_

#include <span>

#include "forgeset/data.hpp"
#include "forgeset/models.hpp"

namespace forgeset {

// All values are percentages in [0, 100].
struct EvalReport {
  double ua = 0.0;   // 100 - accuracy on the forget set
  double mia = 0.0;  // share of forget samples flagged as non-members
  double ra = 0.0;   // accuracy on the retain set
  double ta = 0.0;   // accuracy on the test set
};

struct GapReport {
  double ua = 0.0;
  double mia = 0.0;
  double ra = 0.0;
  double ta = 0.0;
  double avg_gap = 0.0;
};

// 100 * correct / N with argmax ties going to the lowest class.
// Throws kEmptyBatch on an empty set.
double Accuracy(const ModelParams& theta, const Matrix& x, std::span<const int> y);

double ComputeUa(const ModelParams& theta_u, const Matrix& forget_x,
                 std::span<const int> forget_y);

// Loss-threshold membership attack. The threshold tau is the candidate loss
// value (taken from the union of member and non-member losses) that
// maximises balanced accuracy of the rule "member iff loss < tau", ties going
// to the smaller tau. Returns 100 * share of forget losses >= tau.
double MiaFromLosses(std::span<const double> forget, std::span<const double> members,
                     std::span<const double> non_members);

// Members are the retain set, non-members the test set.
double ComputeMia(const ModelParams& theta_u, const Dataset& forget,
                  const Dataset& retain, const Dataset& test);

// UA / MIA / RA / TA for a model unlearned on `mask` of `train`.
EvalReport Evaluate(const ModelParams& theta_u, const Dataset& train,
                    const ForgetMask& mask, const Dataset& test);

// Per-metric absolute differences and their mean.
GapReport AvgGap(const EvalReport& report, const EvalReport& reference);
GapReport GapFromDiffs(double ua, double mia, double ra, double ta);

// Rounds half away from zero to the 2 decimals used in reports.
double RoundReported(double v);

// Mean natural-log entropy of the softmax output, grouped by true class.
// Classes without samples get 0.
Vector ClassEntropy(const ModelParams& theta, const Dataset& data);

}  // namespace forgeset

#endif  // FORGESET_METRICS_HPP_
