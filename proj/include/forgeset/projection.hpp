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

#ifndef FORGESET_PROJECTION_HPP_
#define FORGESET_PROJECTION_HPP_

#include <cstddef>
#include <span>

#include "forgeset/numcore.hpp"

namespace forgeset {

// Relaxed selection variable: w in [0,1]^N with sum(w) == budget.
struct SelectionWeights {
  Vector w;
  std::size_t budget = 0;
};

// Element-wise clamp to [0, 1].
Vector ClampUnit(std::span<const double> x);

// Number of selected samples implied by 1^T clamp(a - shift).
double ClampedSum(std::span<const double> a, double shift);

// Euclidean projection of `a` onto {w in [0,1]^N : 1^T w = m}.
//
// The minimiser is clamp(a - shift * 1) where `shift` solves
// 1^T clamp(a - shift) = m. The left side is non-increasing in the shift,
// equals N at min(a) - 1 and 0 at max(a), so bisection on that bracket
// always finds it. The bisected shift is then refined in closed form from
// the resulting clamp pattern, which drives the sum residual to rounding
// level. On a plateau of the clamped sum every shift in the plateau gives the
// same projection.
//
// m == 0 and m == N return all-zeros and all-ones directly.
// Throws kBudget if m > N, kNoConvergence if bisection fails.
SelectionWeights ProjectCappedSimplex(std::span<const double> a, std::size_t m,
                                      BisectOptions options = {});

// max_i |w_i - clamp01(w_i)| + |sum(w) - m|; zero for feasible points.
double FeasibilityResidual(std::span<const double> w, std::size_t m);

}  // namespace forgeset

#endif  // FORGESET_PROJECTION_HPP_
