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

#include "forgeset/projection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "forgeset/error.hpp"

namespace forgeset {

namespace {
double Clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }
}  // namespace

Vector ClampUnit(std::span<const double> x) {
  Vector out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), Clamp01);
  return out;
}

double ClampedSum(std::span<const double> a, double shift) {
  double s = 0.0;
  for (double v : a) s += Clamp01(v - shift);
  return s;
}

SelectionWeights ProjectCappedSimplex(std::span<const double> a, std::size_t m,
                                      BisectOptions options) {
  const std::size_t n = a.size();
  if (m > n) {
    Fail(ErrorCode::kBudget, "budget " + std::to_string(m) + " exceeds " +
                                 std::to_string(n) + " entries");
  }
  for (double v : a) {
    if (!std::isfinite(v)) Fail(ErrorCode::kBadSpec, "projection input is not finite");
  }
  SelectionWeights out{Vector(n, 0.0), m};
  if (m == 0) return out;
  if (m == n) {
    std::fill(out.w.begin(), out.w.end(), 1.0);
    return out;
  }

  const auto [lo_it, hi_it] = std::minmax_element(a.begin(), a.end());
  const double target = static_cast<double>(m);
  double shift = BisectRoot([&](double s) { return ClampedSum(a, s) - target; },
                            *lo_it - 1.0, *hi_it, options);

  // Closed-form refinement: with the clamp pattern fixed, the sum is affine in
  // the shift, so the interior entries determine it exactly.
  double interior_sum = 0.0;
  std::size_t interior = 0;
  std::size_t at_one = 0;
  for (double v : a) {
    const double t = v - shift;
    if (t >= 1.0) {
      ++at_one;
    } else if (t > 0.0) {
      interior_sum += v;
      ++interior;
    }
  }
  if (interior > 0) {
    const double refined = (interior_sum + static_cast<double>(at_one) - target) /
                           static_cast<double>(interior);
    if (std::abs(ClampedSum(a, refined) - target) <=
        std::abs(ClampedSum(a, shift) - target)) {
      shift = refined;
    }
  }

  for (std::size_t i = 0; i < n; ++i) out.w[i] = Clamp01(a[i] - shift);
  return out;
}

double FeasibilityResidual(std::span<const double> w, std::size_t m) {
  double box = 0.0;
  double sum = 0.0;
  for (double v : w) {
    box = std::max(box, std::abs(v - Clamp01(v)));
    sum += v;
  }
  return box + std::abs(sum - static_cast<double>(m));
}

}  // namespace forgeset
