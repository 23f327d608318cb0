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

#include "forgeset/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "forgeset/error.hpp"
#include "forgeset/metrics.hpp"

namespace forgeset {

double Binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(r);
}

namespace {

// All size-k subsets of [0, n) in lexicographic order.
std::vector<std::vector<std::size_t>> Combinations(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> c(k);
  for (std::size_t i = 0; i < k; ++i) c[i] = i;
  while (true) {
    out.push_back(c);
    std::size_t i = k;
    while (i > 0 && c[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++c[i - 1];
    for (std::size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
  }
  return out;
}

}  // namespace

std::vector<SubsetScore> EnumerateWorst(const ModelParams& theta_o, const Dataset& data,
                                        std::size_t m, const UnlearnConfig& retrain,
                                        bool force) {
  const std::size_t n = data.size();
  if (m == 0) Fail(ErrorCode::kBadSpec, "subset size must be at least 1");
  if (m > n) {
    Fail(ErrorCode::kBudget, "subset size " + std::to_string(m) + " exceeds " +
                                 std::to_string(n) + " samples");
  }
  const double count = Binomial(n, m);
  if (!force && count > kMaxEnumeratedSubsets) {
    Fail(ErrorCode::kTooLarge, "C(" + std::to_string(n) + ", " + std::to_string(m) +
                                   ") = " + FormatDouble(count) +
                                   " subsets exceeds the enumeration guard");
  }
  const auto subsets = Combinations(n, m);
  std::vector<SubsetScore> scores(subsets.size());
  UnlearnConfig config = retrain;
  config.method = Method::kRetrain;
  ParallelFor(subsets.size(), [&](std::size_t s) {
    const ForgetMask mask{subsets[s]};
    const Dataset forget = data.Subset(mask.indices);
    // Training on an empty retain set leaves the fresh initialisation as is.
    ModelParams theta_u =
        m == n ? InitParams(theta_o.LayerSizes(), config.rng, theta_o.activation)
               : Retrain(theta_o, data, mask, config);
    scores[s] = SubsetScore{subsets[s], ComputeUa(theta_u, forget.x, forget.y)};
  });
  std::stable_sort(scores.begin(), scores.end(),
                   [](const SubsetScore& a, const SubsetScore& b) { return a.ua < b.ua; });
  return scores;
}

double FractionStrictlyBelow(std::span<const SubsetScore> ranking, double ua) {
  if (ranking.empty()) return 0.0;
  std::size_t below = 0;
  for (const auto& s : ranking) below += s.ua < ua;
  return static_cast<double>(below) / static_cast<double>(ranking.size());
}

Vector QpProjectOracle(std::span<const double> a, std::size_t m) {
  const std::size_t n = a.size();
  if (n > kMaxQpOracleSize) {
    Fail(ErrorCode::kTooLarge, "QP oracle limited to " +
                                   std::to_string(kMaxQpOracleSize) + " entries");
  }
  if (m > n) Fail(ErrorCode::kBudget, "budget exceeds vector length");
  std::size_t patterns = 1;
  for (std::size_t i = 0; i < n; ++i) patterns *= 3;

  const double target = static_cast<double>(m);
  constexpr double kSlack = 1e-12;
  Vector best;
  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<int> state(n);
  Vector w(n);
  for (std::size_t code = 0; code < patterns; ++code) {
    std::size_t rest = code;
    double interior_sum = 0.0;
    std::size_t interior = 0;
    std::size_t ones = 0;
    for (std::size_t i = 0; i < n; ++i) {
      state[i] = static_cast<int>(rest % 3);  // 0: at zero, 1: interior, 2: at one
      rest /= 3;
      if (state[i] == 1) {
        interior_sum += a[i];
        ++interior;
      } else if (state[i] == 2) {
        ++ones;
      }
    }
    double shift = 0.0;
    if (interior == 0) {
      if (ones != m) continue;
    } else {
      shift = (interior_sum + static_cast<double>(ones) - target) /
              static_cast<double>(interior);
    }
    bool feasible = true;
    double obj = 0.0;
    for (std::size_t i = 0; i < n && feasible; ++i) {
      if (state[i] == 0) {
        w[i] = 0.0;
      } else if (state[i] == 2) {
        w[i] = 1.0;
      } else {
        w[i] = a[i] - shift;
        if (w[i] < -kSlack || w[i] > 1.0 + kSlack) feasible = false;
        w[i] = std::clamp(w[i], 0.0, 1.0);
      }
      obj += (w[i] - a[i]) * (w[i] - a[i]);
    }
    if (feasible && obj < best_obj) {
      best_obj = obj;
      best = w;
    }
  }
  return best;
}

std::string FormatSubsetScores(std::span<const SubsetScore> scores) {
  std::string s = "subset_indices,ua\n";
  for (const auto& score : scores) {
    for (std::size_t k = 0; k < score.subset.size(); ++k) {
      s += (k ? ";" : "") + std::to_string(score.subset[k]);
    }
    s += "," + FormatDouble(score.ua) + "\n";
  }
  return s;
}

void SaveSubsetScores(std::span<const SubsetScore> scores,
                      const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(ErrorCode::kFile, "cannot write " + path.string());
  os << FormatSubsetScores(scores);
  if (!os) Fail(ErrorCode::kFile, "failed writing " + path.string());
}

}  // namespace forgeset
