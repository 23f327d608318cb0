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

#ifndef FORGESET_ORACLE_HPP_
#define FORGESET_ORACLE_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "forgeset/data.hpp"
#include "forgeset/models.hpp"
#include "forgeset/unlearn.hpp"

namespace forgeset {

inline constexpr double kMaxEnumeratedSubsets = 1e4;
inline constexpr std::size_t kMaxQpOracleSize = 12;

struct SubsetScore {
  std::vector<std::size_t> subset;
  double ua = 0.0;
};

// C(n, k) as a double (saturates to +inf instead of overflowing).
double Binomial(std::size_t n, std::size_t k);

// Retrains (config.method is ignored, Retrain is always used) on the
// complement of every size-m subset and scores the subset by UA. Sorted by
// ascending UA, then lexicographically by subset, so the head of the list
// holds the hardest subsets to forget. Subsets are evaluated in parallel;
// the ranking is identical to a sequential run.
//
// Throws kTooLarge when C(N, m) exceeds kMaxEnumeratedSubsets unless `force`.
std::vector<SubsetScore> EnumerateWorst(const ModelParams& theta_o, const Dataset& data,
                                        std::size_t m, const UnlearnConfig& retrain,
                                        bool force = false);

// Fraction of subsets in `ranking` with UA strictly below `ua`.
double FractionStrictlyBelow(std::span<const SubsetScore> ranking, double ua);

// Exact projection onto {w in [0,1]^N, 1^T w = m} by trying every
// at-zero / interior / at-one pattern (3^N of them), solving the interior
// coordinates in closed form and keeping the feasible candidate closest to a.
// Throws kTooLarge for N > kMaxQpOracleSize, kBudget for m > N.
Vector QpProjectOracle(std::span<const double> a, std::size_t m);

// CSV with header subset_indices,ua; indices joined by ';'.
void SaveSubsetScores(std::span<const SubsetScore> scores,
                      const std::filesystem::path& path);
std::string FormatSubsetScores(std::span<const SubsetScore> scores);

}  // namespace forgeset

#endif  // FORGESET_ORACLE_HPP_
