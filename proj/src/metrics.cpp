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

#include "forgeset/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "forgeset/error.hpp"

namespace forgeset {

double Accuracy(const ModelParams& theta, const Matrix& x, std::span<const int> y) {
  if (x.rows() == 0) Fail(ErrorCode::kEmptyBatch, "accuracy over an empty set");
  if (y.size() != x.rows()) Fail(ErrorCode::kShape, "label count differs from rows");
  const auto pred = Predict(theta, x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == y[i];
  return 100.0 * static_cast<double>(correct) / static_cast<double>(pred.size());
}

double ComputeUa(const ModelParams& theta_u, const Matrix& forget_x,
                 std::span<const int> forget_y) {
  if (forget_x.rows() == 0) Fail(ErrorCode::kEmptyBatch, "UA over an empty forget set");
  return 100.0 - Accuracy(theta_u, forget_x, forget_y);
}

double MiaFromLosses(std::span<const double> forget, std::span<const double> members,
                     std::span<const double> non_members) {
  if (forget.empty() || members.empty() || non_members.empty()) {
    Fail(ErrorCode::kEmptyBatch, "MIA needs non-empty forget, member and non-member sets");
  }
  Vector sorted_members(members.begin(), members.end());
  Vector sorted_non(non_members.begin(), non_members.end());
  std::sort(sorted_members.begin(), sorted_members.end());
  std::sort(sorted_non.begin(), sorted_non.end());
  Vector candidates;
  candidates.reserve(members.size() + non_members.size());
  candidates.insert(candidates.end(), sorted_members.begin(), sorted_members.end());
  candidates.insert(candidates.end(), sorted_non.begin(), sorted_non.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // Balanced accuracy times |members| * |non-members|, kept integral so equal
  // scores compare equal.
  const auto n_mem = static_cast<std::uint64_t>(sorted_members.size());
  const auto n_non = static_cast<std::uint64_t>(sorted_non.size());
  double best_tau = candidates.front();
  std::uint64_t best_score = 0;
  bool first = true;
  // Ascending sweep with strict improvement keeps the smallest tau on ties.
  for (double tau : candidates) {
    const auto members_below =
        std::lower_bound(sorted_members.begin(), sorted_members.end(), tau) -
        sorted_members.begin();
    const auto non_below =
        std::lower_bound(sorted_non.begin(), sorted_non.end(), tau) - sorted_non.begin();
    const std::uint64_t score = static_cast<std::uint64_t>(members_below) * n_non +
                                (n_non - static_cast<std::uint64_t>(non_below)) * n_mem;
    if (first || score > best_score) {
      first = false;
      best_score = score;
      best_tau = tau;
    }
  }
  std::size_t flagged = 0;
  for (double l : forget) flagged += l >= best_tau;
  return 100.0 * static_cast<double>(flagged) / static_cast<double>(forget.size());
}

double ComputeMia(const ModelParams& theta_u, const Dataset& forget,
                  const Dataset& retain, const Dataset& test) {
  if (forget.size() == 0 || retain.size() == 0 || test.size() == 0) {
    Fail(ErrorCode::kEmptyBatch, "MIA needs non-empty forget, retain and test sets");
  }
  const Vector lf = PerSampleLoss(theta_u, forget.x, forget.y);
  const Vector lr = PerSampleLoss(theta_u, retain.x, retain.y);
  const Vector lt = PerSampleLoss(theta_u, test.x, test.y);
  return MiaFromLosses(lf, lr, lt);
}

EvalReport Evaluate(const ModelParams& theta_u, const Dataset& train,
                    const ForgetMask& mask, const Dataset& test) {
  const Dataset forget = train.Subset(mask.indices);
  const auto keep = Complement(mask, train.size());
  const Dataset retain = train.Subset(keep);
  EvalReport r;
  r.ua = ComputeUa(theta_u, forget.x, forget.y);
  r.mia = ComputeMia(theta_u, forget, retain, test);
  r.ra = Accuracy(theta_u, retain.x, retain.y);
  r.ta = Accuracy(theta_u, test.x, test.y);
  return r;
}

GapReport GapFromDiffs(double ua, double mia, double ra, double ta) {
  GapReport g{std::abs(ua), std::abs(mia), std::abs(ra), std::abs(ta), 0.0};
  g.avg_gap = (g.ua + g.mia + g.ra + g.ta) / 4.0;
  return g;
}

GapReport AvgGap(const EvalReport& report, const EvalReport& reference) {
  return GapFromDiffs(report.ua - reference.ua, report.mia - reference.mia,
                      report.ra - reference.ra, report.ta - reference.ta);
}

double RoundReported(double v) { return std::round(v * 100.0) / 100.0; }

Vector ClassEntropy(const ModelParams& theta, const Dataset& data) {
  const Matrix probs = Softmax(Forward(theta, data.x));
  Vector sums(data.num_classes, 0.0);
  std::vector<std::size_t> counts(data.num_classes, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    double h = 0.0;
    for (double p : probs.row(i)) {
      if (p > 0.0) h -= p * std::log(p);
    }
    const auto c = static_cast<std::size_t>(data.y[i]);
    if (c >= sums.size()) Fail(ErrorCode::kShape, "label outside the class range");
    sums[c] += h;
    ++counts[c];
  }
  for (std::size_t c = 0; c < sums.size(); ++c) {
    if (counts[c] > 0) sums[c] /= static_cast<double>(counts[c]);
  }
  return sums;
}

}  // namespace forgeset
