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

#ifndef FORGESET_DATA_HPP_
#define FORGESET_DATA_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "forgeset/numcore.hpp"

namespace forgeset {

enum class Split { kTrain, kTest };

// Labelled feature matrix. `groups` is either empty or holds one attribute
// value per row (used by the biased generator).
struct Dataset {
  Matrix x;
  std::vector<int> y;
  std::size_t num_classes = 0;
  Split split = Split::kTrain;
  std::vector<int> groups;

  std::size_t size() const { return y.size(); }
  std::size_t dim() const { return x.cols(); }

  // Throws kBadSpec unless rows match labels, labels lie in
  // [0, num_classes) and features are finite.
  void Validate() const;

  // Rows in the given order; groups follow when present.
  Dataset Subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Sorted, duplicate-free row indices into a training set.
struct ForgetMask {
  std::vector<std::size_t> indices;

  std::size_t size() const { return indices.size(); }
  friend bool operator==(const ForgetMask&, const ForgetMask&) = default;
};

// Sorts, deduplicates and range-checks against n (kBudget on out of range).
ForgetMask MakeMask(std::vector<std::size_t> indices, std::size_t n);

// Indices of [0, n) not in `mask`, ascending.
std::vector<std::size_t> Complement(const ForgetMask& mask, std::size_t n);

// Indices of the m largest weights, ties to the lowest index.
ForgetMask MaskFromWeights(std::span<const double> w, std::size_t m);
// Indices of the m smallest weights, ties to the lowest index.
ForgetMask MaskFromSmallestWeights(std::span<const double> w, std::size_t m);

// Uniformly random size-m mask.
ForgetMask RandomMask(std::size_t n, std::size_t m, RngStream rng);

// Class means used by GenBlobs: C points evenly spaced on a circle of radius
// kBlobRadius in the first two coordinates (on a line when dim == 1).
inline constexpr double kBlobRadius = 2.0;
Matrix BlobMeans(std::size_t classes, std::size_t dim);

// n_per_class isotropic Gaussian samples around each class mean, classes
// interleaved (row i has label i % classes).
Dataset GenBlobs(std::size_t n_per_class, std::size_t classes, std::size_t dim,
                 double spread, RngStream rng);

// Binary task with a spurious attribute. Row i gets label y ~ Bernoulli(1/2)
// and group g = y with probability `correlation`, else 1 - y. Feature 0 is a
// noisy copy of the label (mean +-1), feature 1 a noisy copy of the group
// (mean +-1), both with standard deviation kBiasedNoise.
inline constexpr double kBiasedNoise = 0.8;
Dataset GenBiased(std::size_t n, double correlation, RngStream rng);

// Share of rows whose group equals their label, over `rows` (all rows when
// empty).
double AlignedFraction(const Dataset& data, std::span<const std::size_t> rows = {});

// CSV with header f0,...,f{D-1},label[,group]. Labels are non-negative
// integers; num_classes is inferred as max label + 1.
Dataset LoadCsv(const std::filesystem::path& path);
void SaveCsv(const Dataset& data, const std::filesystem::path& path);
Dataset ParseCsv(const std::string& text);
std::string FormatCsv(const Dataset& data);

// One index per line, ascending, newline-terminated.
void SaveMask(const ForgetMask& mask, const std::filesystem::path& path);
ForgetMask LoadMask(const std::filesystem::path& path);

}  // namespace forgeset

#endif  // FORGESET_DATA_HPP_
