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

#include "forgeset/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

#include "forgeset/error.hpp"

namespace forgeset {

void Dataset::Validate() const {
  if (y.empty()) Fail(ErrorCode::kBadSpec, "dataset is empty");
  if (x.rows() != y.size()) {
    Fail(ErrorCode::kBadSpec, "feature rows and label count differ");
  }
  if (!groups.empty() && groups.size() != y.size()) {
    Fail(ErrorCode::kBadSpec, "group column length differs from label count");
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0 || static_cast<std::size_t>(y[i]) >= num_classes) {
      Fail(ErrorCode::kBadSpec, "label " + std::to_string(y[i]) + " at row " +
                                    std::to_string(i) + " outside [0, " +
                                    std::to_string(num_classes) + ")");
    }
  }
  if (!x.AllFinite()) Fail(ErrorCode::kBadSpec, "dataset has non-finite features");
}

Dataset Dataset::Subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.x = x.SelectRows(indices);
  out.y.reserve(indices.size());
  for (std::size_t i : indices) out.y.push_back(y[i]);
  if (!groups.empty()) {
    out.groups.reserve(indices.size());
    for (std::size_t i : indices) out.groups.push_back(groups[i]);
  }
  out.num_classes = num_classes;
  out.split = split;
  return out;
}

ForgetMask MakeMask(std::vector<std::size_t> indices, std::size_t n) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  if (!indices.empty() && indices.back() >= n) {
    Fail(ErrorCode::kBudget, "mask index " + std::to_string(indices.back()) +
                                 " outside training set of size " + std::to_string(n));
  }
  return ForgetMask{std::move(indices)};
}

std::vector<std::size_t> Complement(const ForgetMask& mask, std::size_t n) {
  std::vector<std::size_t> out;
  out.reserve(n - std::min(n, mask.size()));
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (j < mask.indices.size() && mask.indices[j] == i) {
      ++j;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

namespace {

template <typename Before>
ForgetMask TopM(std::span<const double> w, std::size_t m, Before before) {
  if (m > w.size()) {
    Fail(ErrorCode::kBudget, "budget " + std::to_string(m) + " exceeds " +
                                 std::to_string(w.size()) + " candidates");
  }
  std::vector<std::size_t> order(w.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      if (w[a] != w[b]) return before(w[a], w[b]);
                      return a < b;
                    });
  order.resize(m);
  std::sort(order.begin(), order.end());
  return ForgetMask{std::move(order)};
}

}  // namespace

ForgetMask MaskFromWeights(std::span<const double> w, std::size_t m) {
  return TopM(w, m, [](double a, double b) { return a > b; });
}

ForgetMask MaskFromSmallestWeights(std::span<const double> w, std::size_t m) {
  return TopM(w, m, [](double a, double b) { return a < b; });
}

ForgetMask RandomMask(std::size_t n, std::size_t m, RngStream rng) {
  if (m > n) {
    Fail(ErrorCode::kBudget, "budget " + std::to_string(m) + " exceeds " +
                                 std::to_string(n) + " samples");
  }
  Rng gen(rng);
  auto perm = gen.Permutation(n);
  perm.resize(m);
  std::sort(perm.begin(), perm.end());
  return ForgetMask{std::move(perm)};
}

Matrix BlobMeans(std::size_t classes, std::size_t dim) {
  Matrix means(classes, dim);
  for (std::size_t c = 0; c < classes; ++c) {
    if (dim == 1) {
      means(c, 0) = classes == 1 ? 0.0
                                 : kBlobRadius * (2.0 * static_cast<double>(c) /
                                                      static_cast<double>(classes - 1) -
                                                  1.0);
    } else {
      const double angle =
          2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(classes);
      means(c, 0) = kBlobRadius * std::cos(angle);
      means(c, 1) = kBlobRadius * std::sin(angle);
    }
  }
  return means;
}

Dataset GenBlobs(std::size_t n_per_class, std::size_t classes, std::size_t dim,
                 double spread, RngStream rng) {
  if (n_per_class == 0 || classes == 0 || dim == 0) {
    Fail(ErrorCode::kBadSpec, "blob counts must be positive");
  }
  if (!(spread > 0.0) || !std::isfinite(spread)) {
    Fail(ErrorCode::kBadSpec, "blob spread must be positive");
  }
  const Matrix means = BlobMeans(classes, dim);
  Rng gen(rng);
  Dataset out;
  out.num_classes = classes;
  out.x = Matrix(n_per_class * classes, dim);
  out.y.resize(n_per_class * classes);
  for (std::size_t i = 0; i < out.y.size(); ++i) {
    const std::size_t c = i % classes;
    out.y[i] = static_cast<int>(c);
    for (std::size_t d = 0; d < dim; ++d) {
      out.x(i, d) = means(c, d) + spread * gen.Normal();
    }
  }
  return out;
}

Dataset GenBiased(std::size_t n, double correlation, RngStream rng) {
  if (n == 0) Fail(ErrorCode::kBadSpec, "biased dataset size must be positive");
  if (!(correlation >= 0.0 && correlation <= 1.0)) {
    Fail(ErrorCode::kBadSpec, "correlation must lie in [0, 1]");
  }
  Rng gen(rng);
  Dataset out;
  out.num_classes = 2;
  out.x = Matrix(n, 2);
  out.y.resize(n);
  out.groups.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = gen.Uniform() < 0.5 ? 0 : 1;
    // correlation == 1 must give group == label exactly, and Uniform() < 1.
    const int group = gen.Uniform() < correlation ? label : 1 - label;
    out.y[i] = label;
    out.groups[i] = group;
    out.x(i, 0) = (label ? 1.0 : -1.0) + kBiasedNoise * gen.Normal();
    out.x(i, 1) = (group ? 1.0 : -1.0) + kBiasedNoise * gen.Normal();
  }
  return out;
}

double AlignedFraction(const Dataset& data, std::span<const std::size_t> rows) {
  if (data.groups.empty()) Fail(ErrorCode::kBadSpec, "dataset has no group column");
  std::size_t aligned = 0;
  std::size_t total = 0;
  auto visit = [&](std::size_t i) {
    aligned += data.groups[i] == data.y[i];
    ++total;
  };
  if (rows.empty()) {
    for (std::size_t i = 0; i < data.size(); ++i) visit(i);
  } else {
    for (std::size_t i : rows) visit(i);
  }
  return total ? static_cast<double>(aligned) / static_cast<double>(total) : 0.0;
}

namespace {

std::vector<std::string_view> SplitCommas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

std::string_view TrimCr(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

[[noreturn]] void CellError(std::size_t row, std::string_view column,
                            std::string_view cell, const char* why) {
  Fail(ErrorCode::kParse, "row " + std::to_string(row) + ", column " +
                              std::string(column) + ": " + why + " '" +
                              std::string(cell) + "'");
}

int ParseLabel(std::string_view cell, std::size_t row, std::string_view column) {
  int v = 0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    CellError(row, column, cell, "not an integer");
  }
  if (v < 0) CellError(row, column, cell, "negative value");
  return v;
}

}  // namespace

Dataset ParseCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || TrimCr(line).empty()) {
    Fail(ErrorCode::kEmptyFile, "CSV has no header");
  }
  const auto header_cells = SplitCommas(TrimCr(line));
  std::vector<std::string> header(header_cells.begin(), header_cells.end());
  bool has_group = !header.empty() && header.back() == "group";
  const std::size_t label_col = header.size() - (has_group ? 2 : 1);
  if (header.size() < (has_group ? 3u : 2u) || header[label_col] != "label") {
    Fail(ErrorCode::kParse, "row 1: header must be f0,...,f{D-1},label[,group]");
  }
  for (std::size_t d = 0; d < label_col; ++d) {
    if (header[d] != "f" + std::to_string(d)) {
      Fail(ErrorCode::kParse, "row 1, column " + std::to_string(d + 1) +
                                  ": expected 'f" + std::to_string(d) + "', got '" +
                                  header[d] + "'");
    }
  }
  const std::size_t dim = label_col;
  Dataset out;
  Vector features;
  std::size_t row = 1;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++row;
    const std::string_view trimmed = TrimCr(line);
    if (trimmed.empty()) continue;
    const auto cells = SplitCommas(trimmed);
    if (cells.size() != header.size()) {
      Fail(ErrorCode::kParse, "row " + std::to_string(row) + ": expected " +
                                  std::to_string(header.size()) + " cells, got " +
                                  std::to_string(cells.size()));
    }
    for (std::size_t d = 0; d < dim; ++d) {
      const auto v = ParseDouble(cells[d]);
      if (!v) CellError(row, header[d], cells[d], "not a number");
      if (!std::isfinite(*v)) CellError(row, header[d], cells[d], "non-finite value");
      features.push_back(*v);
    }
    const int label = ParseLabel(TrimCr(cells[label_col]), row, "label");
    max_label = std::max(max_label, label);
    out.y.push_back(label);
    if (has_group) out.groups.push_back(ParseLabel(TrimCr(cells.back()), row, "group"));
  }
  if (out.y.empty()) Fail(ErrorCode::kEmptyFile, "CSV has a header but no rows");
  out.x = Matrix(out.y.size(), dim, std::move(features));
  out.num_classes = static_cast<std::size_t>(max_label) + 1;
  return out;
}

std::string FormatCsv(const Dataset& data) {
  std::string s;
  for (std::size_t d = 0; d < data.dim(); ++d) s += "f" + std::to_string(d) + ",";
  s += "label";
  const bool has_group = !data.groups.empty();
  if (has_group) s += ",group";
  s += "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t d = 0; d < data.dim(); ++d) s += FormatDouble(data.x(i, d)) + ",";
    s += std::to_string(data.y[i]);
    if (has_group) s += "," + std::to_string(data.groups[i]);
    s += "\n";
  }
  return s;
}

Dataset LoadCsv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorCode::kFile, "cannot read " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  try {
    return ParseCsv(buf.str());
  } catch (const Error& e) {
    Fail(e.code(), path.string() + ": " + e.what());
  }
}

void SaveCsv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(ErrorCode::kFile, "cannot write " + path.string());
  os << FormatCsv(data);
  if (!os) Fail(ErrorCode::kFile, "failed writing " + path.string());
}

void SaveMask(const ForgetMask& mask, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(ErrorCode::kFile, "cannot write " + path.string());
  for (std::size_t i : mask.indices) os << i << "\n";
  if (!os) Fail(ErrorCode::kFile, "failed writing " + path.string());
}

ForgetMask LoadMask(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorCode::kFile, "cannot read " + path.string());
  std::vector<std::size_t> indices;
  std::string line;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    ++row;
    const std::string_view cell = TrimCr(line);
    if (cell.empty()) continue;
    std::size_t v = 0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
      Fail(ErrorCode::kParse, path.string() + ": line " + std::to_string(row) +
                                  ": bad index '" + std::string(cell) + "'");
    }
    if (!indices.empty() && v <= indices.back()) {
      Fail(ErrorCode::kParse, path.string() + ": line " + std::to_string(row) +
                                  ": indices must be strictly ascending");
    }
    indices.push_back(v);
  }
  return ForgetMask{std::move(indices)};
}

}  // namespace forgeset
