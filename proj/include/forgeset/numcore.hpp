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

#ifndef FORGESET_NUMCORE_HPP_
#define FORGESET_NUMCORE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace forgeset {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, Vector data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  Vector& data() { return data_; }
  const Vector& data() const { return data_; }

  bool AllFinite() const;

  // Rows selected by index, in the given order.
  Matrix SelectRows(std::span<const std::size_t> indices) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

// a (n x k) * b (k x m).
Matrix MatMul(const Matrix& a, const Matrix& b);
// a^T (k x n)^T * b (k x m) -> (n x m).
Matrix MatMulTransA(const Matrix& a, const Matrix& b);
// a (n x k) * b^T, b is (m x k) -> (n x m).
Matrix MatMulTransB(const Matrix& a, const Matrix& b);

// Identifies one reproducible random sequence. Two streams with the same
// (seed, stream_id) produce the same draws on every platform.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  // Independent sub-stream keyed by `tag`.
  RngStream Derive(std::uint64_t tag) const;

  friend bool operator==(const RngStream&, const RngStream&) = default;
};

// Counter-based generator: draw i is SplitMix64's finalizer applied to
// key(seed, stream_id) + i * golden_gamma. No hidden state beyond the counter.
class Rng {
 public:
  explicit Rng(RngStream stream);

  std::uint64_t NextU64();
  // Uniform in [0, 1) with 53 random bits.
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Standard normal via Box-Muller (one draw per call, the sine half is
  // discarded so the sequence does not depend on call parity).
  double Normal();
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t Below(std::uint64_t n);
  // Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> Permutation(std::size_t n);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t Mix64(std::uint64_t x);

// Element-wise sign with sign(0) = 0.
inline double Sign(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

struct BisectOptions {
  double tol = 1e-10;
  int max_iter = 200;
};

// Root of a monotone scalar function on [lo, hi]. Stops when |f| <= tol or the
// bracket is no wider than tol. Throws kBracket without a sign change and
// kNoConvergence when max_iter runs out first.
double BisectRoot(const std::function<double(double)>& f, double lo, double hi,
                  BisectOptions options = {});

// Runs body(i) for i in [0, n) on up to ThreadBudget() threads. Each index is
// processed exactly once; callers write results into per-index slots. Calls
// made from inside a worker run serially on that worker.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& body);

// Parallelism cap: FORGESET_THREADS if set and positive, else hardware
// concurrency (at least 1).
std::size_t ThreadBudget();

// Shortest decimal string that parses back to the same double.
std::string FormatDouble(double v);
// Parses a full-precision double; nullopt on junk or trailing characters.
std::optional<double> ParseDouble(std::string_view s);

double Mean(std::span<const double> v);
// Population standard deviation.
double StdDev(std::span<const double> v);

}  // namespace forgeset

#endif  // FORGESET_NUMCORE_HPP_
