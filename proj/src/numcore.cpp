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

#include "forgeset/numcore.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>

#include "forgeset/error.hpp"

namespace forgeset {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBadSpec: return "BadSpec";
    case ErrorCode::kShape: return "ShapeError";
    case ErrorCode::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::kBracket: return "BracketError";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kBudget: return "BudgetError";
    case ErrorCode::kDivergence: return "DivergenceError";
    case ErrorCode::kEmptyRetainSet: return "EmptyRetainSet";
    case ErrorCode::kSingleClass: return "SingleClassError";
    case ErrorCode::kEmptyBatch: return "EmptyBatch";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kEmptyFile: return "EmptyFile";
    case ErrorCode::kFile: return "FileError";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kConfig: return "ConfigError";
  }
  return "UnknownError";
}

Matrix::Matrix(std::size_t rows, std::size_t cols, Vector data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    Fail(ErrorCode::kShape, "matrix data length " + std::to_string(data_.size()) +
                                " does not match " + std::to_string(rows_) + "x" +
                                std::to_string(cols_));
  }
}

bool Matrix::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Matrix Matrix::SelectRows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows_) {
      Fail(ErrorCode::kShape, "row index " + std::to_string(indices[i]) +
                                  " out of range for " + std::to_string(rows_) +
                                  " rows");
    }
    std::copy_n(data_.begin() + indices[i] * cols_, cols_,
                out.data_.begin() + i * cols_);
  }
  return out;
}

Matrix MatMul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    Fail(ErrorCode::kShape, "MatMul: inner dimensions differ");
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Matrix MatMulTransA(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    Fail(ErrorCode::kShape, "MatMulTransA: row counts differ");
  }
  Matrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aki * b(k, j);
    }
  }
  return out;
}

Matrix MatMulTransB(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    Fail(ErrorCode::kShape, "MatMulTransB: column counts differ");
  }
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(j, k);
      out(i, j) = acc;
    }
  }
  return out;
}

std::uint64_t Mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

namespace {
constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;
}  // namespace

RngStream RngStream::Derive(std::uint64_t tag) const {
  return {seed, Mix64(stream_id ^ Mix64(tag + kGoldenGamma))};
}

Rng::Rng(RngStream stream)
    : key_(Mix64(stream.seed) ^ Mix64(stream.stream_id * kGoldenGamma + 1)) {}

std::uint64_t Rng::NextU64() {
  ++counter_;
  return Mix64(key_ + counter_ * kGoldenGamma);
}

double Rng::Uniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double Rng::Normal() {
  // 1 - U lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - Uniform();
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::Below(std::uint64_t n) {
  // Rejection sampling keeps the result unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = NextU64();
  } while (x >= limit);
  return x % n;
}

std::vector<std::size_t> Rng::Permutation(std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::swap(p[i - 1], p[Below(i)]);
  }
  return p;
}

double BisectRoot(const std::function<double(double)>& f, double lo, double hi,
                  BisectOptions options) {
  if (!(options.tol > 0.0)) Fail(ErrorCode::kBadSpec, "bisection tol must be > 0");
  if (lo > hi) std::swap(lo, hi);
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    Fail(ErrorCode::kBracket, "no sign change on [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "]");
  }
  for (int iter = 0; iter < options.max_iter; ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    const double f_mid = f(mid);
    if (std::abs(f_mid) <= options.tol) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= options.tol) return lo + 0.5 * (hi - lo);
  }
  Fail(ErrorCode::kNoConvergence,
       "bisection exhausted " + std::to_string(options.max_iter) +
           " iterations with bracket width " + std::to_string(hi - lo));
}

std::size_t ThreadBudget() {
  if (const char* env = std::getenv("FORGESET_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

namespace {
thread_local bool in_worker = false;
}  // namespace

void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = in_worker ? 1 : std::min(ThreadBudget(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  // The error from the lowest failing index wins, as in a sequential run.
  std::exception_ptr first_error;
  std::size_t first_error_index = n;
  std::mutex error_mu;
  auto run = [&] {
    in_worker = true;
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (i < first_error_index) {
          first_error_index = i;
          first_error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string FormatDouble(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::optional<double> ParseDouble(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    return std::nullopt;
  }
  return v;
}

double Mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double StdDev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mu = Mean(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace forgeset
