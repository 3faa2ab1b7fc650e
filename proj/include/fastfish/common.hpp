// Copyright 2026 The fastfish Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FASTFISH_COMMON_HPP_
#define FASTFISH_COMMON_HPP_

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace fastfish {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;

// ---------------------------------------------------------------------------
// Errors. Every error carries a short category string so the CLI can print a
// single machine-parseable line.

class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(message), category_(std::move(category)) {}
  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& m) : Error("invalid-input", m) {}
};

class IndexError : public Error {
 public:
  explicit IndexError(const std::string& m) : Error("index", m) {}
};

class InvalidParameter : public Error {
 public:
  explicit InvalidParameter(const std::string& m) : Error("invalid-parameter", m) {}
};

class InvalidRequest : public Error {
 public:
  explicit InvalidRequest(const std::string& m) : Error("invalid-request", m) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& m) : Error("numerical", m) {}
};

class EmptyPool : public Error {
 public:
  explicit EmptyPool(const std::string& m) : Error("empty-pool", m) {}
};

class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& m) : Error("training", m) {}
};

class FormatError : public Error {
 public:
  FormatError(const std::string& m, std::uint64_t offset)
      : Error("format", m + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& m) : Error("validation", m) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

class AlignmentError : public Error {
 public:
  explicit AlignmentError(const std::string& m) : Error("alignment", m) {}
};

class AggregationError : public Error {
 public:
  explicit AggregationError(const std::string& m) : Error("aggregation", m) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error("io", m) {}
};

// ---------------------------------------------------------------------------
// Seeds.

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent seed stream for (base, stream, counter).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                    std::uint64_t counter = 0) noexcept {
  return splitmix64(splitmix64(base ^ splitmix64(stream)) + counter);
}

// ---------------------------------------------------------------------------
// Threading. A process-wide cap (set by --threads or FASTFISH_THREADS) and a
// thread-local override so nested parallel regions run serially.

int thread_count() noexcept;
void set_thread_count(int threads) noexcept;
/// Reads FASTFISH_THREADS; returns 0 when unset or unparseable.
int thread_count_from_env() noexcept;

class SerialScope {
 public:
  SerialScope() noexcept;
  ~SerialScope();
  SerialScope(const SerialScope&) = delete;
  SerialScope& operator=(const SerialScope&) = delete;

 private:
  bool previous_;
};

bool in_serial_scope() noexcept;

/// Runs fn(i) for i in [0, count). Work is split into contiguous blocks; each
/// fn(i) must be independent, so results never depend on the thread count.
template <typename Fn>
void parallel_for(Index count, Fn&& fn) {
  const int threads = in_serial_scope() ? 1 : thread_count();
  if (threads <= 1 || count <= 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  const Index workers = std::min<Index>(threads, count);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (Index w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        SerialScope serial;
        const Index begin = count * w / workers;
        const Index end = count * (w + 1) / workers;
        try {
          for (Index i = begin; i < end; ++i) fn(i);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Files.

/// Writes to a sibling temp file then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace fastfish

#endif  // FASTFISH_COMMON_HPP_
