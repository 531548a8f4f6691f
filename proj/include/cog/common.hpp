// Copyright 2026-present the cog authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cog {

using TokenId = std::uint32_t;
using DocId = std::uint32_t;

/// Error categories map one-to-one onto the CLI exit codes (1, 2, 3).
enum class ErrorKind { kUsage = 1, kData = 2, kInternal = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

/// 64-bit FNV-1a. Used for encoder fingerprints and index checksums.
class Fnv1a64 {
 public:
  void update(const void* data, std::size_t size) noexcept;
  void update(std::string_view bytes) noexcept { update(bytes.data(), bytes.size()); }
  template <typename T>
  void update_value(const T& value) noexcept {
    update(&value, sizeof(T));
  }
  std::uint64_t digest() const noexcept { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

/// Seedable generator with a platform-stable output stream. Doubles are
/// built from the top 53 bits of mt19937_64 rather than through
/// std::uniform_real_distribution, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() noexcept { return engine_(); }
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

 private:
  std::mt19937_64 engine_;
};

/// Dot product of two float vectors, accumulated in double. Fitness scores
/// are the sum of the dot products over the start half and the end half,
/// each accumulated left to right, so every scoring path in the engine
/// yields bit-identical values.
double split_dot(std::span<const float> a, std::span<const float> b);

/// Plain dot product, accumulated in double left to right.
double dot(std::span<const float> a, std::span<const float> b);

double cosine(std::span<const float> a, std::span<const float> b);

}  // namespace cog
