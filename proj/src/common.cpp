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
#include "cog/common.hpp"

#include <cmath>

namespace cog {

void Fnv1a64::update(const void* data, std::size_t size) noexcept {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    state_ ^= bytes[i];
    state_ *= 0x100000001b3ULL;
  }
}

std::uint64_t Rng::below(std::uint64_t bound) noexcept {
  // Rejection sampling keeps the result unbiased and platform-stable.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % bound;
}

namespace {
double dot_range(const float* a, const float* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}
}  // namespace

double split_dot(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw DataError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
  }
  const std::size_t half = a.size() / 2;
  const double lo = dot_range(a.data(), b.data(), half);
  const double hi = dot_range(a.data() + half, b.data() + half, a.size() - half);
  return lo + hi;
}

double dot(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw DataError("dimension mismatch in dot");
  return dot_range(a.data(), b.data(), a.size());
}

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw DataError("dimension mismatch in cosine");
  const double ab = dot_range(a.data(), b.data(), a.size());
  const double aa = dot_range(a.data(), a.data(), a.size());
  const double bb = dot_range(b.data(), b.data(), b.size());
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

}  // namespace cog
