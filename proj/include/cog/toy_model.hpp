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
#include <span>
#include <string>
#include <vector>

#include "cog/common.hpp"

namespace cog {

/// Parameters of the deterministic toy encoder, stored as one flat vector of
/// doubles so that training, finite differences and persistence all work on
/// the same layout:
///
///   embeddings        |V| x d_t   base token vectors e(w)
///   token_table       |V| x d     context-independent candidates v_w
///   start_weight      d/2 x d_t   MLP_start (affine)
///   start_bias        d/2
///   end_weight        d/2 x d_t   MLP_end (affine)
///   end_bias          d/2
///
/// The toy backend uses d_t == d so the prefix state can be used directly as
/// the query vector.
class ToyParams {
 public:
  static constexpr double kDefaultAlpha = 0.5;
  static constexpr std::uint32_t kDefaultDim = 64;

  ToyParams() = default;
  /// Zero-initialised parameters.
  ToyParams(std::uint32_t vocab_size, std::uint32_t dim, double alpha, std::uint64_t seed);

  /// Embeddings and token table uniform in [-0.1, 0.1], weights uniform in
  /// +-1/sqrt(d_t), biases zero; all drawn from Rng(seed) in layout order.
  static ToyParams seeded(std::uint32_t vocab_size, std::uint32_t dim = kDefaultDim,
                          std::uint64_t seed = 0, double alpha = kDefaultAlpha);

  std::uint32_t vocab_size() const noexcept { return vocab_size_; }
  std::uint32_t dim() const noexcept { return dim_; }
  std::uint32_t token_dim() const noexcept { return dim_; }
  std::uint32_t half_dim() const noexcept { return dim_ / 2; }
  double alpha() const noexcept { return alpha_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::size_t embeddings_offset() const noexcept { return 0; }
  std::size_t token_table_offset() const noexcept;
  std::size_t start_weight_offset() const noexcept;
  std::size_t start_bias_offset() const noexcept;
  std::size_t end_weight_offset() const noexcept;
  std::size_t end_bias_offset() const noexcept;

  std::span<const double> embedding(TokenId w) const;
  std::span<const double> token_row(TokenId w) const;
  std::span<const double> start_weight() const noexcept;
  std::span<const double> start_bias() const noexcept;
  std::span<const double> end_weight() const noexcept;
  std::span<const double> end_bias() const noexcept;

  /// Hash of (alpha, dims, seed, parameter bytes).
  std::uint64_t fingerprint() const;

  void save(const std::string& path) const;
  static ToyParams load(const std::string& path);

  bool operator==(const ToyParams&) const = default;

 private:
  std::uint32_t vocab_size_ = 0;
  std::uint32_t dim_ = 0;
  double alpha_ = kDefaultAlpha;
  std::uint64_t seed_ = 0;
  std::vector<double> values_;
};

/// One step of c_t = normalize(alpha * e(x_t) + (1 - alpha) * c_{t-1}).
/// Writes c_t to `out` and returns |u_t|; when u_t is the zero vector the
/// normalisation is skipped, c_t = 0 and the return value is 0.
double context_step(const ToyParams& params, std::span<const double> prev, TokenId token,
                    std::span<double> out);

/// Contextual states for a whole sequence, row-major m x d_t, with the
/// pre-normalisation norms kept for backpropagation.
struct ContextStates {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> states;
  std::vector<double> norms;

  std::span<const double> row(std::size_t t) const { return {states.data() + t * cols, cols}; }
};

ContextStates contextualize(const ToyParams& params, std::span<const TokenId> tokens);

/// out = W x + b for a row-major W of shape out.size() x x.size().
void apply_affine(std::span<const double> weight, std::span<const double> bias,
                  std::span<const double> x, std::span<double> out);

}  // namespace cog
