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
#include "cog/toy_model.hpp"

namespace cog {

/// Incremental prefix representation. A value type: appending produces a
/// new state and leaves the old one untouched.
struct PrefixState {
  std::vector<TokenId> tokens;
  /// Backend-owned incremental cache (opaque to callers).
  std::vector<double> cache;
  /// Query vector q, dimension d.
  std::vector<float> q;
  /// Vector used by the coarse document retriever, dimension d/2.
  std::vector<float> retrieval;

  bool operator==(const PrefixState&) const = default;
};

/// Read-only view over one document's start/end matrices (rows x half).
struct DocumentRepsView {
  std::size_t rows = 0;
  std::size_t half = 0;
  std::span<const float> start;
  std::span<const float> end;

  std::span<const float> start_row(std::size_t i) const { return start.subspan(i * half, half); }
  std::span<const float> end_row(std::size_t i) const { return end.subspan(i * half, half); }
};

struct DocumentReps {
  std::size_t rows = 0;
  std::size_t half = 0;
  std::vector<float> start;
  std::vector<float> end;

  DocumentRepsView view() const { return {rows, half, start, end}; }
};

/// [start[s] ; end[e]], dimension 2 * half. Requires s <= e < rows.
std::vector<float> phrase_repr(std::size_t s, std::size_t e, const DocumentRepsView& reps);
void phrase_repr_into(std::size_t s, std::size_t e, const DocumentRepsView& reps,
                      std::span<float> out);

struct EncoderInfo {
  std::uint32_t dim = 0;        // d
  std::uint32_t token_dim = 0;  // d_t
  std::uint32_t vocab_size = 0;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  std::uint64_t fingerprint = 0;
};

/// Contract shared by the in-process toy backend and the HTTP sidecar.
/// Implementations are immutable after construction.
class EncoderBackend {
 public:
  virtual ~EncoderBackend() = default;

  virtual EncoderInfo info() const = 0;

  /// State for the empty prefix (q = 0). Not itself a valid query.
  virtual PrefixState empty_prefix() const = 0;
  virtual PrefixState prefix_append(const PrefixState& state, TokenId token) const = 0;
  /// Fold of prefix_append over `tokens`. Throws on an empty prefix.
  virtual PrefixState prefix_init(std::span<const TokenId> tokens) const;

  virtual DocumentReps encode_document(std::span<const TokenId> tokens) const = 0;
  /// Coarse retrieval vector for a document, dimension d/2.
  virtual std::vector<float> document_vector(std::span<const TokenId> tokens) const = 0;
  virtual std::vector<float> token_embedding(TokenId w) const = 0;
};

/// Deterministic toy encoder. Contextual states follow
///   c_t = normalize(alpha * e(x_t) + (1 - alpha) * c_{t-1}),  c_0 = 0,
/// the prefix query is the last state, start/end rows are affine maps of
/// c_t, and retrieval vectors are MLP_start applied to the mean state.
class ToyBackend final : public EncoderBackend {
 public:
  explicit ToyBackend(ToyParams params);

  const ToyParams& params() const noexcept { return params_; }

  EncoderInfo info() const override;
  PrefixState empty_prefix() const override;
  PrefixState prefix_append(const PrefixState& state, TokenId token) const override;
  DocumentReps encode_document(std::span<const TokenId> tokens) const override;
  std::vector<float> document_vector(std::span<const TokenId> tokens) const override;
  std::vector<float> token_embedding(TokenId w) const override;

 private:
  std::vector<float> pooled_retrieval(std::span<const double> sum, std::size_t count) const;

  ToyParams params_;
  std::uint64_t fingerprint_ = 0;
};

/// Mean-pooled contextual state of a token sequence under `params` (no MLP).
/// Used for document-to-document similarity by the segmenter.
std::vector<float> mean_context(const ToyParams& params, std::span<const TokenId> tokens);

}  // namespace cog
