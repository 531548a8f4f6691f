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
#include "cog/corpus.hpp"
#include "cog/encoder.hpp"
#include "cog/segmenter.hpp"

namespace cog {

/// Failure modes of load_index, reported distinctly.
class IndexFormatError : public DataError {
 public:
  enum class Reason { kBadMagic, kVersionMismatch, kTruncated, kChecksumMismatch, kMalformed };

  IndexFormatError(Reason reason, const std::string& what) : DataError(what), reason_(reason) {}
  Reason reason() const noexcept { return reason_; }

 private:
  Reason reason_;
};

inline constexpr std::uint16_t kIndexFormatVersion = 1;

/// The dynamic vocabulary: per-token start/end vectors for every document,
/// document retrieval vectors and the context-independent token table.
/// Phrase vectors are assembled on demand, so storage is
/// O(total tokens * d + |V| * d) regardless of how many spans exist.
/// Immutable once built or loaded.
class PhraseIndex {
 public:
  PhraseIndex() = default;

  static PhraseIndex build(const Corpus& corpus, const EncoderBackend& backend,
                           std::uint32_t max_len = 8);

  void save(const std::string& path) const;
  static PhraseIndex load(const std::string& path);
  /// Serialised bytes exactly as written by save().
  std::string serialize() const;
  static PhraseIndex deserialize(const std::string& bytes);

  std::uint32_t dim() const noexcept { return dim_; }
  std::uint32_t half_dim() const noexcept { return dim_ / 2; }
  std::uint32_t token_dim() const noexcept { return token_dim_; }
  std::uint32_t max_len() const noexcept { return max_len_; }
  std::uint64_t seed() const noexcept { return seed_; }
  double alpha() const noexcept { return alpha_; }
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  std::size_t vocab_size() const noexcept { return vocab_.size(); }
  std::size_t num_docs() const noexcept { return doc_offsets_.empty() ? 0 : doc_offsets_.size() - 1; }
  std::size_t total_tokens() const noexcept { return tokens_.size(); }
  const Vocabulary& vocabulary() const noexcept { return vocab_; }

  std::span<const TokenId> doc_tokens(DocId doc) const;
  DocumentRepsView doc_reps(DocId doc) const;
  std::span<const float> doc_vector(DocId doc) const;
  std::span<const float> token_row(TokenId w) const;

  bool operator==(const PhraseIndex&) const = default;

 private:
  std::uint32_t dim_ = 0;
  std::uint32_t token_dim_ = 0;
  std::uint32_t max_len_ = 0;
  std::uint64_t seed_ = 0;
  double alpha_ = 0.0;
  std::uint64_t fingerprint_ = 0;
  Vocabulary vocab_;
  std::vector<float> token_table_;
  std::vector<std::uint64_t> doc_offsets_;
  std::vector<TokenId> tokens_;
  std::vector<float> start_;
  std::vector<float> end_;
  std::vector<float> doc_vectors_;
};

inline PhraseIndex build_index(const Corpus& corpus, const EncoderBackend& backend,
                               std::uint32_t max_len = 8) {
  return PhraseIndex::build(corpus, backend, max_len);
}
inline void save_index(const PhraseIndex& index, const std::string& path) { index.save(path); }
inline PhraseIndex load_index(const std::string& path) { return PhraseIndex::load(path); }

struct SearchConfig {
  std::size_t k_docs = 1024;
  bool include_tokens = true;
  bool tokens_only = false;
};

/// Coarse stage: top-k documents by cosine between the prefix retrieval
/// vector and each document vector; ties by ascending id.
std::vector<DocId> retrieve_documents(const PhraseIndex& index, const PrefixState& prefix,
                                      std::size_t k);

/// Candidates in canonical order: tokens by id, then phrases by (doc, s, e).
/// Vectors live in one contiguous buffer.
class CandidateSet {
 public:
  explicit CandidateSet(std::size_t dim) : dim_(dim) {}

  void add(const Segment& ref, std::span<const float> vector);
  std::span<float> add_uninitialized(const Segment& ref);

  std::size_t size() const noexcept { return refs_.size(); }
  bool empty() const noexcept { return refs_.empty(); }
  std::size_t dim() const noexcept { return dim_; }
  const Segment& ref(std::size_t i) const { return refs_[i]; }
  std::span<const Segment> refs() const noexcept { return refs_; }
  std::span<const float> vector(std::size_t i) const {
    return {vectors_.data() + i * dim_, dim_};
  }
  std::span<const double> scores() const noexcept { return scores_; }
  std::vector<double>& mutable_scores() noexcept { return scores_; }

 private:
  std::size_t dim_;
  std::vector<Segment> refs_;
  std::vector<float> vectors_;
  std::vector<double> scores_;
};

/// Fine stage input: all spans of length 1..max_len of each listed document
/// plus, per `config`, the token candidates.
CandidateSet collect_candidates(const PhraseIndex& index, std::span<const DocId> docs,
                                const SearchConfig& config);

/// Fitness q . v for every candidate, written into the set's scores.
void score_candidates(std::span<const float> query, CandidateSet& candidates);

/// Candidate references with their scores but no stored vectors. Same order
/// and bit-identical scores as collect_candidates followed by
/// score_candidates; a span's score is split into a start-row dot and an
/// end-row dot, so each row is dotted with the query once.
struct ScoredCandidates {
  std::vector<Segment> refs;
  std::vector<double> scores;
};

ScoredCandidates score_all(const PhraseIndex& index, std::span<const float> query,
                           std::span<const DocId> docs, const SearchConfig& config);

/// Number of phrase candidates a document of length m contributes.
std::size_t span_count(std::size_t m, std::size_t max_len) noexcept;

}  // namespace cog
