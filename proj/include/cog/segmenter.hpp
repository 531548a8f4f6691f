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
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "cog/common.hpp"
#include "cog/corpus.hpp"
#include "cog/toy_model.hpp"

namespace cog {

/// A generation / training unit: a span copied from a source document, or a
/// single token from the fixed vocabulary.
struct Segment {
  enum class Kind : std::uint8_t { kPhrase, kToken };

  Kind kind = Kind::kToken;
  DocId source_doc = 0;    // phrase only
  std::uint32_t start = 0;  // phrase only, inclusive
  std::uint32_t end = 0;    // phrase only, inclusive
  TokenId token = 0;        // token only

  static Segment phrase(DocId doc, std::uint32_t s, std::uint32_t e) {
    return {Kind::kPhrase, doc, s, e, 0};
  }
  static Segment single_token(TokenId w) { return {Kind::kToken, 0, 0, 0, w}; }

  bool is_phrase() const noexcept { return kind == Kind::kPhrase; }
  std::size_t length() const noexcept { return is_phrase() ? end - start + 1 : 1; }

  bool operator==(const Segment&) const = default;
};

struct SegmentedDocument {
  DocId doc_id = 0;
  std::vector<Segment> segments;

  bool operator==(const SegmentedDocument&) const = default;
};

struct SegmenterConfig {
  std::uint32_t min_len = 2;
  std::uint32_t max_len = 8;
  std::uint32_t k_neighbors = 16;
  // Seeded toy encoder used for document similarity.
  std::uint64_t seed = 0;
  std::uint32_t dim = ToyParams::kDefaultDim;

  void validate() const;
};

/// Ranks the other documents of a corpus by cosine similarity of mean-pooled
/// seeded toy contextual vectors, ties broken by ascending id.
class NeighborIndex {
 public:
  NeighborIndex(const Corpus& corpus, std::uint64_t seed, std::uint32_t dim);

  std::vector<DocId> neighbors(DocId doc, std::size_t k) const;

 private:
  std::vector<std::vector<float>> pooled_;
};

std::vector<DocId> neighbors(const Corpus& corpus, DocId doc, std::size_t k,
                             const SegmenterConfig& config = {});

struct PhraseHit {
  DocId doc = 0;
  std::uint32_t start = 0;
  bool operator==(const PhraseHit&) const = default;
};

/// First occurrence of `query` as a contiguous run, scanning `candidates` in
/// the given order and each document left to right.
std::optional<PhraseHit> search_phrase(const Corpus& corpus, std::span<const TokenId> query,
                                       std::span<const DocId> candidates);

/// Greedy forward maximum matching against the top-k neighbours.
SegmentedDocument segment_document(const Corpus& corpus, DocId doc,
                                   const SegmenterConfig& config);
SegmentedDocument segment_document(const Corpus& corpus, DocId doc,
                                   const SegmenterConfig& config,
                                   std::span<const DocId> ranked_neighbors);

/// Exhaustive oracle: longest-common-prefix scan over every other document.
SegmentedDocument brute_force_segment(const Corpus& corpus, DocId doc,
                                      const SegmenterConfig& config);

/// Segments every non-empty document, in id order.
std::vector<SegmentedDocument> segment_corpus(const Corpus& corpus,
                                              const SegmenterConfig& config);

/// Concatenated surface tokens of a segmentation.
std::vector<TokenId> reconstruct(const Corpus& corpus, const SegmentedDocument& seg);

void write_segmentation(std::ostream& out, std::span<const SegmentedDocument> docs);
std::vector<SegmentedDocument> read_segmentation(std::istream& in);

}  // namespace cog
