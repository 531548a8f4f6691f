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
#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "cog/segmenter.hpp"
#include "test_support.hpp"

namespace cog {
namespace {

TokenId id_of(const Corpus& c, const std::string& s) { return *c.vocabulary().find(s); }

}  // namespace

TEST(Neighbors, AllOthersWhenKCoversCorpus) {
  const auto c = testing::corpus_from_texts({"a b", "b c", "c d", "d e"});
  auto n = neighbors(c, 1, 3);
  std::sort(n.begin(), n.end());
  EXPECT_EQ(n, (std::vector<DocId>{0, 2, 3}));
  EXPECT_EQ(neighbors(c, 1, 10).size(), 3u);
}

TEST(Neighbors, SingletonCorpusHasNone) {
  const auto c = testing::corpus_from_texts({"a b c"});
  EXPECT_TRUE(neighbors(c, 0, 5).empty());
}

TEST(Neighbors, SharedTokensRankFirst) {
  const auto c = testing::corpus_from_texts({"red green blue", "red green blue", "one two three"});
  EXPECT_EQ(neighbors(c, 0, 1), (std::vector<DocId>{1}));
}

TEST(SearchPhrase, EmptyCandidateSet) {
  const auto c = testing::corpus_from_texts({"the cat", "the cat ran"});
  EXPECT_FALSE(search_phrase(c, c.doc(0).tokens, std::vector<DocId>{}).has_value());
}

TEST(SearchPhrase, FindsPrefixOfNeighbour) {
  const auto c = testing::corpus_from_texts({"the cat", "the cat ran"});
  const auto hit = search_phrase(c, c.doc(0).tokens, std::vector<DocId>{1});
  ASSERT_TRUE(hit.has_value());
  EXPECT_EQ(*hit, (PhraseHit{1, 0}));
}

TEST(SearchPhrase, LongerThanEveryNeighbour) {
  const auto c = testing::corpus_from_texts({"the cat ran far", "the cat", "cat ran"});
  EXPECT_FALSE(search_phrase(c, c.doc(0).tokens, std::vector<DocId>{1, 2}).has_value());
}

TEST(SegmentDocument, WorkedExample) {
  const auto c = testing::corpus_from_texts(
      {"the cat sat on the mat", "the cat ran", "on the mat he sat"});
  SegmenterConfig cfg;
  const auto seg = segment_document(c, 0, cfg);
  const std::vector<Segment> expected = {Segment::phrase(1, 0, 1),
                                         Segment::single_token(id_of(c, "sat")),
                                         Segment::phrase(2, 0, 2)};
  EXPECT_EQ(seg.segments, expected);
  EXPECT_EQ(brute_force_segment(c, 0, cfg).segments, expected);
  EXPECT_EQ(reconstruct(c, seg), c.doc(0).tokens);
}

TEST(SegmentDocument, NoSharedBigramGivesTokens) {
  const auto c = testing::corpus_from_texts({"a b c d", "b a d c", "c a"});
  const auto seg = segment_document(c, 0, SegmenterConfig{});
  ASSERT_EQ(seg.segments.size(), 4u);
  for (const auto& s : seg.segments) EXPECT_FALSE(s.is_phrase());
}

TEST(SegmentDocument, IdenticalShortNeighbourIsOnePhrase) {
  const auto c = testing::corpus_from_texts({"x y z w", "q x y z w", "x y z w"});
  const auto seg = segment_document(c, 0, SegmenterConfig{});
  ASSERT_EQ(seg.segments.size(), 1u);
  EXPECT_TRUE(seg.segments[0].is_phrase());
  EXPECT_EQ(seg.segments[0].length(), 4u);
  EXPECT_EQ(seg, brute_force_segment(c, 0, SegmenterConfig{}));
}

TEST(SegmentDocument, PhrasesRespectMaxLength) {
  std::string long_text;
  for (int i = 0; i < 20; ++i) long_text += "t" + std::to_string(i) + " ";
  const auto c = testing::corpus_from_texts({long_text, long_text});
  SegmenterConfig cfg;
  cfg.max_len = 8;
  const auto seg = segment_document(c, 0, cfg);
  EXPECT_EQ(seg.segments.size(), 3u);
  for (const auto& s : seg.segments) EXPECT_LE(s.length(), 8u);
}

TEST(SegmentDocument, SingletonCorpusIsAllTokens) {
  const auto c = testing::corpus_from_texts({"a b a b"});
  const auto seg = brute_force_segment(c, 0, SegmenterConfig{});
  EXPECT_EQ(seg.segments.size(), 4u);
  EXPECT_EQ(seg, segment_document(c, 0, SegmenterConfig{}));
}

TEST(SegmenterConfig, RejectsInvalidLengths) {
  SegmenterConfig cfg;
  cfg.min_len = 0;
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg.min_len = 5;
  cfg.max_len = 4;
  EXPECT_THROW(cfg.validate(), UsageError);
}

TEST(SegmentationIo, RoundTrip) {
  const auto c = testing::corpus_from_texts(
      {"the cat sat on the mat", "the cat ran", "on the mat he sat"});
  const auto segs = segment_corpus(c, SegmenterConfig{});
  std::stringstream buf;
  write_segmentation(buf, segs);
  EXPECT_EQ(read_segmentation(buf), segs);
}

TEST(SegmentationIo, RejectsMalformedRecord) {
  std::istringstream in("{\"doc\": 0, \"segments\": [{\"kind\": \"phrase\", \"src\": 1}]}\n");
  EXPECT_THROW(read_segmentation(in), DataError);
}

// Property: every segmentation reconstructs its document, and with every
// other document searched the greedy search equals the exhaustive scan.
TEST(SegmenterProperty, ReconstructionAndOracleAgreement) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto c = testing::random_corpus(seed, 8, 25, 4);
    SegmenterConfig cfg;
    cfg.k_neighbors = static_cast<std::uint32_t>(std::max<std::size_t>(c.size(), 1));
    for (DocId d = 0; d < c.size(); ++d) {
      const auto fast = segment_document(c, d, cfg);
      ASSERT_EQ(reconstruct(c, fast), c.doc(d).tokens) << "seed " << seed << " doc " << d;
      ASSERT_EQ(fast, brute_force_segment(c, d, cfg)) << "seed " << seed << " doc " << d;
    }
  }
}

}  // namespace cog
