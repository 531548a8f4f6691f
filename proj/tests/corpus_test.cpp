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

#include <sstream>

#include "cog/corpus.hpp"
#include "test_support.hpp"

namespace cog {
namespace {

std::vector<std::string> surfaces_of(std::string_view text) {
  Vocabulary v;
  const auto ids = tokenize(text, v);
  std::vector<std::string> out;
  for (auto id : ids) out.push_back(v.surface(id));
  return out;
}

}  // namespace

TEST(Tokenize, PeelsSentencePunctuation) {
  EXPECT_EQ(surfaces_of("The cat sat."), (std::vector<std::string>{"The", "cat", "sat", "."}));
}

TEST(Tokenize, EmptyText) { EXPECT_TRUE(surfaces_of("").empty()); }

TEST(Tokenize, InnerPunctuationIsSplit) {
  EXPECT_EQ(surfaces_of("a,b"), (std::vector<std::string>{"a", ",", "b"}));
}

TEST(Tokenize, UnicodeWhitespaceSeparates) {
  // no-break space and ideographic space
  EXPECT_EQ(surfaces_of("a\xC2\xA0" "b\xE3\x80\x80" "c"),
            (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Tokenize, RejectsInvalidUtf8) {
  Vocabulary v;
  EXPECT_THROW(tokenize("bad \xFF byte", v), DataError);
}

TEST(Tokenize, FrozenVocabularyMapsUnseenToUnk) {
  Vocabulary v;
  tokenize("a b", v);
  v.freeze();
  const auto ids = tokenize("a z b", v);
  ASSERT_EQ(ids.size(), 3u);
  EXPECT_EQ(ids[1], kUnkId);
  EXPECT_EQ(v.size(), 3u);
}

TEST(Detokenize, JoinsWithSingleSpaces) {
  Vocabulary v;
  const TokenId a = v.intern("a"), b = v.intern("b"), comma = v.intern(",");
  EXPECT_EQ(detokenize(std::vector<TokenId>{a, b}, v), "a b");
  EXPECT_EQ(detokenize(std::vector<TokenId>{}, v), "");
  EXPECT_EQ(detokenize(std::vector<TokenId>{a, comma, b}, v), "a , b");
}

TEST(Detokenize, TokenLevelRoundTrip) {
  Vocabulary v;
  const auto ids = tokenize("Hello, world! It's 3.5 (roughly).", v);
  v.freeze();
  EXPECT_EQ(tokenize(detokenize(ids, v), v), ids);
}

TEST(Ingest, NoRecordsGivesUnkOnlyVocabulary) {
  std::istringstream in("");
  const auto c = ingest_corpus(in);
  EXPECT_EQ(c.size(), 0u);
  EXPECT_EQ(c.vocabulary().size(), 1u);
  EXPECT_EQ(c.vocabulary().surface(kUnkId), std::string(kUnkSurface));
}

TEST(Ingest, TwoRecordsHandCount) {
  std::istringstream in("{\"id\": 1, \"text\": \"a b\"}\n{\"id\": 2, \"text\": \"b c\"}\n");
  const auto c = ingest_corpus(in);
  EXPECT_EQ(c.size(), 2u);
  EXPECT_EQ(c.vocabulary().size(), 4u);
  EXPECT_EQ(c.doc(1).external_id, 2);
  EXPECT_EQ(c.total_tokens(), 4u);
}

TEST(Ingest, DuplicateIdIsAnError) {
  std::istringstream in("{\"id\": 1, \"text\": \"a\"}\n{\"id\": 1, \"text\": \"b\"}\n");
  EXPECT_THROW(ingest_corpus(in), DataError);
}

TEST(Ingest, MalformedRecordNamesTheLine) {
  std::istringstream in("{\"id\": 1, \"text\": \"a\"}\n\n{\"id\": \"x\"}\n");
  try {
    ingest_corpus(in);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Ingest, BlankLinesAreSkipped) {
  std::istringstream in("\n{\"id\": 5, \"text\": \"x\"}\n\n");
  EXPECT_EQ(ingest_corpus(in).size(), 1u);
}

TEST(Corpus, SaveLoadRoundTrip) {
  testing::TempDir dir;
  const auto c = testing::corpus_from_texts({"the cat sat .", "on the mat", ""});
  c.save(dir.file("c.json"));
  const auto back = Corpus::load(dir.file("c.json"));
  ASSERT_EQ(back.size(), c.size());
  EXPECT_EQ(back.vocabulary(), c.vocabulary());
  EXPECT_TRUE(back.vocabulary().frozen());
  for (DocId i = 0; i < c.size(); ++i) {
    EXPECT_EQ(back.doc(i).tokens, c.doc(i).tokens);
    EXPECT_EQ(back.doc(i).text, c.doc(i).text);
  }
}

TEST(Corpus, UnknownDocumentIdThrows) {
  const auto c = testing::corpus_from_texts({"a"});
  EXPECT_THROW(c.doc(3), DataError);
}

}  // namespace cog
