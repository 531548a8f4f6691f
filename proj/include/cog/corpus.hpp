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
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cog/common.hpp"

namespace cog {

inline constexpr TokenId kUnkId = 0;
// Contains no ASCII punctuation, so it survives a detokenize/tokenize cycle.
inline constexpr std::string_view kUnkSurface = "\xE2\x9F\xA8unk\xE2\x9F\xA9";  // ⟨unk⟩

/// Bijection between token ids and surfaces. Id 0 is always UNK.
class Vocabulary {
 public:
  Vocabulary();

  /// Returns the id of `surface`, adding it when the vocabulary is mutable.
  /// A frozen vocabulary maps unseen surfaces to kUnkId.
  TokenId intern(std::string_view surface);
  std::optional<TokenId> find(std::string_view surface) const;
  const std::string& surface(TokenId id) const;

  std::size_t size() const noexcept { return surfaces_.size(); }
  bool contains(TokenId id) const noexcept { return id < surfaces_.size(); }

  void freeze() noexcept { frozen_ = true; }
  bool frozen() const noexcept { return frozen_; }

  const std::vector<std::string>& surfaces() const noexcept { return surfaces_; }
  static Vocabulary from_surfaces(std::vector<std::string> surfaces);

  bool operator==(const Vocabulary& other) const { return surfaces_ == other.surfaces_; }

 private:
  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, TokenId> ids_;
  bool frozen_ = false;
};

bool is_valid_utf8(std::string_view text) noexcept;

/// Splits on Unicode whitespace, then splits every ASCII punctuation
/// character out as a standalone piece. Requires valid UTF-8.
std::vector<std::string> split_surfaces(std::string_view text);

std::vector<TokenId> tokenize(std::string_view text, Vocabulary& vocab);

/// Joins surfaces with single spaces. Punctuation is not re-attached, so
/// this inverts tokenize only at the token level.
std::string detokenize(std::span<const TokenId> tokens, const Vocabulary& vocab);

struct Document {
  DocId id = 0;               // dense position in the corpus
  std::int64_t external_id = 0;  // the "id" field of the source record
  std::string text;
  std::vector<TokenId> tokens;
};

/// Immutable after ingestion.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<Document> documents, Vocabulary vocabulary);

  const std::vector<Document>& documents() const noexcept { return documents_; }
  const Document& doc(DocId id) const;
  const Vocabulary& vocabulary() const noexcept { return vocabulary_; }
  std::size_t size() const noexcept { return documents_.size(); }
  bool empty() const noexcept { return documents_.empty(); }
  std::size_t total_tokens() const noexcept;

  void save(const std::string& path) const;
  static Corpus load(const std::string& path);

 private:
  std::vector<Document> documents_;
  Vocabulary vocabulary_;
};

/// Reads line-delimited {"id": int, "text": string} records. Blank lines
/// are skipped. Pass a frozen vocabulary to ingest against a fixed token set.
Corpus ingest_corpus(std::istream& in, Vocabulary vocab = Vocabulary());
Corpus ingest_corpus_file(const std::string& path, Vocabulary vocab = Vocabulary());

}  // namespace cog
