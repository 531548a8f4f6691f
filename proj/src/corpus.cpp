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
#include "cog/corpus.hpp"

#include <fstream>
#include <istream>
#include <unordered_set>

#include "json.hpp"

namespace cog {

using nlohmann::json;

Vocabulary::Vocabulary() {
  surfaces_.emplace_back(kUnkSurface);
  ids_.emplace(std::string(kUnkSurface), kUnkId);
}

TokenId Vocabulary::intern(std::string_view surface) {
  if (auto id = find(surface)) return *id;
  if (frozen_) return kUnkId;
  const auto id = static_cast<TokenId>(surfaces_.size());
  surfaces_.emplace_back(surface);
  ids_.emplace(std::string(surface), id);
  return id;
}

std::optional<TokenId> Vocabulary::find(std::string_view surface) const {
  auto it = ids_.find(std::string(surface));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::surface(TokenId id) const {
  if (!contains(id)) throw DataError("unknown token id " + std::to_string(id));
  return surfaces_[id];
}

Vocabulary Vocabulary::from_surfaces(std::vector<std::string> surfaces) {
  if (surfaces.empty() || surfaces.front() != kUnkSurface) {
    throw DataError("vocabulary must start with the UNK surface");
  }
  Vocabulary vocab;
  for (std::size_t i = 1; i < surfaces.size(); ++i) {
    if (vocab.find(surfaces[i])) throw DataError("duplicate vocabulary surface: " + surfaces[i]);
    vocab.intern(surfaces[i]);
  }
  return vocab;
}

bool is_valid_utf8(std::string_view text) noexcept {
  std::size_t i = 0;
  const auto* s = reinterpret_cast<const unsigned char*>(text.data());
  const std::size_t n = text.size();
  while (i < n) {
    const unsigned char c = s[i];
    std::size_t len = 0;
    char32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((s[i + k] & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (s[i + k] & 0x3F);
    }
    // Overlong forms, surrogates and out-of-range code points.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += len;
  }
  return true;
}

namespace {

// Decodes the code point at `i` (input already validated) and its length.
char32_t decode_at(std::string_view text, std::size_t i, std::size_t& len) {
  const auto c = static_cast<unsigned char>(text[i]);
  if (c < 0x80) {
    len = 1;
    return c;
  }
  len = (c & 0xE0) == 0xC0 ? 2 : (c & 0xF0) == 0xE0 ? 3 : 4;
  char32_t cp = c & (len == 2 ? 0x1F : len == 3 ? 0x0F : 0x07);
  for (std::size_t k = 1; k < len; ++k) {
    cp = (cp << 6) | (static_cast<unsigned char>(text[i + k]) & 0x3F);
  }
  return cp;
}

bool is_unicode_space(char32_t cp) noexcept {
  return (cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 || cp == 0xA0 ||
         cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 ||
         cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

bool is_ascii_punct(char32_t cp) noexcept {
  return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
         (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
}

}  // namespace

std::vector<std::string> split_surfaces(std::string_view text) {
  if (!is_valid_utf8(text)) throw DataError("text is not valid UTF-8");
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) out.push_back(std::move(word));
    word.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t len = 0;
    const char32_t cp = decode_at(text, i, len);
    if (is_unicode_space(cp)) {
      flush();
    } else if (is_ascii_punct(cp)) {
      flush();
      out.emplace_back(1, static_cast<char>(cp));
    } else {
      word.append(text.substr(i, len));
    }
    i += len;
  }
  flush();
  return out;
}

std::vector<TokenId> tokenize(std::string_view text, Vocabulary& vocab) {
  std::vector<TokenId> ids;
  for (const auto& surface : split_surfaces(text)) ids.push_back(vocab.intern(surface));
  return ids;
}

std::string detokenize(std::span<const TokenId> tokens, const Vocabulary& vocab) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += vocab.surface(tokens[i]);
  }
  return out;
}

Corpus::Corpus(std::vector<Document> documents, Vocabulary vocabulary)
    : documents_(std::move(documents)), vocabulary_(std::move(vocabulary)) {
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    if (documents_[i].id != i) throw DataError("document ids must be dense 0..N-1");
    for (TokenId t : documents_[i].tokens) {
      if (!vocabulary_.contains(t)) {
        throw DataError("document " + std::to_string(i) + " holds unknown token id " +
                        std::to_string(t));
      }
    }
  }
  vocabulary_.freeze();
}

const Document& Corpus::doc(DocId id) const {
  if (id >= documents_.size()) throw DataError("document id out of range: " + std::to_string(id));
  return documents_[id];
}

std::size_t Corpus::total_tokens() const noexcept {
  std::size_t total = 0;
  for (const auto& d : documents_) total += d.tokens.size();
  return total;
}

void Corpus::save(const std::string& path) const {
  json docs = json::array();
  for (const auto& d : documents_) {
    docs.push_back({{"id", d.external_id}, {"text", d.text}, {"tokens", d.tokens}});
  }
  json root = {{"format", "cog-corpus"},
               {"version", 1},
               {"vocab", vocabulary_.surfaces()},
               {"documents", std::move(docs)}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus file: " + path);
  out << root.dump() << '\n';
}

Corpus Corpus::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file: " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("corpus file " + path + " is not valid JSON: " + e.what());
  }
  if (root.value("format", "") != "cog-corpus") throw DataError(path + " is not a cog corpus");
  if (root.value("version", 0) != 1) throw DataError("unsupported corpus version in " + path);
  try {
    auto vocab = Vocabulary::from_surfaces(root.at("vocab").get<std::vector<std::string>>());
    std::vector<Document> docs;
    for (const auto& d : root.at("documents")) {
      Document doc;
      doc.id = static_cast<DocId>(docs.size());
      doc.external_id = d.at("id").get<std::int64_t>();
      doc.text = d.at("text").get<std::string>();
      doc.tokens = d.at("tokens").get<std::vector<TokenId>>();
      docs.push_back(std::move(doc));
    }
    return Corpus(std::move(docs), std::move(vocab));
  } catch (const json::exception& e) {
    throw DataError("malformed corpus file " + path + ": " + e.what());
  }
}

Corpus ingest_corpus(std::istream& in, Vocabulary vocab) {
  std::vector<Document> docs;
  std::unordered_set<std::int64_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception&) {
      throw DataError(where + ": record is not valid JSON");
    }
    if (!record.is_object() || !record.contains("id") || !record.contains("text") ||
        !record["id"].is_number_integer() || !record["text"].is_string()) {
      throw DataError(where + ": expected {\"id\": int, \"text\": string}");
    }
    Document doc;
    doc.external_id = record["id"].get<std::int64_t>();
    if (!seen.insert(doc.external_id).second) {
      throw DataError(where + ": duplicate document id " + std::to_string(doc.external_id));
    }
    doc.text = record["text"].get<std::string>();
    if (!is_valid_utf8(doc.text)) throw DataError(where + ": text is not valid UTF-8");
    doc.id = static_cast<DocId>(docs.size());
    doc.tokens = tokenize(doc.text, vocab);
    docs.push_back(std::move(doc));
  }
  return Corpus(std::move(docs), std::move(vocab));
}

Corpus ingest_corpus_file(const std::string& path, Vocabulary vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus input: " + path);
  return ingest_corpus(in, std::move(vocab));
}

}  // namespace cog
