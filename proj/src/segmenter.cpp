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
#include "cog/segmenter.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "cog/encoder.hpp"
#include "json.hpp"

namespace cog {

using nlohmann::json;

void SegmenterConfig::validate() const {
  if (min_len < 1 || min_len > max_len) throw UsageError("segmenter requires 1 <= lmin <= lmax");
  if (k_neighbors < 1) throw UsageError("segmenter requires k >= 1");
}

NeighborIndex::NeighborIndex(const Corpus& corpus, std::uint64_t seed, std::uint32_t dim) {
  const auto params = ToyParams::seeded(static_cast<std::uint32_t>(corpus.vocabulary().size()),
                                        dim, seed);
  pooled_.reserve(corpus.size());
  for (const auto& d : corpus.documents()) pooled_.push_back(mean_context(params, d.tokens));
}

std::vector<DocId> NeighborIndex::neighbors(DocId doc, std::size_t k) const {
  if (doc >= pooled_.size()) throw DataError("document id out of range: " + std::to_string(doc));
  std::vector<std::pair<double, DocId>> scored;
  scored.reserve(pooled_.size());
  for (DocId other = 0; other < pooled_.size(); ++other) {
    if (other == doc) continue;
    scored.emplace_back(cosine(pooled_[doc], pooled_[other]), other);
  }
  auto cmp = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), cmp);
  std::vector<DocId> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(scored[i].second);
  return out;
}

std::vector<DocId> neighbors(const Corpus& corpus, DocId doc, std::size_t k,
                             const SegmenterConfig& config) {
  return NeighborIndex(corpus, config.seed, config.dim).neighbors(doc, k);
}

std::optional<PhraseHit> search_phrase(const Corpus& corpus, std::span<const TokenId> query,
                                       std::span<const DocId> candidates) {
  if (query.empty()) throw DataError("search_phrase requires a non-empty query");
  for (DocId id : candidates) {
    const auto& tokens = corpus.doc(id).tokens;
    if (tokens.size() < query.size()) continue;
    auto it = std::search(tokens.begin(), tokens.end(), query.begin(), query.end());
    if (it != tokens.end()) {
      return PhraseHit{id, static_cast<std::uint32_t>(it - tokens.begin())};
    }
  }
  return std::nullopt;
}

SegmentedDocument segment_document(const Corpus& corpus, DocId doc,
                                   const SegmenterConfig& config,
                                   std::span<const DocId> ranked_neighbors) {
  config.validate();
  const auto& tokens = corpus.doc(doc).tokens;
  SegmentedDocument out{doc, {}};
  std::size_t cursor = 0;
  while (cursor < tokens.size()) {
    const std::size_t remaining = tokens.size() - cursor;
    const std::size_t longest = std::min<std::size_t>(config.max_len, remaining);
    std::optional<Segment> phrase;
    for (std::size_t len = longest; len >= config.min_len; --len) {
      std::span<const TokenId> query(tokens.data() + cursor, len);
      if (auto hit = search_phrase(corpus, query, ranked_neighbors)) {
        phrase = Segment::phrase(hit->doc, hit->start,
                                 hit->start + static_cast<std::uint32_t>(len) - 1);
        break;
      }
    }
    if (phrase) {
      out.segments.push_back(*phrase);
      cursor += phrase->length();
    } else {
      out.segments.push_back(Segment::single_token(tokens[cursor]));
      ++cursor;
    }
  }
  return out;
}

SegmentedDocument segment_document(const Corpus& corpus, DocId doc,
                                   const SegmenterConfig& config) {
  config.validate();
  corpus.doc(doc);
  const auto ranked = NeighborIndex(corpus, config.seed, config.dim)
                          .neighbors(doc, config.k_neighbors);
  return segment_document(corpus, doc, config, ranked);
}

SegmentedDocument brute_force_segment(const Corpus& corpus, DocId doc,
                                      const SegmenterConfig& config) {
  config.validate();
  const auto& tokens = corpus.doc(doc).tokens;
  // The ranking only decides provenance among equally long matches.
  const auto ranked = NeighborIndex(corpus, config.seed, config.dim).neighbors(doc, corpus.size());
  std::vector<std::size_t> rank_of(corpus.size(), corpus.size());
  for (std::size_t r = 0; r < ranked.size(); ++r) rank_of[ranked[r]] = r;

  SegmentedDocument out{doc, {}};
  std::size_t cursor = 0;
  while (cursor < tokens.size()) {
    const std::size_t cap = std::min<std::size_t>(config.max_len, tokens.size() - cursor);
    std::size_t best_len = 0;
    DocId best_doc = 0;
    std::uint32_t best_start = 0;
    for (DocId other = 0; other < corpus.size(); ++other) {
      if (other == doc) continue;
      const auto& src = corpus.doc(other).tokens;
      for (std::size_t s = 0; s < src.size(); ++s) {
        std::size_t lcp = 0;
        while (lcp < cap && s + lcp < src.size() && src[s + lcp] == tokens[cursor + lcp]) ++lcp;
        if (lcp == 0) continue;
        const bool better =
            lcp > best_len ||
            (lcp == best_len &&
             (rank_of[other] < rank_of[best_doc] ||
              (other == best_doc && s < best_start)));
        if (better) {
          best_len = lcp;
          best_doc = other;
          best_start = static_cast<std::uint32_t>(s);
        }
      }
    }
    if (best_len >= config.min_len) {
      out.segments.push_back(Segment::phrase(
          best_doc, best_start, best_start + static_cast<std::uint32_t>(best_len) - 1));
      cursor += best_len;
    } else {
      out.segments.push_back(Segment::single_token(tokens[cursor]));
      ++cursor;
    }
  }
  return out;
}

std::vector<SegmentedDocument> segment_corpus(const Corpus& corpus,
                                              const SegmenterConfig& config) {
  config.validate();
  std::vector<SegmentedDocument> out;
  if (corpus.empty()) return out;
  const NeighborIndex index(corpus, config.seed, config.dim);
  out.reserve(corpus.size());
  for (const auto& d : corpus.documents()) {
    if (d.tokens.empty()) continue;
    const auto ranked = index.neighbors(d.id, config.k_neighbors);
    out.push_back(segment_document(corpus, d.id, config, ranked));
  }
  return out;
}

std::vector<TokenId> reconstruct(const Corpus& corpus, const SegmentedDocument& seg) {
  std::vector<TokenId> out;
  for (const auto& s : seg.segments) {
    if (s.is_phrase()) {
      const auto& src = corpus.doc(s.source_doc).tokens;
      if (s.start > s.end || s.end >= src.size()) throw DataError("segment span out of range");
      out.insert(out.end(), src.begin() + s.start, src.begin() + s.end + 1);
    } else {
      out.push_back(s.token);
    }
  }
  return out;
}

void write_segmentation(std::ostream& out, std::span<const SegmentedDocument> docs) {
  for (const auto& d : docs) {
    json segs = json::array();
    for (const auto& s : d.segments) {
      if (s.is_phrase()) {
        segs.push_back({{"kind", "phrase"}, {"src", s.source_doc}, {"s", s.start}, {"e", s.end}});
      } else {
        segs.push_back({{"kind", "token"}, {"id", s.token}});
      }
    }
    out << json{{"doc", d.doc_id}, {"segments", std::move(segs)}}.dump() << '\n';
  }
}

std::vector<SegmentedDocument> read_segmentation(std::istream& in) {
  std::vector<SegmentedDocument> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto rec = json::parse(line);
      SegmentedDocument d;
      d.doc_id = rec.at("doc").get<DocId>();
      for (const auto& s : rec.at("segments")) {
        const auto kind = s.at("kind").get<std::string>();
        if (kind == "phrase") {
          d.segments.push_back(Segment::phrase(s.at("src").get<DocId>(),
                                               s.at("s").get<std::uint32_t>(),
                                               s.at("e").get<std::uint32_t>()));
        } else if (kind == "token") {
          d.segments.push_back(Segment::single_token(s.at("id").get<TokenId>()));
        } else {
          throw DataError("unknown segment kind '" + kind + "'");
        }
      }
      docs.push_back(std::move(d));
    } catch (const json::exception& e) {
      throw DataError("segmentation line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("segmentation line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return docs;
}

}  // namespace cog
