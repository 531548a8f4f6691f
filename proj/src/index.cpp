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
#include "cog/index.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace cog {

namespace {

constexpr char kMagic[4] = {'C', 'O', 'G', '1'};
constexpr std::size_t kHeaderSize = 80;
constexpr std::size_t kSectionEntrySize = 24;

enum SectionId : std::uint32_t {
  kVocab = 1,
  kTokenTable = 2,
  kDocOffsets = 3,
  kDocTokens = 4,
  kStart = 5,
  kEnd = 6,
  kDocVectors = 7,
};
constexpr std::uint16_t kSectionCount = 7;

class Writer {
 public:
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(std::string_view s) { buf_.append(s); }
  std::string& buffer() { return buf_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string buf_;
};

class Reader {
 public:
  Reader(const std::string& buf, std::size_t pos, std::size_t end)
      : buf_(buf), pos_(pos), end_(end) {}
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == end_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > end_) {
      throw IndexFormatError(IndexFormatError::Reason::kMalformed, "index section overrun");
    }
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  const std::string& buf_;
  std::size_t pos_;
  std::size_t end_;
};

void write_floats(Writer& w, const std::vector<float>& v) {
  for (float x : v) w.f32(x);
}

std::vector<float> read_floats(Reader& r, std::size_t n) {
  std::vector<float> v(n);
  for (auto& x : v) x = r.f32();
  return v;
}

std::uint64_t checksum(const std::string& bytes, std::size_t from) {
  Fnv1a64 h;
  h.update(bytes.data() + from, bytes.size() - from);
  return h.digest();
}

}  // namespace

PhraseIndex PhraseIndex::build(const Corpus& corpus, const EncoderBackend& backend,
                               std::uint32_t max_len) {
  if (corpus.empty()) throw DataError("cannot index an empty corpus");
  if (max_len < 1) throw UsageError("max phrase length must be >= 1");
  const auto info = backend.info();
  if (info.vocab_size != corpus.vocabulary().size()) {
    throw DataError("dimension mismatch: encoder token table has " +
                    std::to_string(info.vocab_size) + " rows but the corpus vocabulary has " +
                    std::to_string(corpus.vocabulary().size()) + " tokens");
  }
  if (info.dim == 0 || info.dim % 2 != 0) throw DataError("encoder dimension must be even");

  PhraseIndex idx;
  idx.dim_ = info.dim;
  idx.token_dim_ = info.token_dim;
  idx.max_len_ = max_len;
  idx.seed_ = info.seed;
  idx.alpha_ = info.alpha;
  idx.fingerprint_ = info.fingerprint;
  idx.vocab_ = corpus.vocabulary();

  const std::size_t v = corpus.vocabulary().size();
  idx.token_table_.reserve(v * info.dim);
  for (TokenId w = 0; w < v; ++w) {
    const auto row = backend.token_embedding(w);
    if (row.size() != info.dim) {
      throw DataError("dimension mismatch: token embedding of size " + std::to_string(row.size()));
    }
    idx.token_table_.insert(idx.token_table_.end(), row.begin(), row.end());
  }

  const std::size_t h = idx.half_dim();
  idx.doc_offsets_.push_back(0);
  for (const auto& d : corpus.documents()) {
    idx.tokens_.insert(idx.tokens_.end(), d.tokens.begin(), d.tokens.end());
    idx.doc_offsets_.push_back(idx.tokens_.size());
    if (!d.tokens.empty()) {
      const auto reps = backend.encode_document(d.tokens);
      if (reps.rows != d.tokens.size() || reps.half != h) {
        throw DataError("encoder returned mis-shaped document representations");
      }
      idx.start_.insert(idx.start_.end(), reps.start.begin(), reps.start.end());
      idx.end_.insert(idx.end_.end(), reps.end.begin(), reps.end.end());
    }
    const auto vec = backend.document_vector(d.tokens);
    if (vec.size() != h) throw DataError("encoder returned a mis-shaped document vector");
    idx.doc_vectors_.insert(idx.doc_vectors_.end(), vec.begin(), vec.end());
  }
  return idx;
}

std::span<const TokenId> PhraseIndex::doc_tokens(DocId doc) const {
  if (doc >= num_docs()) throw DataError("document id out of range: " + std::to_string(doc));
  return {tokens_.data() + doc_offsets_[doc], doc_offsets_[doc + 1] - doc_offsets_[doc]};
}

DocumentRepsView PhraseIndex::doc_reps(DocId doc) const {
  const auto tokens = doc_tokens(doc);
  const std::size_t h = half_dim();
  const std::size_t from = doc_offsets_[doc] * h;
  return {tokens.size(), h, std::span<const float>(start_).subspan(from, tokens.size() * h),
          std::span<const float>(end_).subspan(from, tokens.size() * h)};
}

std::span<const float> PhraseIndex::doc_vector(DocId doc) const {
  if (doc >= num_docs()) throw DataError("document id out of range: " + std::to_string(doc));
  return std::span<const float>(doc_vectors_).subspan(std::size_t{doc} * half_dim(), half_dim());
}

std::span<const float> PhraseIndex::token_row(TokenId w) const {
  if (w >= vocab_size()) throw DataError("unknown token id " + std::to_string(w));
  return std::span<const float>(token_table_).subspan(std::size_t{w} * dim_, dim_);
}

std::string PhraseIndex::serialize() const {
  // Sections first, so the header can record offsets and the checksum.
  std::vector<std::string> sections(kSectionCount);
  {
    Writer w;
    w.u32(static_cast<std::uint32_t>(vocab_.size()));
    for (const auto& s : vocab_.surfaces()) {
      w.u32(static_cast<std::uint32_t>(s.size()));
      w.bytes(s);
    }
    sections[0] = std::move(w.buffer());
  }
  auto float_section = [](const std::vector<float>& v) {
    Writer w;
    write_floats(w, v);
    return std::move(w.buffer());
  };
  sections[1] = float_section(token_table_);
  {
    Writer w;
    for (auto o : doc_offsets_) w.u64(o);
    sections[2] = std::move(w.buffer());
  }
  {
    Writer w;
    for (auto t : tokens_) w.u32(t);
    sections[3] = std::move(w.buffer());
  }
  sections[4] = float_section(start_);
  sections[5] = float_section(end_);
  sections[6] = float_section(doc_vectors_);

  Writer body;
  std::uint64_t offset = kHeaderSize + kSectionCount * kSectionEntrySize;
  for (std::uint32_t i = 0; i < kSectionCount; ++i) {
    body.u32(i + 1);
    body.u32(0);
    body.u64(offset);
    body.u64(sections[i].size());
    offset += sections[i].size();
  }
  for (const auto& s : sections) body.bytes(s);

  Writer head;
  head.bytes(std::string_view(kMagic, 4));
  head.u16(kIndexFormatVersion);
  head.u16(kSectionCount);
  head.u32(dim_);
  head.u32(token_dim_);
  head.u32(max_len_);
  head.u32(static_cast<std::uint32_t>(vocab_.size()));
  head.u32(static_cast<std::uint32_t>(num_docs()));
  head.u32(0);
  head.u64(tokens_.size());
  head.u64(seed_);
  head.u64(fingerprint_);
  head.f64(alpha_);
  Fnv1a64 sum;
  sum.update(body.buffer());
  head.u64(sum.digest());
  head.u64(kHeaderSize + body.buffer().size());
  std::string out = std::move(head.buffer());
  out += body.buffer();
  return out;
}

PhraseIndex PhraseIndex::deserialize(const std::string& bytes) {
  using Reason = IndexFormatError::Reason;
  if (bytes.size() < 6) throw IndexFormatError(Reason::kTruncated, "index file truncated (header)");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw IndexFormatError(Reason::kBadMagic, "not a cog index file (bad magic)");
  }
  Reader head(bytes, 4, bytes.size());
  const std::uint16_t version = head.u16();
  if (version != kIndexFormatVersion) {
    throw IndexFormatError(Reason::kVersionMismatch,
                           "index format version " + std::to_string(version) +
                               " is not supported (expected " +
                               std::to_string(kIndexFormatVersion) + ")");
  }
  if (bytes.size() < kHeaderSize) {
    throw IndexFormatError(Reason::kTruncated, "index file truncated (header)");
  }
  PhraseIndex idx;
  const std::uint16_t section_count = head.u16();
  idx.dim_ = head.u32();
  idx.token_dim_ = head.u32();
  idx.max_len_ = head.u32();
  const std::uint32_t vocab_size = head.u32();
  const std::uint32_t num_docs = head.u32();
  head.u32();
  const std::uint64_t total_tokens = head.u64();
  idx.seed_ = head.u64();
  idx.fingerprint_ = head.u64();
  idx.alpha_ = head.f64();
  const std::uint64_t expected_sum = head.u64();
  const std::uint64_t file_size = head.u64();
  if (bytes.size() < file_size) {
    throw IndexFormatError(Reason::kTruncated, "index file truncated: " +
                                                   std::to_string(bytes.size()) + " of " +
                                                   std::to_string(file_size) + " bytes");
  }
  if (bytes.size() != file_size) {
    throw IndexFormatError(Reason::kMalformed, "index file has trailing bytes");
  }
  if (checksum(bytes, kHeaderSize) != expected_sum) {
    throw IndexFormatError(Reason::kChecksumMismatch, "index checksum mismatch");
  }
  if (section_count != kSectionCount || idx.dim_ == 0 || idx.dim_ % 2 != 0) {
    throw IndexFormatError(Reason::kMalformed, "index header is inconsistent");
  }

  Reader table(bytes, kHeaderSize, kHeaderSize + section_count * kSectionEntrySize);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> spans(section_count);
  for (std::uint16_t i = 0; i < section_count; ++i) {
    const std::uint32_t id = table.u32();
    table.u32();
    const std::uint64_t off = table.u64();
    const std::uint64_t size = table.u64();
    if (id != i + 1u || off + size > bytes.size()) {
      throw IndexFormatError(Reason::kMalformed, "index section table is inconsistent");
    }
    spans[i] = {off, size};
  }
  auto section = [&](SectionId id) {
    const auto [off, size] = spans[id - 1];
    return Reader(bytes, off, off + size);
  };

  const std::size_t h = idx.half_dim();
  {
    auto r = section(kVocab);
    const std::uint32_t n = r.u32();
    if (n != vocab_size) throw IndexFormatError(Reason::kMalformed, "vocabulary size mismatch");
    std::vector<std::string> surfaces;
    surfaces.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) surfaces.push_back(r.bytes(r.u32()));
    idx.vocab_ = Vocabulary::from_surfaces(std::move(surfaces));
    idx.vocab_.freeze();
  }
  {
    auto r = section(kTokenTable);
    idx.token_table_ = read_floats(r, std::size_t{vocab_size} * idx.dim_);
  }
  {
    auto r = section(kDocOffsets);
    idx.doc_offsets_.resize(std::size_t{num_docs} + 1);
    for (auto& o : idx.doc_offsets_) o = r.u64();
    if (idx.doc_offsets_.front() != 0 || idx.doc_offsets_.back() != total_tokens ||
        !std::is_sorted(idx.doc_offsets_.begin(), idx.doc_offsets_.end())) {
      throw IndexFormatError(Reason::kMalformed, "document offsets are inconsistent");
    }
  }
  {
    auto r = section(kDocTokens);
    idx.tokens_.resize(total_tokens);
    for (auto& t : idx.tokens_) {
      t = r.u32();
      if (t >= vocab_size) throw IndexFormatError(Reason::kMalformed, "token id out of range");
    }
  }
  {
    auto r = section(kStart);
    idx.start_ = read_floats(r, total_tokens * h);
  }
  {
    auto r = section(kEnd);
    idx.end_ = read_floats(r, total_tokens * h);
  }
  {
    auto r = section(kDocVectors);
    idx.doc_vectors_ = read_floats(r, std::size_t{num_docs} * h);
  }
  return idx;
}

void PhraseIndex::save(const std::string& path) const {
  const std::string bytes = serialize();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write index file: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing index file: " + path);
}

PhraseIndex PhraseIndex::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open index file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

std::vector<DocId> retrieve_documents(const PhraseIndex& index, const PrefixState& prefix,
                                      std::size_t k) {
  const std::size_t n = index.num_docs();
  const std::size_t take = std::min(k, n);
  if (take == 0) return {};
  if (prefix.retrieval.size() != index.half_dim()) {
    throw DataError("dimension mismatch between prefix retrieval vector and index");
  }
  std::vector<std::pair<double, DocId>> scored;
  scored.reserve(n);
  for (DocId d = 0; d < n; ++d) scored.emplace_back(cosine(prefix.retrieval, index.doc_vector(d)), d);
  auto cmp = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), cmp);
  std::vector<DocId> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(scored[i].second);
  return out;
}

void CandidateSet::add(const Segment& ref, std::span<const float> vector) {
  if (vector.size() != dim_) throw DataError("candidate vector has the wrong dimension");
  refs_.push_back(ref);
  vectors_.insert(vectors_.end(), vector.begin(), vector.end());
}

std::span<float> CandidateSet::add_uninitialized(const Segment& ref) {
  refs_.push_back(ref);
  vectors_.resize(vectors_.size() + dim_);
  return {vectors_.data() + vectors_.size() - dim_, dim_};
}

std::size_t span_count(std::size_t m, std::size_t max_len) noexcept {
  std::size_t total = 0;
  for (std::size_t len = 1; len <= std::min(m, max_len); ++len) total += m - len + 1;
  return total;
}

CandidateSet collect_candidates(const PhraseIndex& index, std::span<const DocId> docs,
                                const SearchConfig& config) {
  CandidateSet set(index.dim());
  if (config.include_tokens || config.tokens_only) {
    for (TokenId w = 0; w < index.vocab_size(); ++w) {
      set.add(Segment::single_token(w), index.token_row(w));
    }
  }
  if (config.tokens_only) return set;
  std::vector<DocId> sorted(docs.begin(), docs.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const std::size_t max_len = index.max_len();
  for (DocId d : sorted) {
    const auto reps = index.doc_reps(d);
    for (std::size_t s = 0; s < reps.rows; ++s) {
      const std::size_t last = std::min(reps.rows, s + max_len);
      for (std::size_t e = s; e < last; ++e) {
        phrase_repr_into(s, e, reps,
                         set.add_uninitialized(Segment::phrase(d, static_cast<std::uint32_t>(s),
                                                               static_cast<std::uint32_t>(e))));
      }
    }
  }
  return set;
}

void score_candidates(std::span<const float> query, CandidateSet& candidates) {
  if (query.size() != candidates.dim()) {
    throw DataError("dimension mismatch: query " + std::to_string(query.size()) +
                    " vs candidates " + std::to_string(candidates.dim()));
  }
  auto& scores = candidates.mutable_scores();
  scores.resize(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    scores[i] = split_dot(query, candidates.vector(i));
  }
}

ScoredCandidates score_all(const PhraseIndex& index, std::span<const float> query,
                           std::span<const DocId> docs, const SearchConfig& config) {
  if (query.size() != index.dim()) {
    throw DataError("dimension mismatch: query " + std::to_string(query.size()) + " vs index " +
                    std::to_string(index.dim()));
  }
  ScoredCandidates out;
  if (config.include_tokens || config.tokens_only) {
    for (TokenId w = 0; w < index.vocab_size(); ++w) {
      out.refs.push_back(Segment::single_token(w));
      out.scores.push_back(split_dot(query, index.token_row(w)));
    }
  }
  if (config.tokens_only) return out;
  std::vector<DocId> sorted(docs.begin(), docs.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const std::size_t half = index.dim() / 2;
  const auto q_lo = query.first(half);
  const auto q_hi = query.subspan(half);
  const std::size_t max_len = index.max_len();
  std::vector<double> lo, hi;
  for (DocId d : sorted) {
    const auto reps = index.doc_reps(d);
    lo.resize(reps.rows);
    hi.resize(reps.rows);
    for (std::size_t t = 0; t < reps.rows; ++t) {
      lo[t] = dot(q_lo, reps.start_row(t));
      hi[t] = dot(q_hi, reps.end_row(t));
    }
    for (std::size_t s = 0; s < reps.rows; ++s) {
      const std::size_t last = std::min(reps.rows, s + max_len);
      for (std::size_t e = s; e < last; ++e) {
        out.refs.push_back(
            Segment::phrase(d, static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(e)));
        out.scores.push_back(lo[s] + hi[e]);
      }
    }
  }
  return out;
}

}  // namespace cog
