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
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cog/common.hpp"
#include "cog/encoder.hpp"
#include "cog/index.hpp"
#include "cog/segmenter.hpp"

namespace cog {

enum class DecodeMode { kGreedy, kNucleus };

DecodeMode parse_decode_mode(std::string_view name);
std::string_view to_string(DecodeMode mode) noexcept;

struct GenerationConfig {
  DecodeMode mode = DecodeMode::kGreedy;
  double top_p = 0.95;
  std::size_t max_new_tokens = 128;
  /// The prefix is cut to its first `prefix_tokens` tokens.
  std::size_t prefix_tokens = 32;
  std::uint64_t seed = 0;
  /// Re-run document retrieval every n steps (1 = every step).
  std::size_t coarse_refresh = 1;
  SearchConfig search;

  void validate() const;
};

/// Softmax (temperature 1) with max subtraction. Throws on an empty input.
std::vector<double> next_distribution(std::span<const double> scores);

/// Index of the highest score; the first one wins ties, so with candidates
/// in canonical order ties resolve to tokens by id, then phrases by (doc, s, e).
std::size_t greedy_select(std::span<const double> scores);

/// Top-p sampling: the smallest highest-probability set whose mass reaches
/// p, renormalised. Equal probabilities keep their original order.
std::size_t nucleus_sample(std::span<const double> probs, double p, Rng& rng);

struct TraceStep {
  Segment choice;
  double score = 0.0;
  double prob = 0.0;
  /// Tokens actually appended; shorter than the candidate when the final
  /// phrase was truncated at max_new_tokens.
  std::vector<TokenId> emitted;
};

struct GenerationTrace {
  std::uint64_t seed = 0;
  std::vector<TraceStep> steps;

  std::size_t step_count() const noexcept { return steps.size(); }
  std::size_t token_count() const noexcept;
};

struct GenerationResult {
  std::vector<TokenId> prefix;
  std::vector<TokenId> continuation;
  std::string text;  // detokenised continuation
  GenerationTrace trace;
  PrefixState final_state;
};

/// Rejects an index built under a different encoder.
void check_compatible(const PhraseIndex& index, const EncoderBackend& backend);

GenerationResult generate(const PhraseIndex& index, const EncoderBackend& backend,
                          std::span<const TokenId> prefix, const GenerationConfig& config);
GenerationResult generate(const PhraseIndex& index, const EncoderBackend& backend,
                          std::string_view prefix_text, const GenerationConfig& config);

struct StepStats {
  std::map<std::size_t, std::size_t> length_histogram;  // emitted length -> steps
  double mean_length = 0.0;
  std::size_t steps = 0;
  std::size_t tokens = 0;
};

StepStats step_stats(const GenerationTrace& trace);

/// One JSON object per step with keys kind, src, s, e, token, score, prob,
/// surface and n (emitted token count). For a truncated phrase, e is the
/// last emitted position.
void write_trace_jsonl(std::ostream& out, const GenerationTrace& trace, const Vocabulary& vocab);

/// A parsed trace step: what external scorers and step statistics consume.
struct TraceRecord {
  bool is_phrase = false;
  std::int64_t src = -1;
  std::int64_t s = -1;
  std::int64_t e = -1;
  std::int64_t token = -1;
  double score = 0.0;
  double prob = 0.0;
  std::string surface;
  std::size_t n = 0;
};

std::vector<TraceRecord> read_trace_jsonl(std::istream& in);

}  // namespace cog
