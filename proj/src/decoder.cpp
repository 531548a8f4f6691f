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
#include "cog/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "json.hpp"

namespace cog {

using nlohmann::json;

DecodeMode parse_decode_mode(std::string_view name) {
  if (name == "greedy") return DecodeMode::kGreedy;
  if (name == "nucleus") return DecodeMode::kNucleus;
  throw UsageError("unknown decoding mode '" + std::string(name) + "'");
}

std::string_view to_string(DecodeMode mode) noexcept {
  return mode == DecodeMode::kGreedy ? "greedy" : "nucleus";
}

void GenerationConfig::validate() const {
  if (!(top_p > 0.0 && top_p <= 1.0)) throw UsageError("nucleus p must lie in (0, 1]");
  if (prefix_tokens == 0) throw UsageError("prefix_tokens must be >= 1");
  if (coarse_refresh == 0) throw UsageError("coarse refresh interval must be >= 1");
}

std::vector<double> next_distribution(std::span<const double> scores) {
  if (scores.empty()) throw DataError("cannot build a distribution over zero candidates");
  const double peak = *std::max_element(scores.begin(), scores.end());
  if (!std::isfinite(peak)) throw DataError("non-finite candidate score");
  std::vector<double> probs(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    probs[i] = std::exp(scores[i] - peak);
    total += probs[i];
  }
  for (double& p : probs) p /= total;
  return probs;
}

std::size_t greedy_select(std::span<const double> scores) {
  if (scores.empty()) throw DataError("cannot select from zero candidates");
  return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

std::size_t nucleus_sample(std::span<const double> probs, double p, Rng& rng) {
  if (probs.empty()) throw DataError("cannot sample from zero candidates");
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  double mass = 0.0;
  std::size_t keep = 0;
  while (keep < order.size()) {
    mass += probs[order[keep]];
    ++keep;
    if (mass >= p) break;
  }
  const double u = rng.uniform() * mass;
  double acc = 0.0;
  for (std::size_t i = 0; i < keep; ++i) {
    acc += probs[order[i]];
    if (u < acc) return order[i];
  }
  return order[keep - 1];
}

std::size_t GenerationTrace::token_count() const noexcept {
  std::size_t n = 0;
  for (const auto& s : steps) n += s.emitted.size();
  return n;
}

void check_compatible(const PhraseIndex& index, const EncoderBackend& backend) {
  const auto info = backend.info();
  if (info.dim != index.dim() || info.vocab_size != index.vocab_size()) {
    throw DataError("dimension mismatch between encoder (d=" + std::to_string(info.dim) +
                    ", |V|=" + std::to_string(info.vocab_size) + ") and index (d=" +
                    std::to_string(index.dim()) + ", |V|=" + std::to_string(index.vocab_size()) +
                    ")");
  }
  if (info.fingerprint != index.fingerprint()) {
    throw DataError("encoder fingerprint does not match the index header");
  }
}

GenerationResult generate(const PhraseIndex& index, const EncoderBackend& backend,
                          std::span<const TokenId> prefix, const GenerationConfig& config) {
  config.validate();
  check_compatible(index, backend);
  if (prefix.empty()) throw DataError("prefix must contain at least one token");

  GenerationResult result;
  result.prefix.assign(prefix.begin(),
                       prefix.begin() + static_cast<std::ptrdiff_t>(
                                            std::min(prefix.size(), config.prefix_tokens)));
  result.trace.seed = config.seed;
  PrefixState state = backend.prefix_init(result.prefix);
  Rng rng(config.seed);

  std::vector<DocId> docs;
  std::size_t step = 0;
  while (result.continuation.size() < config.max_new_tokens) {
    if (!config.search.tokens_only && step % config.coarse_refresh == 0) {
      docs = retrieve_documents(index, state, config.search.k_docs);
    }
    const auto candidates = score_all(index, state.q, docs, config.search);
    if (candidates.refs.empty()) {
      throw DataError("no candidates available (empty dynamic vocabulary)");
    }
    const auto probs = next_distribution(candidates.scores);
    const std::size_t pick = config.mode == DecodeMode::kGreedy
                                 ? greedy_select(candidates.scores)
                                 : nucleus_sample(probs, config.top_p, rng);

    TraceStep ts;
    ts.choice = candidates.refs[pick];
    ts.score = candidates.scores[pick];
    ts.prob = probs[pick];
    const std::size_t budget = config.max_new_tokens - result.continuation.size();
    if (ts.choice.is_phrase()) {
      const auto src = index.doc_tokens(ts.choice.source_doc);
      const std::size_t len = std::min(ts.choice.length(), budget);
      ts.emitted.assign(src.begin() + ts.choice.start, src.begin() + ts.choice.start + len);
    } else {
      ts.emitted.push_back(ts.choice.token);
    }
    for (TokenId t : ts.emitted) {
      state = backend.prefix_append(state, t);
      result.continuation.push_back(t);
    }
    result.trace.steps.push_back(std::move(ts));
    ++step;
  }
  result.text = detokenize(result.continuation, index.vocabulary());
  result.final_state = std::move(state);
  return result;
}

GenerationResult generate(const PhraseIndex& index, const EncoderBackend& backend,
                          std::string_view prefix_text, const GenerationConfig& config) {
  Vocabulary vocab = index.vocabulary();
  vocab.freeze();
  const auto tokens = tokenize(prefix_text, vocab);
  return generate(index, backend, std::span<const TokenId>(tokens), config);
}

StepStats step_stats(const GenerationTrace& trace) {
  StepStats st;
  for (const auto& s : trace.steps) {
    ++st.length_histogram[s.emitted.size()];
    st.tokens += s.emitted.size();
  }
  st.steps = trace.steps.size();
  st.mean_length = st.steps == 0 ? 0.0 : static_cast<double>(st.tokens) / st.steps;
  return st;
}

void write_trace_jsonl(std::ostream& out, const GenerationTrace& trace, const Vocabulary& vocab) {
  for (const auto& s : trace.steps) {
    json rec;
    if (s.choice.is_phrase()) {
      rec["kind"] = "phrase";
      rec["src"] = s.choice.source_doc;
      rec["s"] = s.choice.start;
      rec["e"] = s.choice.start + s.emitted.size() - 1;
      rec["token"] = nullptr;
    } else {
      rec["kind"] = "token";
      rec["src"] = nullptr;
      rec["s"] = nullptr;
      rec["e"] = nullptr;
      rec["token"] = s.choice.token;
    }
    rec["score"] = s.score;
    rec["prob"] = s.prob;
    rec["surface"] = detokenize(s.emitted, vocab);
    rec["n"] = s.emitted.size();
    out << rec.dump() << '\n';
  }
}

std::vector<TraceRecord> read_trace_jsonl(std::istream& in) {
  std::vector<TraceRecord> out;
  std::string line;
  std::size_t line_no = 0;
  auto int_or = [](const json& j, const char* key) -> std::int64_t {
    return j.contains(key) && !j[key].is_null() ? j[key].get<std::int64_t>() : -1;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      TraceRecord r;
      const auto kind = j.at("kind").get<std::string>();
      if (kind != "phrase" && kind != "token") throw DataError("unknown step kind '" + kind + "'");
      r.is_phrase = kind == "phrase";
      r.src = int_or(j, "src");
      r.s = int_or(j, "s");
      r.e = int_or(j, "e");
      r.token = int_or(j, "token");
      r.score = j.at("score").get<double>();
      r.prob = j.at("prob").get<double>();
      r.surface = j.at("surface").get<std::string>();
      r.n = j.contains("n") ? j["n"].get<std::size_t>() : split_surfaces(r.surface).size();
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw DataError("trace line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace cog
