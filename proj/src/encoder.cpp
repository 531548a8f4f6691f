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
#include "cog/encoder.hpp"

#include <algorithm>

namespace cog {

void phrase_repr_into(std::size_t s, std::size_t e, const DocumentRepsView& reps,
                      std::span<float> out) {
  if (s > e) throw DataError("phrase start after end");
  if (e >= reps.rows) throw DataError("phrase end out of range");
  const auto start = reps.start_row(s);
  const auto end = reps.end_row(e);
  std::copy(start.begin(), start.end(), out.begin());
  std::copy(end.begin(), end.end(), out.begin() + static_cast<std::ptrdiff_t>(reps.half));
}

std::vector<float> phrase_repr(std::size_t s, std::size_t e, const DocumentRepsView& reps) {
  std::vector<float> out(2 * reps.half);
  phrase_repr_into(s, e, reps, out);
  return out;
}

PrefixState EncoderBackend::prefix_init(std::span<const TokenId> tokens) const {
  if (tokens.empty()) throw DataError("prefix must contain at least one token");
  PrefixState state = empty_prefix();
  for (TokenId t : tokens) state = prefix_append(state, t);
  return state;
}

ToyBackend::ToyBackend(ToyParams params)
    : params_(std::move(params)), fingerprint_(params_.fingerprint()) {}

EncoderInfo ToyBackend::info() const {
  return {params_.dim(),   params_.token_dim(), params_.vocab_size(),
          params_.seed(),  params_.alpha(),     fingerprint_};
}

// Cache layout: [c_last (d_t) | running sum of states (d_t)].
PrefixState ToyBackend::empty_prefix() const {
  PrefixState s;
  s.cache.assign(2 * std::size_t{params_.token_dim()}, 0.0);
  s.q.assign(params_.dim(), 0.0f);
  s.retrieval.assign(params_.half_dim(), 0.0f);
  return s;
}

PrefixState ToyBackend::prefix_append(const PrefixState& state, TokenId token) const {
  const std::size_t dt = params_.token_dim();
  if (state.cache.size() != 2 * dt) throw DataError("prefix state does not belong to this backend");
  PrefixState next;
  next.tokens = state.tokens;
  next.tokens.push_back(token);
  next.cache.resize(2 * dt);
  std::span<const double> prev(state.cache.data(), dt);
  std::span<double> cur(next.cache.data(), dt);
  context_step(params_, prev, token, cur);
  for (std::size_t i = 0; i < dt; ++i) next.cache[dt + i] = state.cache[dt + i] + cur[i];
  next.q.assign(cur.begin(), cur.end());
  next.retrieval = pooled_retrieval({next.cache.data() + dt, dt}, next.tokens.size());
  return next;
}

std::vector<float> ToyBackend::pooled_retrieval(std::span<const double> sum,
                                                std::size_t count) const {
  std::vector<double> mean(sum.begin(), sum.end());
  for (double& x : mean) x /= static_cast<double>(count);
  std::vector<double> out(params_.half_dim());
  apply_affine(params_.start_weight(), params_.start_bias(), mean, out);
  return {out.begin(), out.end()};
}

DocumentReps ToyBackend::encode_document(std::span<const TokenId> tokens) const {
  const auto cs = contextualize(params_, tokens);
  DocumentReps reps;
  reps.rows = tokens.size();
  reps.half = params_.half_dim();
  reps.start.resize(reps.rows * reps.half);
  reps.end.resize(reps.rows * reps.half);
  std::vector<double> buf(reps.half);
  for (std::size_t t = 0; t < reps.rows; ++t) {
    apply_affine(params_.start_weight(), params_.start_bias(), cs.row(t), buf);
    std::copy(buf.begin(), buf.end(), reps.start.begin() + static_cast<std::ptrdiff_t>(t * reps.half));
    apply_affine(params_.end_weight(), params_.end_bias(), cs.row(t), buf);
    std::copy(buf.begin(), buf.end(), reps.end.begin() + static_cast<std::ptrdiff_t>(t * reps.half));
  }
  return reps;
}

std::vector<float> ToyBackend::document_vector(std::span<const TokenId> tokens) const {
  if (tokens.empty()) return std::vector<float>(params_.half_dim(), 0.0f);
  // Same accumulation order as prefix_append, so a prefix equal to a whole
  // document yields exactly the document's vector.
  const std::size_t dt = params_.token_dim();
  std::vector<double> prev(dt, 0.0), cur(dt), sum(dt, 0.0);
  for (TokenId t : tokens) {
    context_step(params_, prev, t, cur);
    for (std::size_t i = 0; i < dt; ++i) sum[i] = sum[i] + cur[i];
    prev.swap(cur);
  }
  return pooled_retrieval(sum, tokens.size());
}

std::vector<float> ToyBackend::token_embedding(TokenId w) const {
  const auto row = params_.token_row(w);
  return {row.begin(), row.end()};
}

std::vector<float> mean_context(const ToyParams& params, std::span<const TokenId> tokens) {
  const auto cs = contextualize(params, tokens);
  std::vector<double> sum(cs.cols, 0.0);
  for (std::size_t t = 0; t < cs.rows; ++t) {
    const auto r = cs.row(t);
    for (std::size_t i = 0; i < cs.cols; ++i) sum[i] += r[i];
  }
  std::vector<float> out(cs.cols, 0.0f);
  if (cs.rows == 0) return out;
  for (std::size_t i = 0; i < cs.cols; ++i) {
    out[i] = static_cast<float>(sum[i] / static_cast<double>(cs.rows));
  }
  return out;
}

}  // namespace cog
