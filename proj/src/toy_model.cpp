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
#include "cog/toy_model.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace cog {

using nlohmann::json;

ToyParams::ToyParams(std::uint32_t vocab_size, std::uint32_t dim, double alpha,
                     std::uint64_t seed)
    : vocab_size_(vocab_size), dim_(dim), alpha_(alpha), seed_(seed) {
  if (dim == 0 || dim % 2 != 0) throw UsageError("encoder dimension must be even and positive");
  if (vocab_size == 0) throw UsageError("vocabulary size must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw UsageError("alpha must lie in (0, 1]");
  const std::size_t v = vocab_size, d = dim, h = dim / 2;
  values_.assign(v * d + v * d + 2 * (h * d + h), 0.0);
}

ToyParams ToyParams::seeded(std::uint32_t vocab_size, std::uint32_t dim, std::uint64_t seed,
                            double alpha) {
  ToyParams p(vocab_size, dim, alpha, seed);
  Rng rng(seed);
  const double w = 1.0 / std::sqrt(static_cast<double>(p.token_dim()));
  auto fill = [&](std::size_t from, std::size_t count, double bound) {
    for (std::size_t i = 0; i < count; ++i) p.values_[from + i] = rng.uniform(-bound, bound);
  };
  const std::size_t v = vocab_size, d = dim, h = dim / 2;
  fill(p.embeddings_offset(), v * d, 0.1);
  fill(p.token_table_offset(), v * d, 0.1);
  fill(p.start_weight_offset(), h * d, w);
  fill(p.end_weight_offset(), h * d, w);
  return p;
}

std::size_t ToyParams::token_table_offset() const noexcept {
  return std::size_t{vocab_size_} * dim_;
}
std::size_t ToyParams::start_weight_offset() const noexcept {
  return 2 * std::size_t{vocab_size_} * dim_;
}
std::size_t ToyParams::start_bias_offset() const noexcept {
  return start_weight_offset() + std::size_t{half_dim()} * dim_;
}
std::size_t ToyParams::end_weight_offset() const noexcept {
  return start_bias_offset() + half_dim();
}
std::size_t ToyParams::end_bias_offset() const noexcept {
  return end_weight_offset() + std::size_t{half_dim()} * dim_;
}

std::span<const double> ToyParams::embedding(TokenId w) const {
  if (w >= vocab_size_) throw DataError("unknown token id " + std::to_string(w));
  return {values_.data() + embeddings_offset() + std::size_t{w} * dim_, dim_};
}
std::span<const double> ToyParams::token_row(TokenId w) const {
  if (w >= vocab_size_) throw DataError("unknown token id " + std::to_string(w));
  return {values_.data() + token_table_offset() + std::size_t{w} * dim_, dim_};
}
std::span<const double> ToyParams::start_weight() const noexcept {
  return {values_.data() + start_weight_offset(), std::size_t{half_dim()} * dim_};
}
std::span<const double> ToyParams::start_bias() const noexcept {
  return {values_.data() + start_bias_offset(), half_dim()};
}
std::span<const double> ToyParams::end_weight() const noexcept {
  return {values_.data() + end_weight_offset(), std::size_t{half_dim()} * dim_};
}
std::span<const double> ToyParams::end_bias() const noexcept {
  return {values_.data() + end_bias_offset(), half_dim()};
}

std::uint64_t ToyParams::fingerprint() const {
  Fnv1a64 h;
  h.update("cog-toy-v1");
  h.update_value(alpha_);
  h.update_value(vocab_size_);
  h.update_value(dim_);
  h.update_value(seed_);
  h.update(values_.data(), values_.size() * sizeof(double));
  return h.digest();
}

void ToyParams::save(const std::string& path) const {
  // nlohmann::json prints doubles with round-trip precision.
  json root = {{"format", "cog-toy-params"}, {"version", 1},   {"vocab_size", vocab_size_},
               {"dim", dim_},                {"alpha", alpha_}, {"seed", seed_},
               {"values", values_}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write parameter file: " + path);
  out << root.dump() << '\n';
}

ToyParams ToyParams::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open parameter file: " + path);
  try {
    const json root = json::parse(in);
    if (root.value("format", "") != "cog-toy-params" || root.value("version", 0) != 1) {
      throw DataError(path + " is not a version-1 cog parameter file");
    }
    ToyParams p(root.at("vocab_size").get<std::uint32_t>(), root.at("dim").get<std::uint32_t>(),
                root.at("alpha").get<double>(), root.at("seed").get<std::uint64_t>());
    auto values = root.at("values").get<std::vector<double>>();
    if (values.size() != p.values_.size()) {
      throw DataError("parameter file " + path + " has the wrong number of values");
    }
    p.values_ = std::move(values);
    return p;
  } catch (const json::exception& e) {
    throw DataError("malformed parameter file " + path + ": " + e.what());
  }
}

double context_step(const ToyParams& params, std::span<const double> prev, TokenId token,
                    std::span<double> out) {
  const auto e = params.embedding(token);
  const double a = params.alpha();
  double sq = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = a * e[i] + (1.0 - a) * prev[i];
    sq += out[i] * out[i];
  }
  if (sq == 0.0) return 0.0;
  const double norm = std::sqrt(sq);
  for (double& x : out) x /= norm;
  return norm;
}

ContextStates contextualize(const ToyParams& params, std::span<const TokenId> tokens) {
  ContextStates cs;
  cs.rows = tokens.size();
  cs.cols = params.token_dim();
  cs.states.assign(cs.rows * cs.cols, 0.0);
  cs.norms.assign(cs.rows, 0.0);
  const std::vector<double> zero(cs.cols, 0.0);
  for (std::size_t t = 0; t < cs.rows; ++t) {
    std::span<const double> prev =
        t == 0 ? std::span<const double>(zero) : std::span<const double>(cs.row(t - 1));
    cs.norms[t] =
        context_step(params, prev, tokens[t], {cs.states.data() + t * cs.cols, cs.cols});
  }
  return cs;
}

void apply_affine(std::span<const double> weight, std::span<const double> bias,
                  std::span<const double> x, std::span<double> out) {
  const std::size_t cols = x.size();
  for (std::size_t r = 0; r < out.size(); ++r) {
    double acc = bias[r];
    const double* w = weight.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += w[c] * x[c];
    out[r] = acc;
  }
}

}  // namespace cog
