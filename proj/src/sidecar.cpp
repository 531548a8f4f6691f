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
#include "cog/sidecar.hpp"

#include <mutex>

#include "httplib.h"
#include "json.hpp"

namespace cog {

using nlohmann::json;

namespace {

json rows_to_json(const std::vector<std::vector<float>>& rows) {
  json out = json::array();
  for (const auto& r : rows) out.push_back(r);
  return out;
}

std::vector<std::vector<float>> rows_from_json(const json& j, std::size_t count, std::size_t width,
                                               const char* name) {
  if (!j.is_array() || j.size() != count) {
    throw DataError(std::string("sidecar response: '") + name + "' must have one row per token");
  }
  std::vector<std::vector<float>> rows;
  rows.reserve(count);
  for (const auto& r : j) {
    auto row = r.get<std::vector<float>>();
    if (row.size() != width) {
      throw DataError(std::string("sidecar response: '") + name + "' rows must have d/2 values");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string to_json(const EncodeRequest& request) {
  return json{{"kind", request.kind == EncodeRequest::Kind::kDocument ? "document" : "prefix"},
              {"tokens", request.tokens}}
      .dump();
}

std::string to_json(const EncodeResponse& response) {
  json j = {{"d", response.d}, {"d_t", response.d_t}, {"fingerprint", response.fingerprint}};
  if (!response.q.empty()) {
    j["q"] = response.q;
  } else {
    j["start"] = rows_to_json(response.start);
    j["end"] = rows_to_json(response.end);
  }
  return j.dump();
}

EncodeRequest parse_encode_request(std::string_view body) {
  try {
    const auto j = json::parse(body);
    EncodeRequest r;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "document") {
      r.kind = EncodeRequest::Kind::kDocument;
    } else if (kind == "prefix") {
      r.kind = EncodeRequest::Kind::kPrefix;
    } else {
      throw DataError("encode request: unknown kind '" + kind + "'");
    }
    r.tokens = j.at("tokens").get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("encode request: ") + e.what());
  }
}

EncodeResponse parse_encode_response(std::string_view body, EncodeRequest::Kind kind,
                                     std::size_t token_count) {
  try {
    const auto j = json::parse(body);
    EncodeResponse r;
    r.d = j.at("d").get<std::uint32_t>();
    r.d_t = j.at("d_t").get<std::uint32_t>();
    r.fingerprint = j.at("fingerprint").get<std::string>();
    if (r.d == 0 || r.d % 2 != 0) throw DataError("sidecar response: d must be even");
    if (kind == EncodeRequest::Kind::kDocument) {
      r.start = rows_from_json(j.at("start"), token_count, r.d / 2, "start");
      r.end = rows_from_json(j.at("end"), token_count, r.d / 2, "end");
    } else {
      r.q = j.at("q").get<std::vector<float>>();
      if (r.q.size() != r.d) throw DataError("sidecar response: q must have d values");
    }
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("sidecar response: ") + e.what());
  }
}

SidecarHealth parse_health(std::string_view body) {
  try {
    const auto j = json::parse(body);
    return {j.at("status").get<std::string>(), j.at("fingerprint").get<std::string>()};
  } catch (const json::exception& e) {
    throw DataError(std::string("sidecar health: ") + e.what());
  }
}

struct SidecarBackend::Client {
  explicit Client(const std::string& url) : http(url) {
    http.set_connection_timeout(5);
    http.set_read_timeout(60);
  }
  std::mutex mutex;  // httplib::Client is not safe for concurrent use
  httplib::Client http;
};

SidecarBackend::SidecarBackend(std::string url, Vocabulary vocab, std::vector<float> token_table)
    : client_(std::make_unique<Client>(url)),
      vocab_(std::move(vocab)),
      token_table_(std::move(token_table)) {
  {
    std::lock_guard lock(client_->mutex);
    auto res = client_->http.Get("/health");
    if (!res) throw DataError("sidecar at " + url + " is unreachable");
    if (res->status != 200) {
      throw DataError("sidecar health check failed with HTTP " + std::to_string(res->status));
    }
    model_fingerprint_ = parse_health(res->body).fingerprint;
  }
  // Probe once for the dimensions.
  const auto probe = post({EncodeRequest::Kind::kPrefix, {vocab_.surface(kUnkId)}});
  if (probe.fingerprint != model_fingerprint_) {
    throw DataError("sidecar fingerprint changed between /health and /encode");
  }
  info_.dim = probe.d;
  info_.token_dim = probe.d_t;
  info_.vocab_size = static_cast<std::uint32_t>(vocab_.size());
  if (token_table_.size() != std::size_t{info_.vocab_size} * info_.dim) {
    throw DataError("dimension mismatch: local token table does not match |V| x d of the sidecar");
  }
  Fnv1a64 h;
  h.update("cog-sidecar-v1");
  h.update(model_fingerprint_);
  h.update(token_table_.data(), token_table_.size() * sizeof(float));
  info_.fingerprint = h.digest();
}

SidecarBackend::~SidecarBackend() = default;

EncoderInfo SidecarBackend::info() const { return info_; }

EncodeResponse SidecarBackend::post(const EncodeRequest& request) const {
  std::lock_guard lock(client_->mutex);
  auto res = client_->http.Post("/encode", to_json(request), "application/json");
  if (!res) throw DataError("sidecar request failed: " + httplib::to_string(res.error()));
  switch (res->status) {
    case 200:
      break;
    case 400:
      throw DataError("sidecar rejected the request schema (HTTP 400)");
    case 413:
      throw DataError("sidecar input too long (HTTP 413)");
    case 503:
      throw DataError("sidecar model not loaded (HTTP 503)");
    default:
      throw DataError("sidecar returned HTTP " + std::to_string(res->status));
  }
  return parse_encode_response(res->body, request.kind, request.tokens.size());
}

std::vector<std::string> SidecarBackend::surfaces(std::span<const TokenId> tokens) const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (TokenId t : tokens) out.push_back(vocab_.surface(t));
  return out;
}

PrefixState SidecarBackend::empty_prefix() const {
  PrefixState s;
  s.q.assign(info_.dim, 0.0f);
  s.retrieval.assign(info_.dim / 2, 0.0f);
  return s;
}

PrefixState SidecarBackend::prefix_append(const PrefixState& state, TokenId token) const {
  PrefixState next;
  next.tokens = state.tokens;
  next.tokens.push_back(token);
  const auto r = post({EncodeRequest::Kind::kPrefix, surfaces(next.tokens)});
  if (r.fingerprint != model_fingerprint_) throw DataError("sidecar fingerprint changed");
  next.q = r.q;
  next.retrieval.assign(r.q.begin(), r.q.begin() + info_.dim / 2);
  return next;
}

PrefixState SidecarBackend::prefix_init(std::span<const TokenId> tokens) const {
  if (tokens.empty()) throw DataError("prefix must contain at least one token");
  // The sidecar recomputes from scratch, so one request covers the fold.
  PrefixState base = empty_prefix();
  base.tokens.assign(tokens.begin(), tokens.end() - 1);
  return prefix_append(base, tokens.back());
}

DocumentReps SidecarBackend::encode_document(std::span<const TokenId> tokens) const {
  const auto r = post({EncodeRequest::Kind::kDocument, surfaces(tokens)});
  if (r.fingerprint != model_fingerprint_) throw DataError("sidecar fingerprint changed");
  if (r.d != info_.dim) throw DataError("sidecar changed its dimension");
  DocumentReps reps;
  reps.rows = tokens.size();
  reps.half = info_.dim / 2;
  for (const auto& row : r.start) reps.start.insert(reps.start.end(), row.begin(), row.end());
  for (const auto& row : r.end) reps.end.insert(reps.end.end(), row.begin(), row.end());
  return reps;
}

std::vector<float> SidecarBackend::document_vector(std::span<const TokenId> tokens) const {
  const std::size_t h = info_.dim / 2;
  std::vector<float> out(h, 0.0f);
  if (tokens.empty()) return out;
  const auto reps = encode_document(tokens);
  std::vector<double> sum(h, 0.0);
  for (std::size_t t = 0; t < reps.rows; ++t) {
    for (std::size_t i = 0; i < h; ++i) sum[i] += reps.start[t * h + i];
  }
  for (std::size_t i = 0; i < h; ++i) {
    out[i] = static_cast<float>(sum[i] / static_cast<double>(reps.rows));
  }
  return out;
}

std::vector<float> SidecarBackend::token_embedding(TokenId w) const {
  if (w >= info_.vocab_size) throw DataError("unknown token id " + std::to_string(w));
  const auto* row = token_table_.data() + std::size_t{w} * info_.dim;
  return {row, row + info_.dim};
}

}  // namespace cog
