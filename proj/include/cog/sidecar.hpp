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

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cog/corpus.hpp"
#include "cog/encoder.hpp"

namespace cog {

/// Wire format of the encoder sidecar's POST /encode endpoint.
struct EncodeRequest {
  enum class Kind { kDocument, kPrefix };
  Kind kind = Kind::kDocument;
  std::vector<std::string> tokens;

  bool operator==(const EncodeRequest&) const = default;
};

struct EncodeResponse {
  std::uint32_t d = 0;
  std::uint32_t d_t = 0;
  std::vector<std::vector<float>> start;  // documents: m rows of d/2
  std::vector<std::vector<float>> end;    // documents: m rows of d/2
  std::vector<float> q;                   // prefixes: d values
  std::string fingerprint;

  bool operator==(const EncodeResponse&) const = default;
};

std::string to_json(const EncodeRequest& request);
std::string to_json(const EncodeResponse& response);
/// Both parsers validate shapes and throw DataError on schema violations.
EncodeRequest parse_encode_request(std::string_view body);
EncodeResponse parse_encode_response(std::string_view body, EncodeRequest::Kind kind,
                                     std::size_t token_count);

struct SidecarHealth {
  std::string status;
  std::string fingerprint;
};
SidecarHealth parse_health(std::string_view body);

/// EncoderBackend that delegates contextual encoding to the HTTP sidecar.
/// The protocol carries no token table, so context-independent token
/// embeddings come from a local table (|V| x d). The prefix retrieval
/// vector is the start half of q; document vectors are mean start rows.
class SidecarBackend final : public EncoderBackend {
 public:
  SidecarBackend(std::string url, Vocabulary vocab, std::vector<float> token_table);
  ~SidecarBackend() override;

  EncoderInfo info() const override;
  PrefixState empty_prefix() const override;
  PrefixState prefix_append(const PrefixState& state, TokenId token) const override;
  PrefixState prefix_init(std::span<const TokenId> tokens) const override;
  DocumentReps encode_document(std::span<const TokenId> tokens) const override;
  std::vector<float> document_vector(std::span<const TokenId> tokens) const override;
  std::vector<float> token_embedding(TokenId w) const override;

  const std::string& model_fingerprint() const noexcept { return model_fingerprint_; }

 private:
  EncodeResponse post(const EncodeRequest& request) const;
  std::vector<std::string> surfaces(std::span<const TokenId> tokens) const;

  struct Client;
  std::unique_ptr<Client> client_;
  Vocabulary vocab_;
  std::vector<float> token_table_;
  std::string model_fingerprint_;
  EncoderInfo info_;
};

}  // namespace cog
