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
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "cog/corpus.hpp"
#include "cog/segmenter.hpp"
#include "cog/toy_model.hpp"

namespace cog {

/// Segmented training documents plus the corpus their provenance refers to.
/// Every phrase segment is checked to resolve to a span of its source
/// document with length <= max_len whose tokens match the target text.
class TrainingBatch {
 public:
  static TrainingBatch build(const Corpus& corpus, std::vector<SegmentedDocument> documents,
                             std::uint32_t max_len = 8);

  const Corpus& corpus() const noexcept { return *corpus_; }
  const std::vector<SegmentedDocument>& documents() const noexcept { return documents_; }
  std::uint32_t max_len() const noexcept { return max_len_; }

 private:
  const Corpus* corpus_ = nullptr;
  std::vector<SegmentedDocument> documents_;
  std::uint32_t max_len_ = 8;
};

struct LossOptions {
  /// Include the token vocabulary in the phrase-loss denominator. Tests turn
  /// this off to isolate the span candidates.
  bool token_negatives = true;
};

struct LossReport {
  double phrase = 0.0;  // L_p
  double token = 0.0;   // L_t
  double total = 0.0;   // L = L_p + L_t
  std::vector<double> segment_terms;
  std::size_t segments = 0;   // phrase-loss terms (segments with a non-empty prefix)
  std::size_t positions = 0;  // token-loss terms
  std::size_t correct = 0;    // segments whose positive outscored every other candidate

  double accuracy() const noexcept {
    return segments == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(segments);
  }
};

struct LossAndGradient {
  LossReport report;
  std::vector<double> gradient;  // same layout as ToyParams::values()
};

/// InfoNCE over the source document's spans and the token vocabulary.
LossAndGradient phrase_loss(const TrainingBatch& batch, const ToyParams& params,
                            const LossOptions& options = {});
/// Next-token cross-entropy over every position that has a non-empty prefix.
LossAndGradient token_loss(const TrainingBatch& batch, const ToyParams& params);
/// Both losses in one pass; report.total == report.phrase + report.token.
LossAndGradient total_loss(const TrainingBatch& batch, const ToyParams& params,
                           const LossOptions& options = {});

/// -log softmax(scores)[positive], computed with max subtraction.
double info_nce_term(std::span<const double> scores, std::size_t positive);

/// Objective evaluated at theta; fills *grad with the analytic gradient when
/// grad is non-null.
using Objective = std::function<double(std::span<const double> theta, std::vector<double>* grad)>;

/// Largest relative discrepancy between the analytic gradient and central
/// differences, with denominator max(|analytic|, |numeric|, 1e-12).
double finite_diff_check(const Objective& objective, std::span<const double> theta,
                         double epsilon);
double finite_diff_check(const TrainingBatch& batch, const ToyParams& params, double epsilon);

struct TrainHyperparams {
  std::size_t steps = 1000;
  double learning_rate = 1e-2;
  double clip_norm = 1.0;
  std::uint64_t seed = 0;
  std::uint32_t dim = ToyParams::kDefaultDim;
  std::uint32_t max_len = 8;
  std::size_t log_every = 1;
  /// Stop once training accuracy reaches this value (disabled when unset).
  std::optional<double> target_accuracy;
};

struct TrainMetrics {
  std::size_t step = 0;
  double total = 0.0;
  double phrase = 0.0;
  double token = 0.0;
  double accuracy = 0.0;
};

struct TrainResult {
  ToyParams params;
  std::vector<TrainMetrics> log;
  bool diverged = false;
};

/// Full-batch gradient descent with gradient-norm clipping. Deterministic
/// given the seed. On a non-finite loss the run stops and returns the last
/// parameters that produced a finite loss, with diverged set.
TrainResult train_toy(const Corpus& corpus, const std::vector<SegmentedDocument>& segmentation,
                      const TrainHyperparams& hyper,
                      std::optional<ToyParams> initial = std::nullopt);

void write_metrics_jsonl(std::ostream& out, std::span<const TrainMetrics> log);

}  // namespace cog
