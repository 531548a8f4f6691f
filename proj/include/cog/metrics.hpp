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

#include <span>
#include <string>
#include <vector>

#include "cog/common.hpp"

namespace cog {

/// 100 * (1 - unique n-grams / total n-grams); 0 when the sequence has no
/// n-gram. Throws for n < 1.
double rep_n(std::span<const TokenId> tokens, std::size_t n);

/// 100 * prod_{n=2..4} (1 - rep_n / 100).
double diversity(std::span<const TokenId> tokens);
double diversity_from_reps(double rep2, double rep3, double rep4) noexcept;

struct SampleMetrics {
  std::string name;
  std::size_t tokens = 0;
  double rep_2 = 0.0;
  double rep_3 = 0.0;
  double rep_4 = 0.0;
  double diversity = 0.0;
};

struct EvalReport {
  std::vector<SampleMetrics> samples;
  SampleMetrics mean;  // corpus means over samples, in sample order
};

SampleMetrics sample_metrics(std::string name, std::span<const TokenId> tokens);

/// Samples are whitespace-separated continuation tokens; surfaces are mapped
/// to ids by equality, which is all the metrics depend on.
EvalReport evaluate_samples(const std::vector<std::pair<std::string, std::vector<std::string>>>& samples);

/// Reads continuation tokens from generation trace files (line-delimited
/// step records); each file is one sample.
EvalReport evaluate_trace_files(const std::vector<std::string>& paths);

std::string eval_report_json(const EvalReport& report);

}  // namespace cog
