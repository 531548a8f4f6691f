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
#include "cog/metrics.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <unordered_map>

#include "cog/corpus.hpp"
#include "cog/decoder.hpp"
#include "json.hpp"

namespace cog {

double rep_n(std::span<const TokenId> tokens, std::size_t n) {
  if (n < 1) throw UsageError("rep-n requires n >= 1");
  if (tokens.size() < n) return 0.0;
  const std::size_t total = tokens.size() - n + 1;
  std::set<std::vector<TokenId>> unique;
  for (std::size_t i = 0; i < total; ++i) {
    unique.emplace(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
  }
  return 100.0 * (1.0 - static_cast<double>(unique.size()) / static_cast<double>(total));
}

double diversity_from_reps(double rep2, double rep3, double rep4) noexcept {
  return 100.0 * (1.0 - rep2 / 100.0) * (1.0 - rep3 / 100.0) * (1.0 - rep4 / 100.0);
}

double diversity(std::span<const TokenId> tokens) {
  return diversity_from_reps(rep_n(tokens, 2), rep_n(tokens, 3), rep_n(tokens, 4));
}

SampleMetrics sample_metrics(std::string name, std::span<const TokenId> tokens) {
  SampleMetrics m;
  m.name = std::move(name);
  m.tokens = tokens.size();
  m.rep_2 = rep_n(tokens, 2);
  m.rep_3 = rep_n(tokens, 3);
  m.rep_4 = rep_n(tokens, 4);
  m.diversity = diversity_from_reps(m.rep_2, m.rep_3, m.rep_4);
  return m;
}

EvalReport evaluate_samples(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& samples) {
  EvalReport report;
  std::unordered_map<std::string, TokenId> ids;
  for (const auto& [name, surfaces] : samples) {
    std::vector<TokenId> tokens;
    tokens.reserve(surfaces.size());
    for (const auto& s : surfaces) {
      tokens.push_back(ids.try_emplace(s, static_cast<TokenId>(ids.size())).first->second);
    }
    report.samples.push_back(sample_metrics(name, tokens));
  }
  report.mean.name = "mean";
  if (report.samples.empty()) return report;
  const double k = static_cast<double>(report.samples.size());
  for (const auto& s : report.samples) {
    report.mean.tokens += s.tokens;
    report.mean.rep_2 += s.rep_2 / k;
    report.mean.rep_3 += s.rep_3 / k;
    report.mean.rep_4 += s.rep_4 / k;
    report.mean.diversity += s.diversity / k;
  }
  return report;
}

EvalReport evaluate_trace_files(const std::vector<std::string>& paths) {
  std::vector<std::pair<std::string, std::vector<std::string>>> samples;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open trace file: " + path);
    std::vector<std::string> tokens;
    for (const auto& rec : read_trace_jsonl(in)) {
      // Surfaces never contain whitespace, so splitting on it is exact.
      std::size_t pos = 0;
      const auto& s = rec.surface;
      while (pos < s.size()) {
        const auto next = s.find(' ', pos);
        const auto stop = next == std::string::npos ? s.size() : next;
        if (stop > pos) tokens.push_back(s.substr(pos, stop - pos));
        pos = stop + 1;
      }
    }
    samples.emplace_back(std::filesystem::path(path).filename().string(), std::move(tokens));
  }
  return evaluate_samples(samples);
}

std::string eval_report_json(const EvalReport& report) {
  auto row = [](const SampleMetrics& m) {
    return nlohmann::json{{"name", m.name},   {"tokens", m.tokens}, {"rep_2", m.rep_2},
                          {"rep_3", m.rep_3}, {"rep_4", m.rep_4},   {"diversity", m.diversity}};
  };
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : report.samples) samples.push_back(row(s));
  nlohmann::json root = {
      {"format", "cog-eval"},
      {"version", 1},
      {"token_unit", "engine tokens (whitespace split with ASCII punctuation split out)"},
      {"prefix_excluded", true},
      {"samples", std::move(samples)},
      {"mean", row(report.mean)}};
  return root.dump(2);
}

}  // namespace cog
