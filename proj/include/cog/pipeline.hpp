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

#include <map>
#include <string>
#include <vector>

#include "cog/decoder.hpp"
#include "cog/encoder.hpp"
#include "cog/index.hpp"

namespace cog {

struct BenchModeReport {
  std::string mode;
  std::size_t runs = 0;
  double median_seconds_per_sample = 0.0;
  double median_steps_per_sample = 0.0;
  double tokens_per_step = 0.0;
};

struct BenchReport {
  std::size_t samples = 0;
  BenchModeReport phrase;
  BenchModeReport tokens_only;
};

/// Runs phrase mode and tokens-only mode on the same prefixes and seeds,
/// `runs` times each, and reports medians.
BenchReport bench(const PhraseIndex& index, const EncoderBackend& backend,
                  const std::vector<std::vector<TokenId>>& prefixes,
                  const GenerationConfig& config, std::size_t runs = 20);

std::string bench_report_json(const BenchReport& report);

/// Flat string-keyed stage arguments, as given on the command line or in a
/// pipeline config file. Values keep their JSON text form.
class StageArgs {
 public:
  StageArgs() = default;

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string str(const std::string& key) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  long long integer(const std::string& key, long long fallback) const;
  double real(const std::string& key, double fallback) const;
  bool flag(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Stage names: ingest, segment, build-index, train-toy, generate, eval,
/// bench, make-prefixes. Returns a JSON summary of what was produced.
std::string run_stage(const std::string& stage, const StageArgs& args);

/// Executes a pipeline config file. `overrides` replace same-named keys in
/// every stage (and the top-level seed / workdir). A failing stage is
/// reported by name. Returns one JSON summary per stage.
std::vector<std::string> run_pipeline(const std::string& config_path,
                                      const std::map<std::string, std::string>& overrides = {});

}  // namespace cog
