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
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cog/common.hpp"
#include "cog/pipeline.hpp"

namespace {

struct OptionSpec {
  const char* name;
  const char* help;
  bool required = false;
  bool is_flag = false;
};

struct CommandSpec {
  const char* name;
  const char* help;
  std::vector<OptionSpec> options;
};

const std::vector<CommandSpec>& commands() {
  static const std::vector<CommandSpec> specs = {
      {"ingest",
       "Tokenize a JSONL corpus ({\"id\", \"text\"} per line)",
       {{"input", "corpus JSONL file", true},
        {"out", "output corpus file", true},
        {"vocab", "existing corpus whose vocabulary is reused (frozen)"}}},
      {"segment",
       "Segment every document into copied phrases and single tokens",
       {{"corpus", "corpus file", true},
        {"out", "segmentation JSONL output", true},
        {"k", "neighbour documents searched (default 16)"},
        {"lmin", "minimum phrase length (default 2)"},
        {"lmax", "maximum phrase length (default 8)"},
        {"d", "dimension of the similarity encoder (default 64)"},
        {"seed", "seed of the similarity encoder (default 0)"}}},
      {"build-index",
       "Encode a corpus into a phrase index",
       {{"corpus", "corpus file", true},
        {"out", "index output file", true},
        {"d", "representation dimension for a seeded toy encoder (default 64)"},
        {"seed", "seed for a seeded toy encoder (default 0)"},
        {"params", "trained toy parameters"},
        {"lmax", "maximum phrase length (default 8)"}}},
      {"train-toy",
       "Train the toy encoder on a segmented corpus",
       {{"corpus", "corpus file", true},
        {"segments", "segmentation JSONL", true},
        {"out", "parameter output file", true},
        {"steps", "gradient steps (default 1000)"},
        {"lr", "learning rate (default 0.01)"},
        {"seed", "initialisation seed (default 0)"},
        {"d", "dimension (default 64)"},
        {"lmax", "maximum phrase length (default 8)"},
        {"log", "metrics JSONL output"},
        {"log-every", "log interval in steps (default 1)"},
        {"target-acc", "stop once accuracy reaches this value"},
        {"init", "initial parameters instead of a seeded start"}}},
      {"generate",
       "Generate continuations for each line of a prefix file",
       {{"index", "index file", true},
        {"prefix-file", "one prefix per line", true},
        {"params", "trained toy parameters"},
        {"mode", "greedy or nucleus (default greedy)"},
        {"p", "nucleus mass (default 0.95)"},
        {"max-new-tokens", "tokens to generate (default 128)"},
        {"prefix-tokens", "prefix truncation length (default 32)"},
        {"seed", "sampling seed; prefix i uses seed + i (default 0)"},
        {"k-docs", "documents kept by the coarse stage (default 1024)"},
        {"coarse-refresh", "re-run document retrieval every n steps (default 1)"},
        {"tokens-only", "disable phrase candidates", false, true},
        {"trace-out", "trace JSONL; numbered per prefix when there are several"},
        {"out", "continuations, one per line"}}},
      {"eval",
       "Compute Rep-n and diversity over generation traces",
       {{"traces", "trace file or glob", true}, {"out", "report JSON output"}}},
      {"bench",
       "Compare phrase mode with tokens-only mode",
       {{"index", "index file", true},
        {"prefix-file", "one prefix per line", true},
        {"params", "trained toy parameters"},
        {"runs", "repetitions (default 20)"},
        {"max-new-tokens", "tokens per sample (default 128)"},
        {"prefix-tokens", "prefix truncation length (default 32)"},
        {"k-docs", "documents kept by the coarse stage (default 1024)"},
        {"seed", "seed (default 0)"},
        {"out", "report JSON output"}}},
      {"make-prefixes",
       "Write the leading tokens of corpus documents as a prefix file",
       {{"corpus", "corpus file", true},
        {"out", "prefix file output", true},
        {"n", "number of prefixes (default: all documents)"},
        {"prefix-tokens", "tokens per prefix (default 32)"}}},
  };
  return specs;
}

int exit_code(cog::ErrorKind kind) { return static_cast<int>(kind); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cog: copy-based text generation over a phrase index"};
  app.require_subcommand(1);

  std::string backend = "toy";
  std::string sidecar_url;
  app.add_option("--backend", backend, "encoder backend: toy or sidecar")
      ->check(CLI::IsMember({"toy", "sidecar"}));
  app.add_option("--sidecar-url", sidecar_url, "sidecar base URL, e.g. http://127.0.0.1:8080");

  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, std::map<std::string, bool>> flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& spec : commands()) {
    auto* sub = app.add_subcommand(spec.name, spec.help);
    subs[spec.name] = sub;
    for (const auto& opt : spec.options) {
      const std::string flag = std::string("--") + opt.name;
      if (opt.is_flag) {
        sub->add_flag(flag, flags[spec.name][opt.name], opt.help);
      } else {
        auto* o = sub->add_option(flag, values[spec.name][opt.name], opt.help);
        if (opt.required) o->required();
      }
    }
  }

  std::string config_path;
  std::vector<std::string> overrides;
  auto* run = app.add_subcommand("run", "Run a pipeline config file");
  run->add_option("config", config_path, "pipeline JSON")->required();
  run->add_option("--set", overrides, "override KEY=VALUE in every stage");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code(cog::ErrorKind::kUsage);
  }

  try {
    if (run->parsed()) {
      std::map<std::string, std::string> ov;
      for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw cog::UsageError("--set expects KEY=VALUE, got '" + kv + "'");
        }
        ov[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
      if (app.count("--backend") > 0) ov["backend"] = backend;
      if (!sidecar_url.empty()) ov["sidecar-url"] = sidecar_url;
      for (const auto& summary : cog::run_pipeline(config_path, ov)) std::cout << summary << '\n';
      return 0;
    }
    for (const auto& spec : commands()) {
      auto* sub = subs[spec.name];
      if (!sub->parsed()) continue;
      cog::StageArgs args;
      args.set("backend", backend);
      if (!sidecar_url.empty()) args.set("sidecar-url", sidecar_url);
      for (const auto& opt : spec.options) {
        const std::string flag = std::string("--") + opt.name;
        if (sub->count(flag) == 0) continue;
        args.set(opt.name, opt.is_flag ? "true" : values[spec.name][opt.name]);
      }
      std::cout << cog::run_stage(spec.name, args) << '\n';
      return 0;
    }
  } catch (const cog::Error& e) {
    std::cerr << "cog: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "cog: internal error: " << e.what() << '\n';
    return exit_code(cog::ErrorKind::kInternal);
  }
  return exit_code(cog::ErrorKind::kUsage);
}
