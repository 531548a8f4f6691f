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
#include "cog/pipeline.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "cog/corpus.hpp"
#include "cog/metrics.hpp"
#include "cog/segmenter.hpp"
#include "cog/sidecar.hpp"
#include "cog/training.hpp"
#include "json.hpp"

namespace cog {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

BenchModeReport bench_mode(const PhraseIndex& index, const EncoderBackend& backend,
                           const std::vector<std::vector<TokenId>>& prefixes,
                           const GenerationConfig& config, std::size_t runs, std::string name) {
  BenchModeReport r;
  r.mode = std::move(name);
  r.runs = runs;
  std::vector<double> seconds, steps;
  std::size_t total_steps = 0, total_tokens = 0;
  for (std::size_t run = 0; run < runs; ++run) {
    std::size_t run_steps = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < prefixes.size(); ++i) {
      GenerationConfig c = config;
      c.seed = config.seed + i;
      const auto out = generate(index, backend, std::span<const TokenId>(prefixes[i]), c);
      run_steps += out.trace.step_count();
      total_tokens += out.trace.token_count();
    }
    const auto t1 = std::chrono::steady_clock::now();
    total_steps += run_steps;
    const double k = static_cast<double>(prefixes.size());
    seconds.push_back(std::chrono::duration<double>(t1 - t0).count() / k);
    steps.push_back(static_cast<double>(run_steps) / k);
  }
  r.median_seconds_per_sample = median(seconds);
  r.median_steps_per_sample = median(steps);
  r.tokens_per_step =
      total_steps == 0 ? 0.0 : static_cast<double>(total_tokens) / static_cast<double>(total_steps);
  return r;
}

}  // namespace

BenchReport bench(const PhraseIndex& index, const EncoderBackend& backend,
                  const std::vector<std::vector<TokenId>>& prefixes,
                  const GenerationConfig& config, std::size_t runs) {
  if (prefixes.empty()) throw DataError("bench needs at least one prefix");
  if (runs == 0) throw UsageError("bench needs at least one run");
  BenchReport report;
  report.samples = prefixes.size();
  GenerationConfig phrase = config;
  phrase.search.tokens_only = false;
  GenerationConfig tokens = config;
  tokens.search.tokens_only = true;
  report.phrase = bench_mode(index, backend, prefixes, phrase, runs, "phrase");
  report.tokens_only = bench_mode(index, backend, prefixes, tokens, runs, "tokens_only");
  return report;
}

std::string bench_report_json(const BenchReport& report) {
  auto row = [](const BenchModeReport& m) {
    return json{{"mode", m.mode},
                {"runs", m.runs},
                {"median_seconds_per_sample", m.median_seconds_per_sample},
                {"median_steps_per_sample", m.median_steps_per_sample},
                {"tokens_per_step", m.tokens_per_step}};
  };
  return json{{"samples", report.samples},
              {"phrase", row(report.phrase)},
              {"tokens_only", row(report.tokens_only)}}
      .dump(2);
}

std::string StageArgs::str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("missing required argument --" + key);
  return it->second;
}

std::string StageArgs::str(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

long long StageArgs::integer(const std::string& key, long long fallback) const {
  if (!has(key)) return fallback;
  const auto& s = values_.at(key);
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("--" + key + " expects an integer, got '" + s + "'");
  }
}

double StageArgs::real(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const auto& s = values_.at(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("--" + key + " expects a number, got '" + s + "'");
  }
}

bool StageArgs::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto& s = values_.at(key);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw UsageError("--" + key + " expects true or false, got '" + s + "'");
}

namespace {

std::uint32_t u32_arg(const StageArgs& a, const std::string& key, long long fallback,
                      long long min_value = 0) {
  const long long v = a.integer(key, fallback);
  if (v < min_value || v > 0xFFFFFFFFLL) {
    throw UsageError("--" + key + " must be >= " + std::to_string(min_value));
  }
  return static_cast<std::uint32_t>(v);
}

std::uint64_t seed_arg(const StageArgs& a) {
  const long long v = a.integer("seed", 0);
  if (v < 0) throw UsageError("--seed must be non-negative");
  return static_cast<std::uint64_t>(v);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) lines.push_back(line);
  }
  return lines;
}

std::ofstream open_out(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

/// Path for sample i when several traces are written from one --trace-out.
std::string numbered_path(const std::string& base, std::size_t i, std::size_t count) {
  if (count == 1) return base;
  fs::path p(base);
  return (p.parent_path() / (p.stem().string() + "." + std::to_string(i) + p.extension().string()))
      .string();
}

std::vector<std::string> expand_glob(const std::string& pattern) {
  fs::path p(pattern);
  const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
  const std::string name = p.filename().string();
  std::vector<std::string> out;
  if (name.find_first_of("*?[") == std::string::npos) {
    if (!fs::exists(p)) throw DataError("no such trace file: " + pattern);
    return {pattern};
  }
  if (!fs::is_directory(dir)) throw DataError("no such directory: " + dir.string());
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() &&
        fnmatch(name.c_str(), entry.path().filename().string().c_str(), 0) == 0) {
      out.push_back(entry.path().string());
    }
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw DataError("no trace files match " + pattern);
  return out;
}

/// Encoder for the given stage: the toy backend (trained parameters from
/// --params, otherwise seeded) or the HTTP sidecar.
std::unique_ptr<EncoderBackend> make_backend(const StageArgs& a, const Vocabulary& vocab,
                                             std::uint32_t dim, std::uint64_t seed,
                                             const std::vector<float>* index_token_table) {
  const auto kind = a.str("backend", "toy");
  std::optional<ToyParams> params;
  if (a.has("params")) {
    params = ToyParams::load(a.str("params"));
  }
  if (kind == "toy") {
    if (!params) params = ToyParams::seeded(static_cast<std::uint32_t>(vocab.size()), dim, seed);
    return std::make_unique<ToyBackend>(std::move(*params));
  }
  if (kind == "sidecar") {
    std::vector<float> table;
    if (params) {
      for (TokenId w = 0; w < params->vocab_size(); ++w) {
        const auto row = params->token_row(w);
        table.insert(table.end(), row.begin(), row.end());
      }
    } else if (index_token_table != nullptr) {
      table = *index_token_table;
    } else {
      const auto seeded = ToyParams::seeded(static_cast<std::uint32_t>(vocab.size()), dim, seed);
      for (TokenId w = 0; w < seeded.vocab_size(); ++w) {
        const auto row = seeded.token_row(w);
        table.insert(table.end(), row.begin(), row.end());
      }
    }
    return std::make_unique<SidecarBackend>(a.str("sidecar-url"), vocab, std::move(table));
  }
  throw UsageError("unknown backend '" + kind + "' (expected toy or sidecar)");
}

std::vector<float> index_token_table(const PhraseIndex& index) {
  std::vector<float> table;
  for (TokenId w = 0; w < index.vocab_size(); ++w) {
    const auto row = index.token_row(w);
    table.insert(table.end(), row.begin(), row.end());
  }
  return table;
}

GenerationConfig generation_config(const StageArgs& a) {
  GenerationConfig c;
  c.mode = parse_decode_mode(a.str("mode", "greedy"));
  c.top_p = a.real("p", 0.95);
  const long long max_new = a.integer("max-new-tokens", 128);
  if (max_new < 0) throw UsageError("--max-new-tokens must be >= 0");
  c.max_new_tokens = static_cast<std::size_t>(max_new);
  c.prefix_tokens = u32_arg(a, "prefix-tokens", 32, 1);
  c.seed = seed_arg(a);
  c.coarse_refresh = u32_arg(a, "coarse-refresh", 1, 1);
  c.search.k_docs = u32_arg(a, "k-docs", 1024, 0);
  c.search.tokens_only = a.flag("tokens-only", false);
  c.search.include_tokens = a.flag("include-tokens", true);
  c.validate();
  return c;
}

std::string stage_ingest(const StageArgs& a) {
  Vocabulary vocab;
  if (a.has("vocab")) {
    vocab = Corpus::load(a.str("vocab")).vocabulary();
    vocab.freeze();
  }
  const auto corpus = ingest_corpus_file(a.str("input"), std::move(vocab));
  const auto out = a.str("out");
  if (const auto parent = fs::path(out).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  corpus.save(out);
  return json{{"stage", "ingest"},
              {"documents", corpus.size()},
              {"vocab_size", corpus.vocabulary().size()},
              {"tokens", corpus.total_tokens()},
              {"out", out}}
      .dump();
}

std::string stage_segment(const StageArgs& a) {
  const auto corpus = Corpus::load(a.str("corpus"));
  SegmenterConfig cfg;
  cfg.k_neighbors = u32_arg(a, "k", 16, 1);
  cfg.min_len = u32_arg(a, "lmin", 2, 1);
  cfg.max_len = u32_arg(a, "lmax", 8, 1);
  cfg.seed = seed_arg(a);
  cfg.dim = u32_arg(a, "d", ToyParams::kDefaultDim, 2);
  const auto segs = segment_corpus(corpus, cfg);
  std::size_t phrases = 0, segments = 0;
  for (const auto& s : segs) {
    segments += s.segments.size();
    for (const auto& seg : s.segments) phrases += seg.is_phrase() ? 1 : 0;
  }
  auto out = open_out(a.str("out"));
  write_segmentation(out, segs);
  return json{{"stage", "segment"},
              {"documents", segs.size()},
              {"segments", segments},
              {"phrase_segments", phrases},
              {"out", a.str("out")}}
      .dump();
}

std::string stage_build_index(const StageArgs& a) {
  const auto corpus = Corpus::load(a.str("corpus"));
  const auto backend = make_backend(a, corpus.vocabulary(), u32_arg(a, "d", 64, 2), seed_arg(a),
                                    nullptr);
  const auto index = PhraseIndex::build(corpus, *backend, u32_arg(a, "lmax", 8, 1));
  const auto out = a.str("out");
  if (const auto parent = fs::path(out).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  index.save(out);
  return json{{"stage", "build-index"},
              {"documents", index.num_docs()},
              {"tokens", index.total_tokens()},
              {"d", index.dim()},
              {"bytes", fs::file_size(out)},
              {"out", out}}
      .dump();
}

std::string stage_train(const StageArgs& a) {
  const auto corpus = Corpus::load(a.str("corpus"));
  std::ifstream seg_in(a.str("segments"));
  if (!seg_in) throw DataError("cannot open " + a.str("segments"));
  const auto segs = read_segmentation(seg_in);
  TrainHyperparams h;
  const long long steps = a.integer("steps", 1000);
  if (steps < 0) throw UsageError("--steps must be >= 0");
  h.steps = static_cast<std::size_t>(steps);
  h.learning_rate = a.real("lr", 1e-2);
  h.seed = seed_arg(a);
  h.dim = u32_arg(a, "d", 64, 2);
  h.max_len = u32_arg(a, "lmax", 8, 1);
  h.log_every = u32_arg(a, "log-every", 1, 1);
  if (a.has("target-acc")) h.target_accuracy = a.real("target-acc", 1.0);
  std::optional<ToyParams> init;
  if (a.has("init")) init = ToyParams::load(a.str("init"));
  const auto result = train_toy(corpus, segs, h, std::move(init));
  const auto out = a.str("out");
  if (const auto parent = fs::path(out).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  result.params.save(out);
  if (a.has("log")) {
    auto log = open_out(a.str("log"));
    write_metrics_jsonl(log, result.log);
  }
  const auto& last = result.log.back();
  json summary = {{"stage", "train-toy"}, {"steps", last.step},   {"L", last.total},
                  {"L_p", last.phrase},   {"L_t", last.token},    {"acc", last.accuracy},
                  {"diverged", result.diverged}, {"out", out}};
  if (result.diverged) throw DataError("training diverged (non-finite loss); last good parameters "
                                       "written to " + out);
  return summary.dump();
}

std::string stage_generate(const StageArgs& a) {
  const auto index = PhraseIndex::load(a.str("index"));
  const auto table = index_token_table(index);
  const auto backend = make_backend(a, index.vocabulary(), index.dim(), index.seed(), &table);
  const auto config = generation_config(a);
  const auto prefixes = read_lines(a.str("prefix-file"));
  if (prefixes.empty()) throw DataError("prefix file holds no prefixes");

  std::unique_ptr<std::ofstream> continuations;
  if (a.has("out")) continuations = std::make_unique<std::ofstream>(open_out(a.str("out")));
  json samples = json::array();
  for (std::size_t i = 0; i < prefixes.size(); ++i) {
    GenerationConfig c = config;
    c.seed = config.seed + i;
    const auto result = generate(index, *backend, prefixes[i], c);
    if (a.has("trace-out")) {
      auto trace = open_out(numbered_path(a.str("trace-out"), i, prefixes.size()));
      write_trace_jsonl(trace, result.trace, index.vocabulary());
    }
    if (continuations) *continuations << result.text << '\n';
    const auto st = step_stats(result.trace);
    samples.push_back({{"seed", c.seed},
                       {"steps", st.steps},
                       {"tokens", st.tokens},
                       {"mean_length", st.mean_length},
                       {"text", result.text}});
  }
  return json{{"stage", "generate"}, {"mode", to_string(config.mode)}, {"samples", samples}}.dump();
}

std::string stage_eval(const StageArgs& a) {
  const auto report = evaluate_trace_files(expand_glob(a.str("traces")));
  const auto text = eval_report_json(report);
  if (a.has("out")) {
    auto out = open_out(a.str("out"));
    out << text << '\n';
  }
  return text;
}

std::string stage_bench(const StageArgs& a) {
  const auto index = PhraseIndex::load(a.str("index"));
  const auto table = index_token_table(index);
  const auto backend = make_backend(a, index.vocabulary(), index.dim(), index.seed(), &table);
  const auto config = generation_config(a);
  Vocabulary vocab = index.vocabulary();
  vocab.freeze();
  std::vector<std::vector<TokenId>> prefixes;
  for (const auto& line : read_lines(a.str("prefix-file"))) prefixes.push_back(tokenize(line, vocab));
  const auto report =
      bench(index, *backend, prefixes, config, u32_arg(a, "runs", 20, 1));
  const auto text = bench_report_json(report);
  if (a.has("out")) {
    auto out = open_out(a.str("out"));
    out << text << '\n';
  }
  return text;
}

std::string stage_make_prefixes(const StageArgs& a) {
  const auto corpus = Corpus::load(a.str("corpus"));
  const std::size_t n = u32_arg(a, "n", static_cast<long long>(corpus.size()), 1);
  const std::size_t len = u32_arg(a, "prefix-tokens", 32, 1);
  auto out = open_out(a.str("out"));
  std::size_t written = 0;
  for (const auto& d : corpus.documents()) {
    if (written == n) break;
    if (d.tokens.empty()) continue;
    const std::size_t take = std::min(len, d.tokens.size());
    out << detokenize(std::span<const TokenId>(d.tokens).first(take), corpus.vocabulary()) << '\n';
    ++written;
  }
  return json{{"stage", "make-prefixes"}, {"prefixes", written}, {"out", a.str("out")}}.dump();
}

std::string json_scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw UsageError("stage arguments must be strings, numbers or booleans");
}

std::string substitute(std::string s, const std::map<std::string, std::string>& vars) {
  for (const auto& [key, value] : vars) {
    const std::string token = "{" + key + "}";
    for (auto pos = s.find(token); pos != std::string::npos; pos = s.find(token, pos + value.size())) {
      s.replace(pos, token.size(), value);
    }
  }
  return s;
}

}  // namespace

std::string run_stage(const std::string& stage, const StageArgs& args) {
  if (stage == "ingest") return stage_ingest(args);
  if (stage == "segment") return stage_segment(args);
  if (stage == "build-index") return stage_build_index(args);
  if (stage == "train-toy") return stage_train(args);
  if (stage == "generate") return stage_generate(args);
  if (stage == "eval") return stage_eval(args);
  if (stage == "bench") return stage_bench(args);
  if (stage == "make-prefixes") return stage_make_prefixes(args);
  throw UsageError("unknown stage '" + stage + "'");
}

std::vector<std::string> run_pipeline(const std::string& config_path,
                                      const std::map<std::string, std::string>& overrides) {
  std::ifstream in(config_path);
  if (!in) throw DataError("cannot open pipeline config " + config_path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("pipeline config " + config_path + " is not valid JSON: " + e.what());
  }
  if (!cfg.is_object()) throw DataError("pipeline config must be a JSON object");

  const fs::path base = fs::absolute(config_path).parent_path();
  auto resolve = [&](const std::string& p) {
    return fs::path(p).is_absolute() ? fs::path(p) : base / p;
  };
  std::map<std::string, std::string> vars;
  vars["config_dir"] = base.string();
  vars["data_dir"] = resolve(cfg.value("data_dir", ".")).lexically_normal().string();
  std::string workdir = cfg.value("workdir", "work");
  if (auto it = overrides.find("workdir"); it != overrides.end()) workdir = it->second;
  const fs::path work = fs::path(workdir).is_absolute() ? fs::path(workdir) : base / workdir;
  vars["workdir"] = work.lexically_normal().string();
  fs::create_directories(work);

  std::string seed = cfg.contains("seed") ? json_scalar_text(cfg["seed"]) : "0";
  if (auto it = overrides.find("seed"); it != overrides.end()) seed = it->second;

  std::vector<std::string> summaries;
  const json stages = cfg.value("stages", json::array());
  std::size_t number = 0;
  for (const auto& st : stages) {
    ++number;
    const std::string name = st.value("stage", "");
    try {
      StageArgs args;
      args.set("seed", seed);
      for (const auto& [key, value] : st.items()) {
        if (key == "stage") continue;
        std::string text = substitute(json_scalar_text(value), vars);
        args.set(key, std::move(text));
      }
      for (const auto& [key, value] : overrides) {
        if (key != "workdir") args.set(key, value);
      }
      // Relative file arguments live in the work directory.
      static const char* kPathKeys[] = {"input",  "out",   "corpus", "segments",   "index",
                                        "params", "log",   "vocab",  "prefix-file", "trace-out",
                                        "traces", "init"};
      for (const char* key : kPathKeys) {
        if (args.has(key) && fs::path(args.str(key)).is_relative()) {
          args.set(key, (work / args.str(key)).string());
        }
      }
      summaries.push_back(run_stage(name, args));
    } catch (const Error& e) {
      throw Error(e.kind(), "pipeline stage #" + std::to_string(number) + " '" + name +
                                "' failed: " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorKind::kInternal, "pipeline stage #" + std::to_string(number) + " '" +
                                            name + "' failed: " + e.what());
    }
  }
  return summaries;
}

}  // namespace cog
