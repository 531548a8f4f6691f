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
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cog/corpus.hpp"
#include "cog/decoder.hpp"
#include "cog/index.hpp"
#include "cog/metrics.hpp"
#include "cog/pipeline.hpp"
#include "cog/segmenter.hpp"
#include "cog/training.hpp"

namespace py = pybind11;

namespace {

cog::GenerationConfig make_config(const std::string& mode, double top_p, std::size_t max_new_tokens,
                                  std::size_t prefix_tokens, std::uint64_t seed,
                                  std::size_t k_docs, bool tokens_only) {
  cog::GenerationConfig c;
  c.mode = cog::parse_decode_mode(mode);
  c.top_p = top_p;
  c.max_new_tokens = max_new_tokens;
  c.prefix_tokens = prefix_tokens;
  c.seed = seed;
  c.search.k_docs = k_docs;
  c.search.tokens_only = tokens_only;
  return c;
}

}  // namespace

PYBIND11_MODULE(_cog, m) {
  m.doc() = "Phrase-copying text generation engine";

  auto base = py::register_exception<cog::Error>(m, "CogError", PyExc_RuntimeError);
  py::register_exception<cog::UsageError>(m, "UsageError", base.ptr());
  py::register_exception<cog::DataError>(m, "DataError", base.ptr());

  py::class_<cog::Vocabulary>(m, "Vocabulary")
      .def(py::init<>())
      .def("intern", &cog::Vocabulary::intern)
      .def("surface", &cog::Vocabulary::surface)
      .def("freeze", &cog::Vocabulary::freeze)
      .def_property_readonly("frozen", &cog::Vocabulary::frozen)
      .def("__len__", &cog::Vocabulary::size)
      .def_property_readonly("surfaces", &cog::Vocabulary::surfaces);

  m.def("split_surfaces", &cog::split_surfaces, py::arg("text"));
  m.def(
      "tokenize",
      [](const std::string& text, cog::Vocabulary& vocab) { return cog::tokenize(text, vocab); },
      py::arg("text"), py::arg("vocab"));
  m.def(
      "detokenize",
      [](const std::vector<cog::TokenId>& tokens, const cog::Vocabulary& vocab) {
        return cog::detokenize(tokens, vocab);
      },
      py::arg("tokens"), py::arg("vocab"));

  py::class_<cog::Document>(m, "Document")
      .def_readonly("id", &cog::Document::id)
      .def_readonly("external_id", &cog::Document::external_id)
      .def_readonly("text", &cog::Document::text)
      .def_readonly("tokens", &cog::Document::tokens);

  py::class_<cog::Corpus>(m, "Corpus")
      .def("__len__", &cog::Corpus::size)
      .def("doc", &cog::Corpus::doc, py::return_value_policy::reference_internal)
      .def_property_readonly("vocabulary", &cog::Corpus::vocabulary,
                             py::return_value_policy::reference_internal)
      .def_property_readonly("total_tokens", &cog::Corpus::total_tokens)
      .def("save", &cog::Corpus::save)
      .def_static("load", &cog::Corpus::load);

  m.def(
      "ingest",
      [](const std::string& path, std::optional<cog::Vocabulary> vocab) {
        if (!vocab) return cog::ingest_corpus_file(path);
        vocab->freeze();
        return cog::ingest_corpus_file(path, std::move(*vocab));
      },
      py::arg("path"), py::arg("vocab") = std::nullopt);

  py::class_<cog::Segment>(m, "Segment")
      .def_property_readonly("is_phrase", &cog::Segment::is_phrase)
      .def_readonly("source_doc", &cog::Segment::source_doc)
      .def_readonly("start", &cog::Segment::start)
      .def_readonly("end", &cog::Segment::end)
      .def_readonly("token", &cog::Segment::token)
      .def("__len__", &cog::Segment::length);

  py::class_<cog::SegmentedDocument>(m, "SegmentedDocument")
      .def_readonly("doc_id", &cog::SegmentedDocument::doc_id)
      .def_readonly("segments", &cog::SegmentedDocument::segments);

  m.def(
      "segment",
      [](const cog::Corpus& corpus, std::uint32_t k, std::uint32_t lmin, std::uint32_t lmax,
         std::uint32_t dim, std::uint64_t seed) {
        cog::SegmenterConfig c;
        c.k_neighbors = k;
        c.min_len = lmin;
        c.max_len = lmax;
        c.dim = dim;
        c.seed = seed;
        return cog::segment_corpus(corpus, c);
      },
      py::arg("corpus"), py::arg("k") = 16, py::arg("lmin") = 2, py::arg("lmax") = 8,
      py::arg("dim") = cog::ToyParams::kDefaultDim, py::arg("seed") = 0);
  m.def("reconstruct", &cog::reconstruct, py::arg("corpus"), py::arg("segmentation"));

  py::class_<cog::ToyParams>(m, "ToyParams")
      .def_static("seeded", &cog::ToyParams::seeded, py::arg("vocab_size"),
                  py::arg("dim") = cog::ToyParams::kDefaultDim,
                  py::arg("alpha") = cog::ToyParams::kDefaultAlpha, py::arg("seed") = 0)
      .def_property_readonly("dim", &cog::ToyParams::dim)
      .def_property_readonly("vocab_size", &cog::ToyParams::vocab_size)
      .def("__len__", &cog::ToyParams::size)
      .def("save", &cog::ToyParams::save)
      .def_static("load", &cog::ToyParams::load);

  py::class_<cog::TrainMetrics>(m, "TrainMetrics")
      .def_readonly("step", &cog::TrainMetrics::step)
      .def_readonly("total", &cog::TrainMetrics::total)
      .def_readonly("phrase", &cog::TrainMetrics::phrase)
      .def_readonly("token", &cog::TrainMetrics::token)
      .def_readonly("accuracy", &cog::TrainMetrics::accuracy);

  py::class_<cog::TrainResult>(m, "TrainResult")
      .def_readonly("params", &cog::TrainResult::params)
      .def_readonly("log", &cog::TrainResult::log)
      .def_readonly("diverged", &cog::TrainResult::diverged);

  m.def(
      "train_toy",
      [](const cog::Corpus& corpus, const std::vector<cog::SegmentedDocument>& segmentation,
         std::size_t steps, double lr, std::uint32_t dim, std::uint64_t seed, std::uint32_t lmax,
         std::optional<double> target_accuracy) {
        cog::TrainHyperparams h;
        h.steps = steps;
        h.learning_rate = lr;
        h.dim = dim;
        h.seed = seed;
        h.max_len = lmax;
        h.target_accuracy = target_accuracy;
        py::gil_scoped_release release;
        return cog::train_toy(corpus, segmentation, h);
      },
      py::arg("corpus"), py::arg("segmentation"), py::arg("steps") = 100, py::arg("lr") = 1e-2,
      py::arg("dim") = cog::ToyParams::kDefaultDim, py::arg("seed") = 0, py::arg("lmax") = 8,
      py::arg("target_accuracy") = std::nullopt);

  py::class_<cog::ToyBackend>(m, "ToyBackend")
      .def(py::init<cog::ToyParams>(), py::arg("params"))
      .def_property_readonly("params", &cog::ToyBackend::params);

  py::class_<cog::PhraseIndex>(m, "PhraseIndex")
      .def_static(
          "build",
          [](const cog::Corpus& corpus, const cog::ToyBackend& backend, std::uint32_t lmax) {
            return cog::PhraseIndex::build(corpus, backend, lmax);
          },
          py::arg("corpus"), py::arg("backend"), py::arg("lmax") = 8)
      .def_static("load", &cog::PhraseIndex::load)
      .def("save", &cog::PhraseIndex::save)
      .def_property_readonly("num_docs", &cog::PhraseIndex::num_docs)
      .def_property_readonly("dim", &cog::PhraseIndex::dim)
      .def_property_readonly("max_len", &cog::PhraseIndex::max_len)
      .def_property_readonly("vocab_size", &cog::PhraseIndex::vocab_size);

  py::class_<cog::TraceStep>(m, "TraceStep")
      .def_readonly("choice", &cog::TraceStep::choice)
      .def_readonly("score", &cog::TraceStep::score)
      .def_readonly("prob", &cog::TraceStep::prob)
      .def_readonly("emitted", &cog::TraceStep::emitted);

  py::class_<cog::GenerationResult>(m, "GenerationResult")
      .def_readonly("prefix", &cog::GenerationResult::prefix)
      .def_readonly("continuation", &cog::GenerationResult::continuation)
      .def_readonly("text", &cog::GenerationResult::text)
      .def_property_readonly("steps",
                             [](const cog::GenerationResult& r) { return r.trace.steps; });

  m.def(
      "generate",
      [](const cog::PhraseIndex& index, const cog::ToyBackend& backend, const std::string& prefix,
         const std::string& mode, double top_p, std::size_t max_new_tokens,
         std::size_t prefix_tokens, std::uint64_t seed, std::size_t k_docs, bool tokens_only) {
        const auto config =
            make_config(mode, top_p, max_new_tokens, prefix_tokens, seed, k_docs, tokens_only);
        py::gil_scoped_release release;
        return cog::generate(index, backend, std::string_view(prefix), config);
      },
      py::arg("index"), py::arg("backend"), py::arg("prefix"), py::arg("mode") = "greedy",
      py::arg("top_p") = 0.95, py::arg("max_new_tokens") = 128, py::arg("prefix_tokens") = 32,
      py::arg("seed") = 0, py::arg("k_docs") = 1024, py::arg("tokens_only") = false);

  m.def(
      "rep_n",
      [](const std::vector<cog::TokenId>& tokens, std::size_t n) { return cog::rep_n(tokens, n); },
      py::arg("tokens"), py::arg("n"));
  m.def(
      "diversity",
      [](const std::vector<cog::TokenId>& tokens) { return cog::diversity(tokens); },
      py::arg("tokens"));
  m.def("diversity_from_reps", &cog::diversity_from_reps, py::arg("rep2"), py::arg("rep3"),
        py::arg("rep4"));

  m.def("run_pipeline", &cog::run_pipeline, py::arg("config"),
        py::arg("overrides") = std::map<std::string, std::string>{});
}
