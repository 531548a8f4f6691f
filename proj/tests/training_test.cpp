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
#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "cog/segmenter.hpp"
#include "cog/training.hpp"
#include "test_support.hpp"

namespace cog {
namespace {

// Straight-line transcription of the loss definitions, sharing nothing with
// the library beyond the parameter layout accessors.
struct Oracle {
  const Corpus& corpus;
  const ToyParams& p;
  std::size_t max_len;

  std::vector<std::vector<double>> contexts(const std::vector<TokenId>& toks) const {
    const std::size_t d = p.dim();
    std::vector<std::vector<double>> out;
    std::vector<double> prev(d, 0.0);
    for (TokenId t : toks) {
      std::vector<double> u(d);
      double n2 = 0;
      for (std::size_t i = 0; i < d; ++i) {
        u[i] = p.alpha() * p.embedding(t)[i] + (1 - p.alpha()) * prev[i];
        n2 += u[i] * u[i];
      }
      const double n = std::sqrt(n2);
      if (n > 0) {
        for (auto& x : u) x /= n;
      }
      out.push_back(u);
      prev = u;
    }
    return out;
  }

  std::vector<double> affine(std::span<const double> w, std::span<const double> b,
                             const std::vector<double>& x) const {
    std::vector<double> y(b.begin(), b.end());
    for (std::size_t r = 0; r < y.size(); ++r) {
      for (std::size_t k = 0; k < x.size(); ++k) y[r] += w[r * x.size() + k] * x[k];
    }
    return y;
  }

  static double lse(const std::vector<double>& xs) {
    double m = xs[0];
    for (double x : xs) m = std::max(m, x);
    double s = 0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
  }

  double token_score(const std::vector<double>& q, TokenId w) const {
    double s = 0;
    for (std::size_t i = 0; i < q.size(); ++i) s += q[i] * p.token_row(w)[i];
    return s;
  }

  double phrase_loss(const std::vector<SegmentedDocument>& docs) const {
    const std::size_t h = p.half_dim();
    double total = 0;
    std::size_t n = 0;
    for (const auto& sd : docs) {
      const auto ctx = contexts(corpus.doc(sd.doc_id).tokens);
      std::size_t cursor = 0;
      for (const auto& seg : sd.segments) {
        if (cursor > 0) {
          const auto& q = ctx[cursor - 1];
          std::vector<double> scores;
          double positive = 0;
          for (TokenId w = 0; w < p.vocab_size(); ++w) {
            scores.push_back(token_score(q, w));
            if (!seg.is_phrase() && w == seg.token) positive = scores.back();
          }
          if (seg.is_phrase()) {
            const auto sctx = contexts(corpus.doc(seg.source_doc).tokens);
            const std::size_t m = sctx.size();
            for (std::size_t s = 0; s < m; ++s) {
              const auto st = affine(p.start_weight(), p.start_bias(), sctx[s]);
              for (std::size_t e = s; e < m && e - s + 1 <= max_len; ++e) {
                const auto en = affine(p.end_weight(), p.end_bias(), sctx[e]);
                double sc = 0;
                for (std::size_t i = 0; i < h; ++i) sc += q[i] * st[i];
                for (std::size_t i = 0; i < h; ++i) sc += q[h + i] * en[i];
                scores.push_back(sc);
                if (s == seg.start && e == seg.end) positive = sc;
              }
            }
          }
          total += lse(scores) - positive;
          ++n;
        }
        cursor += seg.length();
      }
    }
    return n ? total / static_cast<double>(n) : 0.0;
  }

  double token_loss(const std::vector<SegmentedDocument>& docs) const {
    double total = 0;
    std::size_t n = 0;
    for (const auto& sd : docs) {
      const auto& toks = corpus.doc(sd.doc_id).tokens;
      const auto ctx = contexts(toks);
      for (std::size_t i = 1; i < toks.size(); ++i) {
        std::vector<double> logits;
        for (TokenId w = 0; w < p.vocab_size(); ++w) logits.push_back(token_score(ctx[i - 1], w));
        total += lse(logits) - logits[toks[i]];
        ++n;
      }
    }
    return n ? total / static_cast<double>(n) : 0.0;
  }
};

struct SeededFixture {
  Corpus corpus;
  std::vector<SegmentedDocument> segs;
  ToyParams params;

  SeededFixture(std::uint64_t seed, std::uint32_t dim, std::size_t docs) {
    const std::vector<std::string> pool = {
        "the cat sat on the mat today", "on the mat the cat slept", "a dog sat on the mat",
        "the cat and the dog sat", "today the dog slept on the mat"};
    std::vector<std::string> texts(pool.begin(), pool.begin() + static_cast<long>(docs));
    corpus = testing::corpus_from_texts(texts);
    SegmenterConfig cfg;
    cfg.seed = seed;
    segs = segment_corpus(corpus, cfg);
    params = ToyParams::seeded(corpus.vocabulary().size(), dim, seed);
    // Nonzero biases so their gradients are exercised.
    Rng rng(seed + 100);
    for (std::size_t i = 0; i < params.half_dim(); ++i) {
      params.values()[params.start_bias_offset() + i] = rng.uniform(-0.2, 0.2);
      params.values()[params.end_bias_offset() + i] = rng.uniform(-0.2, 0.2);
    }
  }
};

}  // namespace

TEST(InfoNce, Examples) {
  EXPECT_EQ(info_nce_term(std::vector<double>{3.0}, 0), 0.0);
  EXPECT_NEAR(info_nce_term(std::vector<double>{1.5, 1.5}, 1), std::log(2.0), 1e-15);
  const std::vector<double> s = {0.1, 2.0, -1.0};
  const std::vector<double> shifted = {100.1, 102.0, 99.0};
  EXPECT_NEAR(info_nce_term(s, 2), info_nce_term(shifted, 2), 1e-12);
}

TEST(PhraseLoss, SinglePositiveCandidateIsZero) {
  const auto c = testing::corpus_from_texts({"a b", "b"});
  const auto a = *c.vocabulary().find("a");
  std::vector<SegmentedDocument> segs = {
      {0, {Segment::single_token(a), Segment::phrase(1, 0, 0)}}};
  const auto batch = TrainingBatch::build(c, segs);
  const auto params = ToyParams::seeded(c.vocabulary().size(), 4, 1);
  LossOptions opt;
  opt.token_negatives = false;
  const auto r = phrase_loss(batch, params, opt);
  EXPECT_EQ(r.report.segments, 1u);
  EXPECT_EQ(r.report.phrase, 0.0);
}

TEST(PhraseLoss, TwoEqualCandidatesIsLogTwo) {
  const auto c = testing::corpus_from_texts({"a b", "b c"});
  const auto a = *c.vocabulary().find("a");
  std::vector<SegmentedDocument> segs = {
      {0, {Segment::single_token(a), Segment::phrase(1, 0, 0)}}};
  const auto batch = TrainingBatch::build(c, segs, 1);
  const ToyParams zero(c.vocabulary().size(), 4, 0.5, 0);
  LossOptions opt;
  opt.token_negatives = false;
  EXPECT_NEAR(phrase_loss(batch, zero, opt).report.phrase, std::log(2.0), 1e-15);
}

TEST(PhraseLoss, MatchesFormulaOracle) {
  for (std::uint64_t seed : {1, 2, 3}) {
    SeededFixture f(seed, 8, 3);
    const auto batch = TrainingBatch::build(f.corpus, f.segs);
    const Oracle oracle{f.corpus, f.params, 8};
    EXPECT_NEAR(phrase_loss(batch, f.params).report.phrase, oracle.phrase_loss(f.segs), 1e-12);
  }
}

TEST(TokenLoss, UniformLogitsGiveLogV) {
  const auto c = testing::corpus_from_texts({"a b c d", "c d e"});
  std::vector<SegmentedDocument> segs;
  SegmenterConfig cfg;
  segs = segment_corpus(c, cfg);
  const auto batch = TrainingBatch::build(c, segs);
  const ToyParams zero(c.vocabulary().size(), 4, 0.5, 0);
  EXPECT_NEAR(token_loss(batch, zero).report.token,
              std::log(static_cast<double>(c.vocabulary().size())), 1e-14);
}

TEST(TokenLoss, SingleTokenVocabularyIsZero) {
  // Only UNK: every surface of the frozen ingest maps to id 0.
  Vocabulary frozen;
  frozen.freeze();
  std::istringstream in("{\"id\":0,\"text\":\"x y z\"}\n");
  const auto c = ingest_corpus(in, frozen);
  ASSERT_EQ(c.vocabulary().size(), 1u);
  std::vector<SegmentedDocument> segs = {
      {0, {Segment::single_token(0), Segment::single_token(0), Segment::single_token(0)}}};
  const auto batch = TrainingBatch::build(c, segs);
  const auto r = token_loss(batch, ToyParams::seeded(1, 4, 0));
  EXPECT_EQ(r.report.positions, 2u);
  EXPECT_EQ(r.report.token, 0.0);
}

TEST(TokenLoss, MatchesFormulaOracle) {
  for (std::uint64_t seed : {4, 5}) {
    SeededFixture f(seed, 8, 3);
    const auto batch = TrainingBatch::build(f.corpus, f.segs);
    const Oracle oracle{f.corpus, f.params, 8};
    EXPECT_NEAR(token_loss(batch, f.params).report.token, oracle.token_loss(f.segs), 1e-12);
  }
}

TEST(TotalLoss, ExactSumAndOracle) {
  SeededFixture f(6, 8, 4);
  const auto batch = TrainingBatch::build(f.corpus, f.segs);
  const auto r = total_loss(batch, f.params).report;
  EXPECT_EQ(r.total, r.phrase + r.token);
  const Oracle oracle{f.corpus, f.params, 8};
  EXPECT_NEAR(r.total, oracle.phrase_loss(f.segs) + oracle.token_loss(f.segs), 1e-12);
  EXPECT_GE(r.phrase, 0.0);
  EXPECT_GE(r.token, 0.0);
}

TEST(TotalLoss, GradientsAdd) {
  SeededFixture f(7, 8, 3);
  const auto batch = TrainingBatch::build(f.corpus, f.segs);
  const auto gp = phrase_loss(batch, f.params).gradient;
  const auto gt = token_loss(batch, f.params).gradient;
  const auto g = total_loss(batch, f.params).gradient;
  ASSERT_EQ(g.size(), gp.size());
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g[i], gp[i] + gt[i], 1e-15);
}

TEST(TotalLoss, ZeroWhenBothTermsVanish) {
  Vocabulary frozen;
  frozen.freeze();
  std::istringstream in("{\"id\":0,\"text\":\"x\"}\n");
  const auto c = ingest_corpus(in, frozen);
  std::vector<SegmentedDocument> segs = {{0, {Segment::single_token(0)}}};
  const auto r = total_loss(TrainingBatch::build(c, segs), ToyParams::seeded(1, 4, 0)).report;
  EXPECT_EQ(r.phrase, 0.0);
  EXPECT_EQ(r.token, 0.0);
  EXPECT_EQ(r.total, 0.0);
}

TEST(TrainingBatch, RejectsUnresolvableSegments) {
  const auto c = testing::corpus_from_texts({"a b", "b c"});
  const auto a = *c.vocabulary().find("a");
  const std::vector<std::vector<Segment>> bad = {
      {Segment::single_token(a), Segment::phrase(5, 0, 0)},
      {Segment::single_token(a), Segment::phrase(1, 0, 3)},
      {Segment::single_token(a), Segment::phrase(1, 1, 1)},
      {Segment::single_token(a)},
  };
  for (const auto& segs : bad) {
    EXPECT_THROW(TrainingBatch::build(c, {{0, segs}}), DataError);
  }
}

TEST(FiniteDiff, QuadraticObjective) {
  const Objective quad = [](std::span<const double> x, std::vector<double>* g) {
    double f = 0;
    if (g) g->assign(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double c = static_cast<double>(i + 1);
      f += c * x[i] * x[i] + 0.5 * x[i];
      if (g) (*g)[i] = 2 * c * x[i] + 0.5;
    }
    return f;
  };
  const std::vector<double> theta = {0.3, -1.2, 2.0, 0.7};
  EXPECT_LT(finite_diff_check(quad, theta, 1e-4), 1e-10);
}

TEST(FiniteDiff, ConstantDirection) {
  const Objective flat = [](std::span<const double> x, std::vector<double>* g) {
    if (g) g->assign(x.size(), 0.0);
    return 3.0;
  };
  EXPECT_LT(finite_diff_check(flat, std::vector<double>{1, 2}, 1e-5), 1e-6);
}

TEST(FiniteDiff, ToyModelGradient) {
  SeededFixture f(8, 8, 3);
  const auto batch = TrainingBatch::build(f.corpus, f.segs);
  EXPECT_LT(finite_diff_check(batch, f.params, 1e-5), 1e-6);
}

TEST(TrainToy, ZeroStepsLeavesParamsUnchanged) {
  SeededFixture f(9, 8, 3);
  TrainHyperparams h;
  h.steps = 0;
  h.dim = 8;
  const auto r = train_toy(f.corpus, f.segs, h, f.params);
  EXPECT_EQ(r.params, f.params);
  EXPECT_EQ(r.log.size(), 1u);
}

TEST(TrainToy, LossNonIncreasingEarly) {
  SeededFixture f(10, 8, 4);
  TrainHyperparams h;
  h.steps = 10;
  h.learning_rate = 1e-2;
  h.dim = 8;
  h.seed = 10;
  const auto r = train_toy(f.corpus, f.segs, h);
  ASSERT_EQ(r.log.size(), 11u);
  for (std::size_t i = 1; i < r.log.size(); ++i) EXPECT_LE(r.log[i].total, r.log[i - 1].total);
}

TEST(TrainToy, DeterministicGivenSeed) {
  SeededFixture f(11, 8, 3);
  TrainHyperparams h;
  h.steps = 5;
  h.learning_rate = 0.5;
  h.dim = 8;
  h.seed = 3;
  EXPECT_EQ(train_toy(f.corpus, f.segs, h).params, train_toy(f.corpus, f.segs, h).params);
}

TEST(TrainToy, MetricsLogFormat) {
  SeededFixture f(12, 8, 3);
  TrainHyperparams h;
  h.steps = 2;
  h.dim = 8;
  const auto r = train_toy(f.corpus, f.segs, h);
  std::stringstream buf;
  write_metrics_jsonl(buf, r.log);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(buf, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char* key : {"step", "L", "L_p", "L_t", "acc"}) EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j["step"].get<std::size_t>(), lines);
    ++lines;
  }
  EXPECT_EQ(lines, 3u);
}

}  // namespace cog
