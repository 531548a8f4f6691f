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

#include <fstream>

#include "cog/metrics.hpp"
#include "test_support.hpp"

namespace cog {

TEST(RepN, RepeatedToken) {
  EXPECT_NEAR(rep_n(std::vector<TokenId>{1, 1, 1, 1}, 2), 200.0 / 3.0, 1e-12);
}

TEST(RepN, AllDistinct) { EXPECT_EQ(rep_n(std::vector<TokenId>{1, 2, 3, 4, 5}, 2), 0.0); }

TEST(RepN, ShorterThanN) {
  EXPECT_EQ(rep_n(std::vector<TokenId>{1, 2}, 3), 0.0);
  EXPECT_EQ(rep_n(std::vector<TokenId>{}, 2), 0.0);
}

TEST(RepN, RejectsZeroN) { EXPECT_THROW(rep_n(std::vector<TokenId>{1}, 0), UsageError); }

TEST(RepN, InvariantUnderTokenRelabelling) {
  const std::vector<TokenId> a = {1, 2, 1, 2, 3, 1, 2, 3, 3};
  std::vector<TokenId> b;
  for (auto t : a) b.push_back(t * 7 + 100);
  for (std::size_t n = 1; n <= 4; ++n) EXPECT_EQ(rep_n(a, n), rep_n(b, n));
}

TEST(Diversity, Examples) {
  EXPECT_DOUBLE_EQ(diversity_from_reps(0, 0, 0), 100.0);
  EXPECT_NEAR(diversity_from_reps(50, 50, 50), 12.5, 1e-12);
  EXPECT_NEAR(diversity_from_reps(3.33, 0.69, 0.21), 95.80, 0.005);
}

TEST(Diversity, FromTokens) {
  const std::vector<TokenId> t = {1, 1, 1, 1};
  const double expected = 100.0 * (1 - rep_n(t, 2) / 100) * (1 - rep_n(t, 3) / 100) *
                          (1 - rep_n(t, 4) / 100);
  EXPECT_DOUBLE_EQ(diversity(t), expected);
}

TEST(EvalReport, SingleSampleEqualsItsMetrics) {
  const auto r = evaluate_samples({{"s", {"a", "b", "a", "b", "c"}}});
  ASSERT_EQ(r.samples.size(), 1u);
  EXPECT_EQ(r.mean.rep_2, r.samples[0].rep_2);
  EXPECT_EQ(r.mean.diversity, r.samples[0].diversity);
}

TEST(EvalReport, IdenticalSamples) {
  const std::vector<std::string> s = {"x", "y", "x", "y", "x"};
  const auto r = evaluate_samples({{"a", s}, {"b", s}});
  EXPECT_DOUBLE_EQ(r.mean.rep_3, r.samples[0].rep_3);
  EXPECT_DOUBLE_EQ(r.mean.diversity, r.samples[1].diversity);
}

TEST(EvalReport, HandBuiltMeans) {
  // s1: a a a a      rep2 = 66.67, rep3 = 50, rep4 = 0
  // s2: a b c d      all zero
  // s3: a b a b      rep2 = 33.33, rep3 = 0, rep4 = 0
  const auto r = evaluate_samples({{"s1", {"a", "a", "a", "a"}},
                                   {"s2", {"a", "b", "c", "d"}},
                                   {"s3", {"a", "b", "a", "b"}}});
  EXPECT_NEAR(r.mean.rep_2, (200.0 / 3 + 0 + 100.0 / 3) / 3, 1e-9);
  EXPECT_NEAR(r.mean.rep_3, 50.0 / 3, 1e-9);
  EXPECT_NEAR(r.mean.rep_4, 0.0, 1e-12);
  const double d1 = 100 * (1 - 2.0 / 3) * 0.5;
  const double d3 = 100 * (1 - 1.0 / 3);
  EXPECT_NEAR(r.mean.diversity, (d1 + 100 + d3) / 3, 1e-9);
}

TEST(EvalReport, ReadsTraceFiles) {
  testing::TempDir dir;
  {
    std::ofstream f(dir.file("t.jsonl"));
    f << R"({"kind":"phrase","src":0,"s":0,"e":1,"token":null,"score":1,"prob":0.5,"surface":"a a","n":2})"
      << "\n"
      << R"({"kind":"token","src":null,"s":null,"e":null,"token":3,"score":1,"prob":0.5,"surface":"a","n":1})"
      << "\n"
      << R"({"kind":"token","src":null,"s":null,"e":null,"token":3,"score":1,"prob":0.5,"surface":"a","n":1})"
      << "\n";
  }
  const auto r = evaluate_trace_files({dir.file("t.jsonl")});
  ASSERT_EQ(r.samples.size(), 1u);
  EXPECT_EQ(r.samples[0].tokens, 4u);
  EXPECT_NEAR(r.samples[0].rep_2, 200.0 / 3, 1e-9);
  const auto json = nlohmann::json::parse(eval_report_json(r));
  EXPECT_EQ(json["format"], "cog-eval");
  EXPECT_TRUE(json.contains("mean"));
  EXPECT_TRUE(json.contains("samples"));
}

}  // namespace cog
