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

#include <vector>

#include "cog/common.hpp"

namespace cog {

TEST(Fnv1a64, MatchesReferenceValues) {
  Fnv1a64 empty;
  EXPECT_EQ(empty.digest(), 0xcbf29ce484222325ULL);
  Fnv1a64 a;
  a.update("a");
  EXPECT_EQ(a.digest(), 0xaf63dc4c8601ec8cULL);
  Fnv1a64 foobar;
  foobar.update("foobar");
  EXPECT_EQ(foobar.digest(), 0x85944171f73967e8ULL);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    differs |= x != c.uniform();
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, BelowStaysInRange) {
  Rng r(7);
  std::vector<int> hits(5, 0);
  for (int i = 0; i < 5000; ++i) {
    const auto v = r.below(5);
    ASSERT_LT(v, 5u);
    ++hits[v];
  }
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(SplitDot, SumsBothHalves) {
  const std::vector<float> q = {1, 2, 3, 4};
  const std::vector<float> v = {5, 6, 7, 8};
  EXPECT_DOUBLE_EQ(split_dot(q, v), 5 + 12 + 21 + 32);
}

TEST(SplitDot, RejectsSizeMismatch) {
  const std::vector<float> a = {1, 2};
  const std::vector<float> b = {1, 2, 3, 4};
  EXPECT_THROW(split_dot(a, b), DataError);
}

TEST(Cosine, ZeroVectorGivesZero) {
  const std::vector<float> z = {0, 0};
  const std::vector<float> v = {1, 0};
  EXPECT_EQ(cosine(z, v), 0.0);
  EXPECT_NEAR(cosine(v, v), 1.0, 1e-12);
}

}  // namespace cog
