// Copyright 2026 The fairrank Authors
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

#include <algorithm>
#include <random>

#include "fairrank/stats.hpp"
#include "oracles.hpp"

namespace fairrank {
namespace {

PairedSample textbook() {
  const std::vector<double> before = {110, 122, 125, 120, 140, 124, 123, 137, 135, 145};
  const std::vector<double> after = {125, 115, 130, 140, 140, 115, 140, 125, 140, 135};
  PairedSample s;
  for (std::size_t i = 0; i < before.size(); ++i) s.pairs.emplace_back(before[i], after[i]);
  return s;
}

PairedSample from_diffs(const std::vector<double>& d) {
  PairedSample s;
  for (double x : d) s.pairs.emplace_back(0.0, x);
  return s;
}

TEST(Wilcoxon, TextbookExample) {
  auto s = textbook();
  auto two = wilcoxon_signed_rank(s, Alternative::two_sided);
  EXPECT_EQ(two.n, 9u);
  EXPECT_DOUBLE_EQ(two.w_plus, 27.0);
  EXPECT_DOUBLE_EQ(two.w_minus, 18.0);
  EXPECT_DOUBLE_EQ(two.statistic, 18.0);
  EXPECT_TRUE(two.exact);
  EXPECT_TRUE(two.sufficient);
  EXPECT_NEAR(two.p_value, 0.6328125, 1e-12);
  EXPECT_NEAR(wilcoxon_signed_rank(s, Alternative::greater).p_value, 0.31640625, 1e-12);
  EXPECT_NEAR(wilcoxon_signed_rank(s, Alternative::less).p_value, 0.705078125, 1e-12);
  EXPECT_DOUBLE_EQ(wilcoxon_signed_rank(s, Alternative::greater).statistic, 27.0);
}

TEST(Wilcoxon, AllPositiveGivesOneOverTwoToTheN) {
  for (std::size_t n = 1; n <= 20; ++n) {
    std::vector<double> d;
    for (std::size_t i = 1; i <= n; ++i) d.push_back(static_cast<double>(i));
    auto r = wilcoxon_signed_rank(from_diffs(d), Alternative::greater);
    EXPECT_NEAR(r.p_value, std::ldexp(1.0, -static_cast<int>(n)), 1e-15) << n;
    EXPECT_EQ(r.sufficient, n >= kWilcoxonMinPairs);
  }
}

TEST(Wilcoxon, MatchesEnumerationWithTies) {
  std::mt19937 rng(123);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<double> d;
    while (d.size() < n) {
      const int v = static_cast<int>(rng() % 9) - 4;  // small range forces ties
      if (v != 0) d.push_back(v * 0.5);
    }
    const auto ranks = oracle::abs_ranks(d);
    double w_plus = 0;
    for (std::size_t i = 0; i < n; ++i) w_plus += d[i] > 0 ? ranks[i] : 0.0;
    const auto [ge, le] = oracle::signed_rank_tails(ranks, w_plus);
    auto s = from_diffs(d);
    EXPECT_NEAR(wilcoxon_signed_rank(s, Alternative::greater).p_value, ge, 1e-12);
    EXPECT_NEAR(wilcoxon_signed_rank(s, Alternative::less).p_value, le, 1e-12);
    EXPECT_NEAR(wilcoxon_signed_rank(s, Alternative::two_sided).p_value,
                std::min(1.0, 2.0 * std::min(ge, le)), 1e-12);
    EXPECT_DOUBLE_EQ(wilcoxon_signed_rank(s, Alternative::greater).w_plus, w_plus);
  }
}

TEST(Wilcoxon, CriticalValuesForTwoSidedFivePercent) {
  const std::vector<std::pair<std::size_t, int>> table = {{6, 0},  {7, 2},   {8, 3}, {9, 5},
                                                          {10, 8}, {11, 10}, {12, 13}};
  for (const auto& [n, critical] : table) {
    std::vector<double> ranks;
    for (std::size_t i = 1; i <= n; ++i) ranks.push_back(static_cast<double>(i));
    const auto counts = detail::doubled_rank_sum_counts(ranks);
    const double total = std::ldexp(1.0, static_cast<int>(n));
    int largest = -1;
    double cum = 0;
    for (int w = 0; 2 * w < static_cast<int>(counts.size()); ++w) {
      cum += counts[static_cast<std::size_t>(2 * w)];
      if (2.0 * cum / total <= 0.05) largest = w;
    }
    EXPECT_EQ(largest, critical) << "n = " << n;
  }
}

TEST(Wilcoxon, SwappingArmsMirrorsTheTest) {
  auto s = textbook();
  PairedSample swapped;
  for (auto [a, b] : s.pairs) swapped.pairs.emplace_back(b, a);
  EXPECT_NEAR(wilcoxon_signed_rank(s, Alternative::greater).p_value,
              wilcoxon_signed_rank(swapped, Alternative::less).p_value, 1e-15);
  EXPECT_NEAR(wilcoxon_signed_rank(s, Alternative::two_sided).p_value,
              wilcoxon_signed_rank(swapped, Alternative::two_sided).p_value, 1e-15);
}

TEST(Wilcoxon, PairOrderDoesNotMatter) {
  auto s = textbook();
  std::mt19937 rng(4);
  const double p = wilcoxon_signed_rank(s, Alternative::two_sided).p_value;
  for (int i = 0; i < 20; ++i) {
    std::shuffle(s.pairs.begin(), s.pairs.end(), rng);
    EXPECT_EQ(wilcoxon_signed_rank(s, Alternative::two_sided).p_value, p);
  }
}

TEST(Wilcoxon, NormalApproximationAboveExactRange) {
  std::mt19937 rng(9);
  std::normal_distribution<double> noise(0.3, 1.0);
  std::vector<double> d;
  for (int i = 0; i < 40; ++i) d.push_back(noise(rng));
  auto r = wilcoxon_signed_rank(from_diffs(d), Alternative::two_sided);
  EXPECT_FALSE(r.exact);
  EXPECT_GT(r.p_value, 0.0);
  EXPECT_LE(r.p_value, 1.0);

  // Just above the exact range the approximation tracks the exact tail.
  std::vector<double> ranks;
  for (int i = 1; i <= 26; ++i) ranks.push_back(i);
  const auto counts = detail::doubled_rank_sum_counts(ranks);
  std::vector<double> diffs;
  double w_plus = 0;
  for (int i = 1; i <= 26; ++i) {
    const bool pos = i % 3 != 0 || i > 20;
    diffs.push_back(pos ? i : -i);
    w_plus += pos ? i : 0;
  }
  double exact = 0;
  for (std::size_t s = static_cast<std::size_t>(2 * w_plus); s < counts.size(); ++s) exact += counts[s];
  exact /= std::ldexp(1.0, 26);
  EXPECT_NEAR(wilcoxon_signed_rank(from_diffs(diffs), Alternative::greater).p_value, exact, 5e-3);
}

TEST(Wilcoxon, DropsZerosAndRejectsDegenerateSamples) {
  auto r = wilcoxon_signed_rank(from_diffs({0, 0, 1, 2, -3}), Alternative::two_sided);
  EXPECT_EQ(r.n, 3u);
  EXPECT_FALSE(r.sufficient);
  EXPECT_THROW(wilcoxon_signed_rank(from_diffs({0, 0, 0}), Alternative::two_sided), InputError);
  EXPECT_THROW(wilcoxon_signed_rank(PairedSample{}, Alternative::two_sided), InputError);
}

}  // namespace
}  // namespace fairrank
