// Copyright 2026 The papb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "papb/error.hpp"
#include "papb/textmetrics/edit_distance.hpp"
#include "test_util.hpp"

namespace papb::text {
namespace {

std::vector<int> ids(const std::string &s) { return {s.begin(), s.end()}; }

EditStats ed(const std::string &a, const std::string &b) {
  const auto x = ids(a), y = ids(b);
  return edit_distance<int>(x, y);
}

TEST(EditDistance, IdenticalIsZero) { EXPECT_EQ(ed("abc", "abc").total, 0); }

TEST(EditDistance, EmptyHypothesisIsAllDeletions) {
  const EditStats s = ed("abc", "");
  EXPECT_EQ(s.total, 3);
  EXPECT_EQ(s.deletions, 3);
  EXPECT_EQ(s.insertions, 0);
  EXPECT_EQ(s.substitutions, 0);
}

TEST(EditDistance, KittenSitting) { EXPECT_EQ(ed("kitten", "sitting").total, 3); }

TEST(EditDistance, BacktracePrefersSubstitution) {
  // "ab" vs "ba": two substitutions rather than an insertion plus deletion.
  const EditStats s = ed("ab", "ba");
  EXPECT_EQ(s.total, 2);
  EXPECT_EQ(s.substitutions, 2);
}

TEST(EditDistance, ComponentsSumToTotal) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> len(0, 9), ch('a', 'd');
  for (int t = 0; t < 300; ++t) {
    std::string a, b;
    for (int i = len(rng); i > 0; --i) a += static_cast<char>(ch(rng));
    for (int i = len(rng); i > 0; --i) b += static_cast<char>(ch(rng));
    const EditStats s = ed(a, b);
    EXPECT_EQ(s.total, s.substitutions + s.insertions + s.deletions);
    EXPECT_GE(s.substitutions, 0);
    // Alignment bookkeeping: |hyp| = |ref| - deletions + insertions.
    EXPECT_EQ(static_cast<int>(b.size()),
              static_cast<int>(a.size()) - s.deletions + s.insertions);
  }
}

TEST(EditDistance, SwappingArgumentsSwapsInsertionsAndDeletionsInTotal) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> len(0, 8), ch('a', 'c');
  for (int t = 0; t < 300; ++t) {
    std::string a, b;
    for (int i = len(rng); i > 0; --i) a += static_cast<char>(ch(rng));
    for (int i = len(rng); i > 0; --i) b += static_cast<char>(ch(rng));
    const EditStats ab = ed(a, b), ba = ed(b, a);
    EXPECT_EQ(ab.total, ba.total);
    // The counts are tied to the length difference, so they swap exactly
    // whenever the alignment uses the same number of substitutions.
    EXPECT_EQ(ab.insertions - ab.deletions, ba.deletions - ba.insertions);
  }
}

TEST(EditDistance, TriangleInequality) {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> len(0, 8), ch('a', 'd');
  for (int t = 0; t < 500; ++t) {
    std::string a, b, c;
    for (int i = len(rng); i > 0; --i) a += static_cast<char>(ch(rng));
    for (int i = len(rng); i > 0; --i) b += static_cast<char>(ch(rng));
    for (int i = len(rng); i > 0; --i) c += static_cast<char>(ch(rng));
    EXPECT_LE(ed(a, c).total, ed(a, b).total + ed(b, c).total);
  }
}

TEST(EditDistance, AgreesWithRecursiveOracleOnAllBinaryStrings) {
  const auto strings = testing::all_strings({0, 1}, 6);
  ASSERT_EQ(strings.size(), 127u);
  for (const auto &a : strings)
    for (const auto &b : strings)
      ASSERT_EQ(edit_distance<int>(a, b).total, testing::brute_edit(a, b));
}

TEST(CerCount, Examples) {
  EXPECT_EQ(cer_count(ids("abc"), ids("abc")), 0);
  EXPECT_EQ(cer_count(ids("ab"), ids("ba")), 2);
  EXPECT_EQ(cer_count(ids("abcd"), ids("abd")), 1);
}

TEST(PrefixCer, Examples) {
  EXPECT_EQ(prefix_cer(ids("abcd"), ids("xyz"), 0), 0);
  EXPECT_EQ(prefix_cer(ids("abcd"), ids("abxd"), 3), 1);
  EXPECT_EQ(prefix_cer(ids("ab"), ids("abcd"), 4), 2);
}

TEST(PrefixCer, NegativeLengthIsArgumentError) {
  EXPECT_THROW(prefix_cer(ids("a"), ids("a"), -1), ArgumentError);
}

TEST(PrefixCer, StepDifferencesBoundedByOne) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> len(0, 10), ch('a', 'c');
  for (int t = 0; t < 300; ++t) {
    std::string a, b;
    for (int i = len(rng); i > 0; --i) a += static_cast<char>(ch(rng));
    for (int i = len(rng); i > 0; --i) b += static_cast<char>(ch(rng));
    const int lim = static_cast<int>(std::min(a.size(), b.size()));
    for (int l = 0; l + 1 <= lim; ++l)
      EXPECT_LE(std::abs(prefix_cer(ids(a), ids(b), l + 1) - prefix_cer(ids(a), ids(b), l)), 1);
  }
}

TEST(Wer, Examples) {
  EXPECT_DOUBLE_EQ(wer("a b c", "a b c"), 0.0);
  EXPECT_DOUBLE_EQ(wer("a b c", "a c"), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(wer("a", "b"), 1.0);
}

TEST(Wer, EmptyReferenceCountsInsertions) {
  EXPECT_DOUBLE_EQ(wer("", "x y"), 2.0);
  EXPECT_DOUBLE_EQ(wer("", ""), 0.0);
}

TEST(SplitWords, DropsEmptyFields) {
  EXPECT_EQ(split_words("  a  bc d "), (std::vector<std::string>{"a", "bc", "d"}));
  EXPECT_TRUE(split_words("").empty());
}

TEST(SelectPseudoTrue, ReferenceInBeam) {
  const std::vector<NBestEntry> nb{{ids("abd"), -0.5}, {ids("abc"), -2.0}, {ids("x"), -3.0}};
  EXPECT_EQ(select_pseudo_true(nb, ids("abc")), 1u);
}

TEST(SelectPseudoTrue, TieGoesToHigherLogprob) {
  const std::vector<NBestEntry> nb{{ids("abx"), -2.0}, {ids("aby"), -1.0}};
  EXPECT_EQ(select_pseudo_true(nb, ids("abc")), 1u);
}

TEST(SelectPseudoTrue, FullTieGoesToLowerIndex) {
  const std::vector<NBestEntry> nb{{ids("abx"), -1.0}, {ids("aby"), -1.0}};
  EXPECT_EQ(select_pseudo_true(nb, ids("abc")), 0u);
}

TEST(SelectPseudoTrue, SingleElement) {
  const std::vector<NBestEntry> nb{{ids("zz"), -4.0}};
  EXPECT_EQ(select_pseudo_true(nb, ids("abc")), 0u);
}

TEST(SelectPseudoTrue, EmptyIsArgumentError) {
  EXPECT_THROW(select_pseudo_true({}, ids("a")), ArgumentError);
}

}  // namespace
}  // namespace papb::text
