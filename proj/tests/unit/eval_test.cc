// Copyright 2026 The CopyNE Authors
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

#include "copyne/eval.h"

#include <gtest/gtest.h>

#include <algorithm>

#include "copyne/rng.h"
#include "copyne/vocab.h"
#include "oracles.h"

namespace copyne {
namespace {

std::vector<std::string> chars(std::string_view s) { return utf8_chars(s); }

ScoredUtterance utt(std::string id, std::string_view ref, std::string_view hyp,
                    std::vector<EntitySpan> spans = {}) {
  return {std::move(id), chars(ref), chars(hyp), std::move(spans)};
}

// Applies the ops to ref and checks the result is hyp.
std::vector<std::string> replay(const Alignment& a, const std::vector<std::string>& ref,
                                const std::vector<std::string>& hyp) {
  std::vector<std::string> out;
  for (const auto& op : a.ops) {
    switch (op.kind) {
      case EditKind::kMatch: out.push_back(ref[op.ref_pos]); break;
      case EditKind::kSubstitute:
      case EditKind::kInsert: out.push_back(hyp[op.hyp_pos]); break;
      case EditKind::kDelete: break;
    }
  }
  return out;
}

TEST(Align, IdenticalIsAllMatches) {
  const auto x = chars("abcd");
  const Alignment a = align(x, x);
  EXPECT_EQ(a.cost(), 0u);
  for (const auto& op : a.ops) EXPECT_EQ(op.kind, EditKind::kMatch);
}

TEST(Align, OneSubstitution) {
  const Alignment a = align(chars("abc"), chars("axc"));
  ASSERT_EQ(a.cost(), 1u);
  ASSERT_EQ(a.ops.size(), 3u);
  EXPECT_EQ(a.ops[1].kind, EditKind::kSubstitute);
  EXPECT_EQ(a.ops[1].ref_pos, 1u);
}

TEST(Align, EmptyHypothesisIsDeletions) {
  const Alignment a = align(chars("ab"), {});
  ASSERT_EQ(a.ops.size(), 2u);
  for (const auto& op : a.ops) EXPECT_EQ(op.kind, EditKind::kDelete);
  EXPECT_EQ(align({}, {}).cost(), 0u);
}

TEST(Align, FuzzedAgainstRecursiveDistance) {
  Rng rng(1, "align");
  const std::vector<std::string> alphabet{"a", "b", "c", "\xe4\xb8\x80"};
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::string> r(rng.below(10)), h(rng.below(10));
    for (auto& c : r) c = alphabet[rng.below(alphabet.size())];
    for (auto& c : h) c = alphabet[rng.below(alphabet.size())];
    const Alignment a = align(r, h);
    const std::size_t expect = copyne::testing::edit_distance_recursive(r, h);
    ASSERT_EQ(a.cost(), expect);
    ASSERT_EQ(edit_distance(r, h), expect);
    ASSERT_EQ(replay(a, r, h), h);
  }
}

TEST(Cer, Identical) {
  const std::vector<ScoredUtterance> u{utt("1", "abc", "abc")};
  EXPECT_EQ(cer(u), 0.0);
}

TEST(Cer, OneInThree) {
  const std::vector<ScoredUtterance> u{utt("1", "abc", "axc")};
  EXPECT_DOUBLE_EQ(cer(u), 1.0 / 3.0);
}

TEST(Cer, PoolsEditsOverLengths) {
  // Per-utterance rates 1.0 and 0.0 would average to 0.5; pooled is 1/10.
  const std::vector<ScoredUtterance> u{utt("1", "a", "b"), utt("2", "abcdefghi", "abcdefghi")};
  EXPECT_DOUBLE_EQ(cer(u), 0.1);
}

TEST(Cer, InsertionsCanExceedOne) {
  const std::vector<ScoredUtterance> u{utt("1", "a", "bcd")};
  EXPECT_DOUBLE_EQ(cer(u), 3.0);
}

TEST(NeCer, PerfectHypothesis) {
  const std::vector<ScoredUtterance> u{utt("1", "xxCDxx", "xxCDxx", {{2, 4}})};
  EXPECT_EQ(ne_cer(u), 0.0);
}

TEST(NeCer, SubstitutedEntityCharacter) {
  const std::vector<ScoredUtterance> u{utt("1", "xxCDxx", "xxCExx", {{2, 4}})};
  const Alignment a = align(u[0].ref, u[0].hyp);
  EXPECT_EQ(entity_segment(a, u[0].hyp, {2, 4}), chars("CE"));
  EXPECT_DOUBLE_EQ(ne_cer(u), 0.5);
}

TEST(NeCer, DeletedEntity) {
  const std::vector<ScoredUtterance> u{utt("1", "xxCDxx", "xxxx", {{2, 4}})};
  const Alignment a = align(u[0].ref, u[0].hyp);
  EXPECT_TRUE(entity_segment(a, u[0].hyp, {2, 4}).empty());
  EXPECT_DOUBLE_EQ(ne_cer(u), 1.0);
}

TEST(NeCer, InteriorInsertionIsKept) {
  const std::vector<ScoredUtterance> u{utt("1", "xCDx", "xCZDx", {{1, 3}})};
  const Alignment a = align(u[0].ref, u[0].hyp);
  EXPECT_EQ(entity_segment(a, u[0].hyp, {1, 3}), chars("CZD"));
}

TEST(NeCer, BoundaryInsertionIsExcluded) {
  const std::vector<ScoredUtterance> u{utt("1", "xCDx", "xZCDZx", {{1, 3}})};
  const Alignment a = align(u[0].ref, u[0].hyp);
  EXPECT_EQ(entity_segment(a, u[0].hyp, {1, 3}), chars("CD"));
  EXPECT_EQ(ne_cer(u), 0.0);
}

TEST(NeCer, FullSpanEqualsCer) {
  Rng rng(2, "full");
  const std::vector<std::string> alphabet{"a", "b", "c"};
  for (int i = 0; i < 500; ++i) {
    ScoredUtterance u;
    u.utt_id = "u";
    u.ref.resize(1 + rng.below(8));
    u.hyp.resize(rng.below(9));
    for (auto& c : u.ref) c = alphabet[rng.below(3)];
    for (auto& c : u.hyp) c = alphabet[rng.below(3)];
    u.entities = {{0, u.ref.size()}};
    const std::vector<ScoredUtterance> one{u};
    ASSERT_DOUBLE_EQ(ne_cer(one), cer(one));
  }
}

TEST(Scores, OrderInvariant) {
  std::vector<ScoredUtterance> u{utt("1", "abCDe", "abCEe", {{2, 4}}),
                                 utt("2", "xyz", "xz"),
                                 utt("3", "PQrs", "rs", {{0, 2}})};
  const Scores a = score_corpus(u);
  std::reverse(u.begin(), u.end());
  const Scores b = score_corpus(u);
  EXPECT_EQ(a.cer, b.cer);
  EXPECT_EQ(a.ne_cer, b.ne_cer);
  EXPECT_EQ(a.entity_edits, 3u);
  EXPECT_EQ(a.entity_ref_chars, 4u);
}

TEST(Scores, EmptyCorpusIsZero) {
  const Scores s = score_corpus({});
  EXPECT_EQ(s.cer, 0.0);
  EXPECT_EQ(s.ne_cer, 0.0);
}

TEST(Scores, InvalidSpanThrows) {
  const std::vector<ScoredUtterance> u{utt("1", "ab", "ab", {{1, 3}})};
  EXPECT_THROW(score_corpus(u), EvalError);
}

TEST(Report, FourDecimals) {
  const std::vector<ScoredUtterance> u{utt("1", "abc", "axc", {{0, 1}})};
  const std::string r = format_report(score_corpus(u));
  EXPECT_EQ(r.rfind("CER=0.3333\nNE-CER=0.0000\n", 0), 0u) << r;
  EXPECT_NE(r.find("ref_chars=3"), std::string::npos);
}

TEST(PairById, MatchesRegardlessOfOrder) {
  const std::vector<Reference> refs{{"a", "xy", {}}, {"b", "zw", {{0, 2}}}};
  const std::vector<HypothesisText> hyps{{"b", "zw"}, {"a", "x"}};
  const auto paired = pair_by_id(refs, hyps);
  ASSERT_EQ(paired.size(), 2u);
  EXPECT_EQ(paired[0].utt_id, "a");
  EXPECT_EQ(paired[0].hyp, chars("x"));
}

TEST(PairById, MismatchesThrow) {
  const std::vector<Reference> refs{{"a", "xy", {}}};
  EXPECT_THROW(pair_by_id(refs, std::vector<HypothesisText>{{"b", "xy"}}), EvalError);
  EXPECT_THROW(pair_by_id(refs, std::vector<HypothesisText>{}), EvalError);
  EXPECT_THROW(pair_by_id(refs, std::vector<HypothesisText>{{"a", "x"}, {"a", "y"}}), EvalError);
}

}  // namespace
}  // namespace copyne
