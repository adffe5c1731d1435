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

// Character error rate and named-entity character error rate.

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace copyne {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EditKind { kMatch, kSubstitute, kDelete, kInsert };

struct EditOp {
  EditKind kind;
  std::size_t ref_pos;  // for kInsert: ref position the insertion precedes
  std::size_t hyp_pos;  // for kDelete: hyp position the deletion precedes
};

struct Alignment {
  std::vector<EditOp> ops;
  std::size_t cost() const;
};

/// Minimum-edit-distance alignment under unit costs. Backtrace prefers
/// match, then substitute, delete, insert.
Alignment align(std::span<const std::string> ref, std::span<const std::string> hyp);

/// Edit distance without backtrace.
std::size_t edit_distance(std::span<const std::string> ref,
                          std::span<const std::string> hyp);

struct EntitySpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive, in characters
};

struct ScoredUtterance {
  std::string utt_id;
  std::vector<std::string> ref;
  std::vector<std::string> hyp;
  std::vector<EntitySpan> entities;
};

struct Scores {
  double cer = 0.0;
  double ne_cer = 0.0;
  std::size_t ref_chars = 0;
  std::size_t edits = 0;
  std::size_t entity_ref_chars = 0;
  std::size_t entity_edits = 0;
};

/// The hypothesis characters that correspond to ref[span] under the
/// alignment: hyp positions matched or substituted against in-span ref
/// positions, plus insertions strictly between two in-span ref positions.
std::vector<std::string> entity_segment(const Alignment& alignment,
                                        std::span<const std::string> hyp,
                                        const EntitySpan& span);

/// Corpus-level pooled scores (sum of edits over sum of lengths).
Scores score_corpus(std::span<const ScoredUtterance> utterances);

double cer(std::span<const ScoredUtterance> utterances);
double ne_cer(std::span<const ScoredUtterance> utterances);

/// "CER=..\nNE-CER=..\n" followed by the count fields, 4 decimals.
std::string format_report(const Scores& scores);

struct Reference {
  std::string utt_id;
  std::string text;
  std::vector<EntitySpan> entities;
};

struct HypothesisText {
  std::string utt_id;
  std::string text;
};

/// Pairs hypotheses with references by utterance id, in reference order.
/// Throws EvalError when the id sets differ.
std::vector<ScoredUtterance> pair_by_id(std::span<const Reference> refs,
                                        std::span<const HypothesisText> hyps);

}  // namespace copyne
