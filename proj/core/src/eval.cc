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

#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include "copyne/vocab.h"

namespace copyne {

std::size_t Alignment::cost() const {
  return static_cast<std::size_t>(std::count_if(
      ops.begin(), ops.end(), [](const EditOp& op) { return op.kind != EditKind::kMatch; }));
}

Alignment align(std::span<const std::string> ref, std::span<const std::string> hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::size_t> dp((n + 1) * (m + 1), 0);
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return dp[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }

  Alignment out;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const std::size_t here = at(i, j);
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && here == at(i - 1, j - 1)) {
      out.ops.push_back({EditKind::kMatch, i - 1, j - 1});
      --i;
      --j;
    } else if (i > 0 && j > 0 && here == at(i - 1, j - 1) + 1) {
      out.ops.push_back({EditKind::kSubstitute, i - 1, j - 1});
      --i;
      --j;
    } else if (i > 0 && here == at(i - 1, j) + 1) {
      out.ops.push_back({EditKind::kDelete, i - 1, j});
      --i;
    } else {
      out.ops.push_back({EditKind::kInsert, i, j - 1});
      --j;
    }
  }
  std::reverse(out.ops.begin(), out.ops.end());
  return out;
}

std::size_t edit_distance(std::span<const std::string> ref,
                          std::span<const std::string> hyp) {
  std::vector<std::size_t> prev(hyp.size() + 1), cur(hyp.size() + 1);
  for (std::size_t j = 0; j <= hyp.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      cur[j] = std::min({prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1),
                         prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[hyp.size()];
}

std::vector<std::string> entity_segment(const Alignment& alignment,
                                        std::span<const std::string> hyp,
                                        const EntitySpan& span) {
  std::size_t ref_len = 0;
  for (const auto& op : alignment.ops) {
    if (op.kind != EditKind::kInsert) ref_len = std::max(ref_len, op.ref_pos + 1);
  }
  std::vector<std::string> out;
  for (const auto& op : alignment.ops) {
    switch (op.kind) {
      case EditKind::kMatch:
      case EditKind::kSubstitute:
        if (op.ref_pos >= span.begin && op.ref_pos < span.end) out.push_back(hyp[op.hyp_pos]);
        break;
      case EditKind::kDelete:
        break;
      case EditKind::kInsert: {
        // Inside the span, or at an utterance edge the span touches; never
        // between the span and neighbouring reference text.
        const std::size_t at = op.ref_pos;
        const bool inside = at > span.begin && at < span.end;
        const bool leading = at == 0 && span.begin == 0;
        const bool trailing = at == ref_len && span.end == ref_len;
        if (inside || leading || trailing) out.push_back(hyp[op.hyp_pos]);
        break;
      }
    }
  }
  return out;
}

Scores score_corpus(std::span<const ScoredUtterance> utterances) {
  Scores s;
  for (const auto& u : utterances) {
    s.ref_chars += u.ref.size();
    const Alignment a = align(u.ref, u.hyp);
    s.edits += a.cost();
    for (const auto& span : u.entities) {
      if (span.end > u.ref.size() || span.begin >= span.end) {
        throw EvalError(u.utt_id + ": entity span outside the reference");
      }
      std::span<const std::string> entity(u.ref.data() + span.begin, span.end - span.begin);
      const auto segment = entity_segment(a, u.hyp, span);
      s.entity_ref_chars += entity.size();
      s.entity_edits += edit_distance(entity, segment);
    }
  }
  s.cer = s.ref_chars == 0 ? 0.0
                           : static_cast<double>(s.edits) / static_cast<double>(s.ref_chars);
  s.ne_cer = s.entity_ref_chars == 0 ? 0.0
                                     : static_cast<double>(s.entity_edits) /
                                           static_cast<double>(s.entity_ref_chars);
  return s;
}

double cer(std::span<const ScoredUtterance> utterances) {
  return score_corpus(utterances).cer;
}

double ne_cer(std::span<const ScoredUtterance> utterances) {
  return score_corpus(utterances).ne_cer;
}

std::string format_report(const Scores& scores) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "CER=%.4f\nNE-CER=%.4f\nref_chars=%zu\nedits=%zu\n"
                "entity_ref_chars=%zu\nentity_edits=%zu\n",
                scores.cer, scores.ne_cer, scores.ref_chars, scores.edits,
                scores.entity_ref_chars, scores.entity_edits);
  return buf;
}

std::vector<ScoredUtterance> pair_by_id(std::span<const Reference> refs,
                                        std::span<const HypothesisText> hyps) {
  std::unordered_map<std::string, const HypothesisText*> by_id;
  for (const auto& h : hyps) {
    if (!by_id.emplace(h.utt_id, &h).second) {
      throw EvalError("duplicate hypothesis id '" + h.utt_id + "'");
    }
  }
  if (by_id.size() != refs.size()) {
    throw EvalError("reference has " + std::to_string(refs.size()) +
                    " utterances, hypotheses have " + std::to_string(by_id.size()));
  }
  std::vector<ScoredUtterance> out;
  out.reserve(refs.size());
  for (const auto& r : refs) {
    auto it = by_id.find(r.utt_id);
    if (it == by_id.end()) throw EvalError("no hypothesis for utterance '" + r.utt_id + "'");
    out.push_back({r.utt_id, utf8_chars(r.text), utf8_chars(it->second->text), r.entities});
  }
  return out;
}

}  // namespace copyne
