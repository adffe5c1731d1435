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

// Training signals: per-batch entity dictionaries, copy targets, and the
// transcription, CTC and copy losses.

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "copyne/autodiff.h"
#include "copyne/entity_dict.h"
#include "copyne/network.h"
#include "copyne/rng.h"
#include "copyne/vocab.h"

namespace copyne {

class CtcError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Half-open token range [begin, end).
struct SpanRef {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const SpanRef&, const SpanRef&) = default;
};

struct LabeledTranscript {
  TokenSeq tokens;
  std::vector<SpanRef> entities;
};

/// Batch dictionary: no-copy entry, the batch's gold entities in order of
/// appearance, one or two random 2-3 token substrings for every instance
/// without entities, then floor(beta * m) negatives drawn without
/// replacement from the global inventory (m = entries before negatives).
EntityDict build_batch_dict(std::span<const LabeledTranscript> batch,
                            const EntityDict& global, double beta, Rng& rng);

/// sigma[i] is the dictionary index whose copy starts at token i, 0 if none.
using CopyTargets = std::vector<std::size_t>;

/// Left-to-right maximum matching of y against the dictionary.
CopyTargets build_copy_targets(std::span<const TokenId> y, const EntityDict& dict);

/// -sum_u log P(target_u) where row u of probs is the decoder distribution at
/// step u and targets are y followed by eos. Rows must equal |y| + 1.
Var trans_loss(Graph& g, Var probs, std::span<const TokenId> y);

/// CTC negative log-likelihood of y given per-frame log-probabilities over
/// the full vocabulary, via the forward recursion in log space.
Var ctc_loss(Graph& g, Var log_probs, std::span<const TokenId> y);
double ctc_loss(const Tensor& log_probs, std::span<const TokenId> y);

/// Smallest frame count that admits an alignment of y.
std::size_t ctc_min_frames(std::span<const TokenId> y);

/// -sum_u log P_c(targets[u]) with one row of copy_probs per target.
Var copy_loss(Graph& g, Var copy_probs, std::span<const std::size_t> targets);

struct LossBreakdown {
  double l_trans = 0.0;
  double l_ctc = 0.0;
  double l_copy = 0.0;
  double l_total = 0.0;
  double lambda = 0.0;
};

/// lambda * l_trans + (1 - lambda) * l_ctc, plus l_copy in CopyNE mode.
LossBreakdown total_loss(double l_trans, double l_ctc, double l_copy,
                         double lambda, ModelMode mode = ModelMode::kCopyNE);

}  // namespace copyne
