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

#include "copyne/copy_supervision.h"

#include <algorithm>
#include <cmath>

namespace copyne {

namespace {

constexpr double kUnreachable = -1e30;

// -sum over rows of log(row . onehot(target)).
Var picked_nll(Graph& g, Var probs, std::span<const std::size_t> targets,
               const char* what) {
  const std::size_t rows = probs.rows(), cols = probs.cols();
  if (rows != targets.size()) {
    throw ShapeError(what, static_cast<int>(g.node_count()),
                     "[" + std::to_string(targets.size()) + ", *]", probs.shape());
  }
  Tensor onehot({rows, cols}, 0.0);
  for (std::size_t u = 0; u < rows; ++u) {
    if (targets[u] >= cols) {
      throw ShapeError(what, static_cast<int>(g.node_count()),
                       "more than " + std::to_string(targets[u]) + " columns",
                       probs.shape());
    }
    onehot.at(u, targets[u]) = 1.0;
  }
  Var picked = matmul(mul(probs, g.constant(std::move(onehot))),
                      g.constant(Tensor({cols, 1}, 1.0)));
  return scale(sum(log(picked)), -1.0);
}

}  // namespace

EntityDict build_batch_dict(std::span<const LabeledTranscript> batch,
                            const EntityDict& global, double beta, Rng& rng) {
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be non-negative");
  Rng pseudo = rng.split("pseudo-entities");
  Rng negatives = rng.split("negatives");
  EntityDict dict;
  for (const auto& inst : batch) {
    for (const auto& span : inst.entities) {
      if (span.end > inst.tokens.size() || span.end < span.begin + 2) continue;
      dict.add(TokenSeq(inst.tokens.begin() + span.begin,
                        inst.tokens.begin() + span.end),
               EntityOrigin::kGold);
    }
  }
  for (const auto& inst : batch) {
    if (!inst.entities.empty()) continue;
    const std::size_t n = inst.tokens.size();
    if (n < 2) continue;
    const std::size_t count = pseudo.between(1, 2);
    for (std::size_t k = 0; k < count; ++k) {
      // Rejection on duplicates, bounded so short transcripts terminate.
      for (int attempt = 0; attempt < 16; ++attempt) {
        const std::size_t len = std::min<std::size_t>(pseudo.between(2, 3), n);
        const std::size_t start = pseudo.below(n - len + 1);
        TokenSeq piece(inst.tokens.begin() + start,
                       inst.tokens.begin() + start + len);
        if (dict.add(piece, EntityOrigin::kPseudo)) break;
      }
    }
  }
  const std::size_t m = dict.entity_count();
  const auto wanted =
      static_cast<std::size_t>(std::floor(beta * static_cast<double>(m)));
  std::vector<std::size_t> pool;
  for (std::size_t i = 1; i < global.size(); ++i) {
    if (!dict.contains(global.entry(i))) pool.push_back(i);
  }
  const std::size_t take = std::min(wanted, pool.size());
  for (std::size_t k = 0; k < take; ++k) {
    const std::size_t j = k + negatives.below(pool.size() - k);
    std::swap(pool[k], pool[j]);
    dict.add(global.entry(pool[k]), EntityOrigin::kNegative);
  }
  return dict;
}

CopyTargets build_copy_targets(std::span<const TokenId> y, const EntityDict& dict) {
  CopyTargets sigma(y.size(), 0);
  const std::size_t longest = dict.max_entity_length();
  std::size_t i = 0;
  while (i < y.size()) {
    std::size_t matched = 0;
    const std::size_t cap = std::min(longest, y.size() - i);
    for (std::size_t len = cap; len >= 2; --len) {
      if (auto idx = dict.find(TokenSeq(y.begin() + i, y.begin() + i + len))) {
        sigma[i] = *idx;
        matched = len;
        break;
      }
    }
    i += matched == 0 ? 1 : matched;
  }
  return sigma;
}

Var trans_loss(Graph& g, Var probs, std::span<const TokenId> y) {
  std::vector<std::size_t> targets;
  targets.reserve(y.size() + 1);
  for (TokenId t : y) {
    if (t == Vocab::kBlank || t == Vocab::kBos) {
      throw std::invalid_argument("transcript contains a reserved token");
    }
    targets.push_back(Vocab::class_of(t));
  }
  targets.push_back(Vocab::class_of(Vocab::kEos));
  return picked_nll(g, probs, targets, "trans_loss");
}

std::size_t ctc_min_frames(std::span<const TokenId> y) {
  std::size_t n = y.size();
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (y[i] == y[i - 1]) ++n;
  }
  return n;
}

Var ctc_loss(Graph& g, Var log_probs, std::span<const TokenId> y) {
  const std::size_t frames = log_probs.rows();
  const std::size_t vocab = log_probs.cols();
  for (TokenId t : y) {
    if (t <= Vocab::kBlank || static_cast<std::size_t>(t) >= vocab) {
      throw CtcError("label " + std::to_string(t) + " invalid for CTC");
    }
  }
  if (frames < ctc_min_frames(y)) {
    throw CtcError("no valid alignment: " + std::to_string(frames) +
                   " frames for " + std::to_string(y.size()) + " labels");
  }

  // Blank-augmented labels: blank, y1, blank, y2, ..., blank.
  std::vector<TokenId> ext{Vocab::kBlank};
  for (TokenId t : y) {
    ext.push_back(t);
    ext.push_back(Vocab::kBlank);
  }
  const std::size_t states = ext.size();

  // emit[s, t] = log p_t(ext[s]) via a one-hot selection matmul.
  Tensor select({states, vocab}, 0.0);
  for (std::size_t s = 0; s < states; ++s) select.at(s, ext[s]) = 1.0;
  Var emit = matmul(g.constant(std::move(select)), log_probs, true);

  if (states == 1) return scale(sum(emit), -1.0);

  Tensor init({states, 1}, kUnreachable);
  init[0] = 0.0;
  init[1] = 0.0;
  Tensor skip({states, 1}, kUnreachable);
  for (std::size_t s = 2; s < states; ++s) {
    if (ext[s] != Vocab::kBlank && ext[s] != ext[s - 2]) skip[s] = 0.0;
  }
  Var skip_mask = g.constant(std::move(skip));
  Var pad1 = g.constant(Tensor({1, 1}, kUnreachable));
  Var pad2 = g.constant(Tensor({2, 1}, kUnreachable));

  Var alpha = add(slice(emit, 1, 0, 1), g.constant(std::move(init)));
  for (std::size_t t = 1; t < frames; ++t) {
    Var stay = alpha;
    Var step = concat({pad1, slice(alpha, 0, 0, states - 1)}, 0);
    Var jump = add(concat({pad2, slice(alpha, 0, 0, states - 2)}, 0), skip_mask);
    alpha = add(log_sum_exp(concat({stay, step, jump}, 1)), slice(emit, 1, t, t + 1));
  }
  // Column -> row so the final two states reduce along the last axis.
  Var tail = slice(alpha, 0, states - 2, states);
  Var tail_row = matmul(g.constant(Tensor::scalar(1.0)), tail, true);
  return scale(log_sum_exp(tail_row), -1.0);
}

double ctc_loss(const Tensor& log_probs, std::span<const TokenId> y) {
  Graph g(false);
  return g.value(ctc_loss(g, g.external(log_probs), y))[0];
}

Var copy_loss(Graph& g, Var copy_probs, std::span<const std::size_t> targets) {
  return picked_nll(g, copy_probs, targets, "copy_loss");
}

LossBreakdown total_loss(double l_trans, double l_ctc, double l_copy,
                         double lambda, ModelMode mode) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("lambda must lie in [0, 1]");
  }
  LossBreakdown out;
  out.lambda = lambda;
  out.l_trans = l_trans;
  out.l_ctc = l_ctc;
  out.l_copy = mode == ModelMode::kCopyNE ? l_copy : 0.0;
  out.l_total = lambda * l_trans + (1.0 - lambda) * l_ctc + out.l_copy;
  return out;
}

}  // namespace copyne
