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

#include "copyne/decoding.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace copyne {

void BeamConfig::validate() const {
  if (beam_width == 0) throw std::invalid_argument("beam_width must be >= 1");
  if (max_actions == 0) throw std::invalid_argument("max_actions must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("gamma must lie in [0, 1]");
  }
}

MixedDistribution renormalized_q(std::span<const double> token_probs,
                                 std::span<const double> copy_probs,
                                 double gamma) {
  if (copy_probs.empty()) {
    throw std::invalid_argument("copy distribution needs the no-copy entry");
  }
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t e = 1; e < copy_probs.size(); ++e) best = std::max(best, copy_probs[e]);
  const bool suppressed = best < gamma;
  const double keep = suppressed ? 1.0 : copy_probs[0];

  MixedDistribution q;
  q.tokens.resize(token_probs.size());
  for (std::size_t v = 0; v < token_probs.size(); ++v) {
    q.tokens[v] = suppressed ? token_probs[v] : keep * token_probs[v];
  }
  q.entities.assign(copy_probs.size(), 0.0);
  if (!suppressed) {
    for (std::size_t e = 1; e < copy_probs.size(); ++e) q.entities[e] = copy_probs[e];
  }
  return q;
}

bool better(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
  return a.tokens < b.tokens;
}

namespace {

Hypothesis extend(const Hypothesis& parent, bool copy, std::size_t item,
                  double prob, const EntityDict& dict) {
  Hypothesis child = parent;
  child.score += std::log(prob);
  child.actions += 1;
  if (copy) {
    const auto& entity = dict.entry(item);
    const std::size_t begin = child.tokens.size() - 1;
    child.tokens.insert(child.tokens.end(), entity.begin(), entity.end());
    child.copied_spans.push_back({begin, begin + entity.size(), item});
  } else {
    const TokenId id = Vocab::id_of_class(item);
    child.tokens.push_back(id);
    child.finished = id == Vocab::kEos;
  }
  return child;
}

DecodeResult to_result(const Hypothesis& h, bool truncated) {
  DecodeResult r;
  for (std::size_t i = 1; i < h.tokens.size(); ++i) {
    if (h.tokens[i] == Vocab::kEos) break;
    r.tokens.push_back(h.tokens[i]);
  }
  r.score = h.score;
  r.actions = h.actions;
  r.copied_spans = h.copied_spans;
  r.truncated = truncated;
  return r;
}

}  // namespace

DecodeResult beam_search(StepScorer& scorer, const EntityDict& dict,
                         const BeamConfig& config) {
  config.validate();
  Hypothesis root;
  root.tokens = {Vocab::kBos};
  std::vector<Hypothesis> active{root};
  std::vector<Hypothesis> done;

  for (std::size_t step = 0; step < config.max_actions && !active.empty(); ++step) {
    std::vector<Hypothesis> candidates;
    for (const auto& h : active) {
      const MixedDistribution q = scorer.next(h.tokens);
      for (std::size_t c = 0; c < q.tokens.size(); ++c) {
        if (q.tokens[c] > 0.0) candidates.push_back(extend(h, false, c, q.tokens[c], dict));
      }
      for (std::size_t e = 1; e < q.entities.size() && e < dict.size(); ++e) {
        if (q.entities[e] > 0.0) candidates.push_back(extend(h, true, e, q.entities[e], dict));
      }
    }
    const std::size_t keep = std::min(config.beam_width, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + keep,
                      candidates.end(), better);
    candidates.resize(keep);
    active.clear();
    for (auto& c : candidates) {
      if (c.finished) {
        done.push_back(std::move(c));
      } else {
        active.push_back(std::move(c));
      }
    }
    // Scores never increase, so a finished hypothesis that beats every
    // active one cannot be overtaken.
    if (!done.empty() && !active.empty()) {
      const auto& best_done = *std::min_element(done.begin(), done.end(), better);
      if (best_done.score > active.front().score) break;
    }
  }

  if (!done.empty()) {
    return to_result(*std::min_element(done.begin(), done.end(), better), false);
  }
  if (active.empty()) throw std::logic_error("beam search produced no hypotheses");
  return to_result(*std::min_element(active.begin(), active.end(), better), true);
}

// ModelScorer ---------------------------------------------------------------

ModelScorer::ModelScorer(const Model& model, const Tensor& frames,
                         const EntityDict& dict, Head head, double gamma)
    : model_(model), head_(head), gamma_(gamma) {
  Graph g(false);
  Var h = encode_audio(g, model, frames);
  encoded_ = g.value(h);
  const CrossMemory mem = cross_memory(g, model, h);
  for (std::size_t l = 0; l < mem.keys.size(); ++l) {
    cross_keys_.push_back(g.value(mem.keys[l]));
    cross_values_.push_back(g.value(mem.values[l]));
  }
  if (model.copyne()) {
    Var z = encode_entities(g, model, dict);
    entities_ = g.value(z);
    keys_ = g.value(entity_keys(g, model, z));
  } else if (head == Head::kCopy) {
    throw ModelError("baseline models cannot copy entities");
  }
}

MixedDistribution ModelScorer::next(std::span<const TokenId> history) {
  Graph g(false);
  CrossMemory mem;
  for (std::size_t l = 0; l < cross_keys_.size(); ++l) {
    mem.keys.push_back(g.external(cross_keys_[l]));
    mem.values.push_back(g.external(cross_values_[l]));
  }
  Var states = decoder_states(g, model_, history, mem);
  const std::size_t n = states.rows();
  Var last = slice(states, 0, n - 1, n);
  if (!model_.copyne()) {
    const Tensor& p = g.value(baseline_step(g, model_, last));
    return {{p.data().begin(), p.data().end()}, {0.0}};
  }
  Var ent = g.external(entities_);
  CopyAttention att = copy_attention_with_keys(g, model_, last, g.external(keys_));
  DictStep step = dict_enhanced_step(g, model_, last, ent, att.probs);
  const Tensor& tokens = g.value(step.token_probs);
  const Tensor& copies = g.value(att.probs);
  if (head_ == Head::kCopy) return renormalized_q(tokens.data(), copies.data(), gamma_);
  MixedDistribution q;
  q.tokens.assign(tokens.data().begin(), tokens.data().end());
  q.entities.assign(copies.size(), 0.0);
  return q;
}

DecodeResult beam_search_copyne(const Model& model, const Tensor& frames,
                                const EntityDict& dict, const BeamConfig& config) {
  if (!model.copyne()) throw ModelError("beam_search_copyne needs a CopyNE model");
  ModelScorer scorer(model, frames, dict, ModelScorer::Head::kCopy, config.gamma);
  return beam_search(scorer, dict, config);
}

DecodeResult beam_search_baseline(const Model& model, const Tensor& frames,
                                  const BeamConfig& config) {
  const EntityDict none;
  ModelScorer scorer(model, frames, none, ModelScorer::Head::kTokensOnly, config.gamma);
  return beam_search(scorer, none, config);
}

DecodeResult decode_utterance(const Model& model, const Tensor& frames,
                              const EntityDict& dict, const BeamConfig& config) {
  if (model.copyne()) return beam_search_copyne(model, frames, dict, config);
  return beam_search_baseline(model, frames, config);
}

std::string format_copied_spans(const std::vector<CopiedSpan>& spans) {
  std::string out;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (i > 0) out += ';';
    out += std::to_string(spans[i].begin) + "-" + std::to_string(spans[i].end) +
           ":" + std::to_string(spans[i].dict_index);
  }
  return out;
}

}  // namespace copyne
