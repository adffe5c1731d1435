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

// Inference over joint token / entity actions.
//
// Each action either emits one decoder class or copies a whole dictionary
// entry, and contributes exactly one log-probability term to the
// hypothesis score. Beams are synchronized on action count.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "copyne/entity_dict.h"
#include "copyne/network.h"
#include "copyne/tensor.h"
#include "copyne/vocab.h"

namespace copyne {

struct BeamConfig {
  std::size_t beam_width = 8;
  double gamma = 0.9;
  std::size_t max_actions = 64;
  ModelMode mode = ModelMode::kCopyNE;

  void validate() const;
};

/// Distribution over decoder classes followed by dictionary entries.
/// entities[0] belongs to the no-copy entry and is always 0.
struct MixedDistribution {
  std::vector<double> tokens;
  std::vector<double> entities;
};

/// Thresholded re-normalization. When the best real-entity copy probability
/// is below gamma, copying is switched off for the step. Tokens then get
/// P_c(none) * P_token and entities their copy probability.
MixedDistribution renormalized_q(std::span<const double> token_probs,
                                 std::span<const double> copy_probs,
                                 double gamma);

struct CopiedSpan {
  std::size_t begin = 0;  // token offset in the output, bos excluded
  std::size_t end = 0;    // exclusive
  std::size_t dict_index = 0;
  friend bool operator==(const CopiedSpan&, const CopiedSpan&) = default;
};

struct Hypothesis {
  TokenSeq tokens;  // starts with bos; copies are flattened
  double score = 0.0;
  std::size_t actions = 0;
  bool finished = false;
  std::vector<CopiedSpan> copied_spans;
};

/// Strict ordering used for pruning and the final pick: higher score, then
/// fewer tokens, then lexicographically smaller ids.
bool better(const Hypothesis& a, const Hypothesis& b);

struct DecodeResult {
  TokenSeq tokens;  // bos and eos stripped
  double score = 0.0;
  std::size_t actions = 0;
  std::vector<CopiedSpan> copied_spans;
  bool truncated = false;
};

/// Source of next-action distributions for a given (bos-prefixed) history.
class StepScorer {
 public:
  virtual ~StepScorer() = default;
  virtual MixedDistribution next(std::span<const TokenId> history) = 0;
};

/// Action-synchronous beam search. Classes map to token ids through
/// Vocab::id_of_class; emitting eos finishes a hypothesis.
DecodeResult beam_search(StepScorer& scorer, const EntityDict& dict,
                         const BeamConfig& config);

/// Scores steps with a trained model for one utterance. The encoder output,
/// cross-attention keys/values and entity keys are computed once at
/// construction.
class ModelScorer : public StepScorer {
 public:
  enum class Head {
    kTokensOnly,  // model's token head; copy actions never offered
    kCopy,        // dict-enhanced tokens plus thresholded copies
  };

  ModelScorer(const Model& model, const Tensor& frames, const EntityDict& dict,
              Head head, double gamma);

  MixedDistribution next(std::span<const TokenId> history) override;

  const Tensor& encoder_output() const { return encoded_; }

 private:
  const Model& model_;
  Head head_;
  double gamma_;
  Tensor encoded_;
  std::vector<Tensor> cross_keys_;
  std::vector<Tensor> cross_values_;
  Tensor entities_;
  Tensor keys_;
};

/// Token/entity beam search for a CopyNE model.
DecodeResult beam_search_copyne(const Model& model, const Tensor& frames,
                                const EntityDict& dict, const BeamConfig& config);

/// Token-only beam search. CopyNE models decode with the no-copy-only
/// dictionary.
DecodeResult beam_search_baseline(const Model& model, const Tensor& frames,
                                  const BeamConfig& config);

/// Dispatches on the model mode.
DecodeResult decode_utterance(const Model& model, const Tensor& frames,
                              const EntityDict& dict, const BeamConfig& config);

/// "start-end:dictIndex" items joined by ';'.
std::string format_copied_spans(const std::vector<CopiedSpan>& spans);

}  // namespace copyne
