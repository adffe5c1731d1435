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

// Teacher-forced training with per-batch dictionaries, and dataset-level
// decoding helpers.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "copyne/copy_supervision.h"
#include "copyne/corpus.h"
#include "copyne/decoding.h"
#include "copyne/entity_dict.h"
#include "copyne/eval.h"
#include "copyne/network.h"

namespace copyne {

class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Example {
  std::string utt_id;
  std::string transcript;
  TokenSeq tokens;
  std::vector<SpanRef> entities;
  Tensor frames;
};

/// Reads a manifest and its frames (paths relative to the manifest).
std::vector<Example> load_examples(const std::filesystem::path& manifest,
                                   const Vocab& vocab);
/// Same from in-memory utterances.
std::vector<Example> make_examples(const std::vector<Utterance>& utterances,
                                   const std::vector<Tensor>& frames,
                                   const Vocab& vocab);

std::vector<Reference> references(std::span<const Example> examples);

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 8;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double clip_norm = 5.0;
  double lambda = 0.7;
  double beta = 2.0;
  double dropout = 0.2;
  bool no_copy_loss = false;
  std::size_t dev_beam_width = 1;
  double dev_gamma = 0.9;
  std::uint64_t seed = 1;

  void validate() const;
};

struct BatchLoss {
  Var total;       // mean over the batch of the weighted per-utterance loss
  double l_trans;  // batch means of the components
  double l_ctc;
  double l_copy;
};

/// Builds the batch objective on g. The dictionary is encoded once and
/// shared by every utterance. Copy loss is included in CopyNE mode unless
/// use_copy_loss is false.
BatchLoss batch_loss(Graph& g, const Model& model, std::span<const Example* const> batch,
                     const EntityDict& dict, double lambda, bool use_copy_loss);

/// Adam with global-norm clipping. Moments follow the parameter insertion
/// order of the model.
class Adam {
 public:
  Adam(const TrainConfig& config) : config_(config) {}
  /// Returns the gradient norm before clipping.
  double step(Parameters& params, const Gradients& grads);

 private:
  TrainConfig config_;
  std::size_t t_ = 0;
  std::map<std::string, std::vector<double>> m_, v_;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double l_trans = 0.0;
  double l_ctc = 0.0;
  double l_copy = 0.0;
  double dev_cer = 0.0;
  double dev_ne_cer = 0.0;
};

/// "epoch\tl_trans\tl_ctc\tl_copy\tdev_cer\tdev_ne_cer".
std::string format_metrics(const EpochMetrics& m);

struct TrainResult {
  Model best;
  Model last;
  std::size_t best_epoch = 0;
  std::vector<EpochMetrics> history;
};

/// Trains from a freshly initialized model. `on_epoch` is called after each
/// epoch with the metrics, whether the epoch is the new best, and the current
/// model. Throws
/// NonFiniteLoss naming the epoch and batch.
TrainResult train(const TrainConfig& config, const ModelConfig& model_config,
                  const Vocab& vocab, std::span<const Example> train_set,
                  std::span<const Example> dev_set, const EntityDict& global_dict,
                  const EntityDict& dev_dict,
                  const std::function<void(const EpochMetrics&, bool, const Model&)>& on_epoch = {});

struct DecodedUtterance {
  std::string utt_id;
  std::string text;
  DecodeResult result;
};

std::vector<DecodedUtterance> decode_examples(const Model& model,
                                              std::span<const Example> examples,
                                              const EntityDict& dict,
                                              const BeamConfig& config);

/// One line per utterance: utt_id, text, score, copied spans.
std::string format_decode_output(const std::vector<DecodedUtterance>& decoded);

Scores score_decoded(std::span<const Example> examples,
                     const std::vector<DecodedUtterance>& decoded);

}  // namespace copyne
