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

// The transducer: a Transformer audio encoder with a CTC head, a causal
// Transformer decoder, and (in CopyNE mode) an LSTM entity encoder whose
// outputs feed a copy attention and the dictionary-enhanced output head.

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "copyne/autodiff.h"
#include "copyne/entity_dict.h"
#include "copyne/rng.h"
#include "copyne/tensor.h"
#include "copyne/vocab.h"

namespace copyne {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ModelMode { kBaseline, kCopyNE };

const char* mode_name(ModelMode mode);
ModelMode parse_mode(const std::string& name);

struct ModelConfig {
  ModelMode mode = ModelMode::kCopyNE;
  std::size_t d_model = 64;
  std::size_t n_heads = 2;
  std::size_t n_enc_layers = 2;
  std::size_t n_dec_layers = 2;
  std::size_t d_ff = 256;
  std::size_t d_attention = 64;
  std::size_t ne_lstm_layers = 1;
  std::size_t ne_hidden = 64;
  std::size_t frame_dim = 16;
  std::size_t max_positions = 1024;
  bool positional_encoding = true;

  /// Throws ModelError on an inconsistent configuration.
  void validate() const;

  /// Architecture sizes used for the full-scale Mandarin experiments.
  static ModelConfig full_scale();

  /// Flat key=value form, one pair per line, stable key order.
  std::string to_text() const;
  static ModelConfig from_map(const std::map<std::string, std::string>& kv);
};

/// Configuration, vocabulary and named weights. Baseline models carry no
/// entity encoder or copy projections and use a d_model-wide output head.
class Model {
 public:
  Model(ModelConfig config, Vocab vocab, Parameters params);

  /// Fresh weights drawn from the given stream.
  static Model initialize(const ModelConfig& config, const Vocab& vocab,
                          Rng& rng);

  const ModelConfig& config() const { return config_; }
  const Vocab& vocab() const { return vocab_; }
  const Parameters& params() const { return params_; }
  Parameters& params() { return params_; }
  bool copyne() const { return config_.mode == ModelMode::kCopyNE; }

 private:
  ModelConfig config_;
  Vocab vocab_;
  Parameters params_;
};

/// Sinusoidal position table of shape [length, width].
Tensor positional_table(std::size_t length, std::size_t width);

/// Encoder states h of shape [T, d_model] for frames of shape [T, D].
Var encode_audio(Graph& g, const Model& model, const Tensor& frames);

/// Row-wise log-distribution over the whole vocabulary including blank.
Var ctc_log_probs(Graph& g, const Model& model, Var h);

/// Decoder states d_0..d_u, one row per history position. The history
/// starts with bos and must not contain blank.
Var decoder_states(Graph& g, const Model& model, std::span<const TokenId> history,
                   Var h);

/// Per-layer cross-attention keys and values over encoder states.
struct CrossMemory {
  std::vector<Var> keys;
  std::vector<Var> values;
};
CrossMemory cross_memory(Graph& g, const Model& model, Var h);
Var decoder_states(Graph& g, const Model& model, std::span<const TokenId> history,
                   const CrossMemory& mem);

/// Entity representations [N+1, ne_hidden]; row 0 is the learned no-copy
/// vector, row i the last LSTM hidden state over entity i.
Var encode_entities(Graph& g, const Model& model, const EntityDict& dict);

struct CopyAttention {
  Var scores;  // [U, N+1]
  Var probs;   // [U, N+1], row-wise softmax of scores
};

/// Scaled dot-product copy attention of decoder states [U, d_model] over
/// entity representations; scores are divided by sqrt(d_attention).
CopyAttention copy_attention(Graph& g, const Model& model, Var states,
                             Var entities);
/// Same, with the key projection of the entities precomputed.
CopyAttention copy_attention_with_keys(Graph& g, const Model& model, Var states,
                                       Var entity_keys);
/// entities x W_k, shape [N+1, d_attention].
Var entity_keys(Graph& g, const Model& model, Var entities);

struct DictStep {
  Var dict_repr;    // [U, ne_hidden]
  Var token_probs;  // [U, decoder classes]
};

DictStep dict_enhanced_step(Graph& g, const Model& model, Var states,
                            Var entities, Var copy_probs);

/// Token distribution of the baseline head, [U, decoder classes].
Var baseline_step(Graph& g, const Model& model, Var states);

// Checkpoint file: "CPNE", u16 version, u32-length-prefixed key=value
// config block, then tensor records until end of file. All integers and
// values little-endian.
void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace copyne
