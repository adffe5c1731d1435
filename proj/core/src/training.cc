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

#include "copyne/training.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace copyne {

std::vector<Example> make_examples(const std::vector<Utterance>& utterances,
                                   const std::vector<Tensor>& frames,
                                   const Vocab& vocab) {
  if (utterances.size() != frames.size()) {
    throw std::invalid_argument("utterance and frame counts differ");
  }
  std::vector<Example> out;
  out.reserve(utterances.size());
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    const auto& u = utterances[i];
    Example ex;
    ex.utt_id = u.utt_id;
    ex.transcript = u.transcript;
    try {
      ex.tokens = vocab.encode_strict(u.transcript);
    } catch (const VocabError& e) {
      throw CorpusError(u.utt_id + ": " + e.what());
    }
    for (const auto& s : u.spans) ex.entities.push_back({s.begin, s.end});
    ex.frames = frames[i];
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<Example> load_examples(const std::filesystem::path& manifest,
                                   const Vocab& vocab) {
  const auto utts = load_manifest(manifest);
  const auto base = manifest.parent_path();
  std::vector<Tensor> frames;
  frames.reserve(utts.size());
  for (const auto& u : utts) frames.push_back(read_frames(base / u.frames_path));
  return make_examples(utts, frames, vocab);
}

std::vector<Reference> references(std::span<const Example> examples) {
  std::vector<Reference> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    Reference r{ex.utt_id, ex.transcript, {}};
    for (const auto& s : ex.entities) r.entities.push_back({s.begin, s.end});
    out.push_back(std::move(r));
  }
  return out;
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
  };
  require(epochs >= 1, "epochs must be at least 1");
  require(batch_size >= 1, "batch_size must be at least 1");
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0, "adam_beta1 must lie in [0, 1)");
  require(adam_beta2 >= 0.0 && adam_beta2 < 1.0, "adam_beta2 must lie in [0, 1)");
  require(adam_eps > 0.0, "adam_eps must be positive");
  require(clip_norm > 0.0, "clip_norm must be positive");
  require(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0, 1]");
  require(beta >= 0.0, "beta must be non-negative");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  require(dev_beam_width >= 1, "dev_beam_width must be at least 1");
  require(dev_gamma >= 0.0 && dev_gamma <= 1.0, "dev_gamma must lie in [0, 1]");
}

BatchLoss batch_loss(Graph& g, const Model& model, std::span<const Example* const> batch,
                     const EntityDict& dict, double lambda, bool use_copy_loss) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const bool copyne = model.copyne();
  const bool with_copy = copyne && use_copy_loss;
  Var entities{};
  if (copyne) entities = encode_entities(g, model, dict);

  std::vector<Var> per_utt;
  double l_trans = 0.0, l_ctc = 0.0, l_copy = 0.0;
  for (const Example* ex : batch) {
    Var h = encode_audio(g, model, ex->frames);
    Var ctc = ctc_loss(g, ctc_log_probs(g, model, h), ex->tokens);

    TokenSeq history{Vocab::kBos};
    history.insert(history.end(), ex->tokens.begin(), ex->tokens.end());
    Var states = decoder_states(g, model, history, h);

    Var trans{};
    Var copy{};
    if (copyne) {
      CopyAttention att = copy_attention(g, model, states, entities);
      DictStep step = dict_enhanced_step(g, model, states, entities, att.probs);
      trans = trans_loss(g, step.token_probs, ex->tokens);
      if (with_copy) {
        CopyTargets targets = build_copy_targets(ex->tokens, dict);
        targets.push_back(0);  // the eos step copies nothing
        copy = copy_loss(g, att.probs, targets);
      }
    } else {
      trans = trans_loss(g, baseline_step(g, model, states), ex->tokens);
    }

    Var total = add(scale(trans, lambda), scale(ctc, 1.0 - lambda));
    if (with_copy) total = add(total, copy);
    per_utt.push_back(total);
    l_trans += g.value(trans)[0];
    l_ctc += g.value(ctc)[0];
    if (with_copy) l_copy += g.value(copy)[0];
  }
  const double n = static_cast<double>(batch.size());
  // Sequential sum in batch order keeps the reduction deterministic.
  Var sum_all = per_utt.front();
  for (std::size_t i = 1; i < per_utt.size(); ++i) sum_all = add(sum_all, per_utt[i]);
  return {scale(sum_all, 1.0 / n), l_trans / n, l_ctc / n, l_copy / n};
}

double Adam::step(Parameters& params, const Gradients& grads) {
  double norm2 = 0.0;
  for (const auto& name : params.names()) {
    auto it = grads.find(name);
    if (it == grads.end()) continue;
    for (double v : it->second.data()) norm2 += v * v;
  }
  const double norm = std::sqrt(norm2);
  const double factor = norm > config_.clip_norm ? config_.clip_norm / norm : 1.0;

  ++t_;
  const double b1 = config_.adam_beta1, b2 = config_.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (const auto& name : params.names()) {
    Tensor& p = params.get(name);
    auto& m = m_[name];
    auto& v = v_[name];
    if (m.empty()) {
      m.assign(p.size(), 0.0);
      v.assign(p.size(), 0.0);
    }
    auto it = grads.find(name);
    auto values = p.data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double gr = it == grads.end() ? 0.0 : it->second[i] * factor;
      m[i] = b1 * m[i] + (1.0 - b1) * gr;
      v[i] = b2 * v[i] + (1.0 - b2) * gr * gr;
      values[i] -= config_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.adam_eps);
    }
  }
  return norm;
}

std::string format_metrics(const EpochMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%zu\t%.6f\t%.6f\t%.6f\t%.4f\t%.4f", m.epoch, m.l_trans,
                m.l_ctc, m.l_copy, m.dev_cer, m.dev_ne_cer);
  return buf;
}

std::vector<DecodedUtterance> decode_examples(const Model& model,
                                              std::span<const Example> examples,
                                              const EntityDict& dict,
                                              const BeamConfig& config) {
  std::vector<DecodedUtterance> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    DecodeResult r = decode_utterance(model, ex.frames, dict, config);
    out.push_back({ex.utt_id, model.vocab().decode(r.tokens), std::move(r)});
  }
  return out;
}

std::string format_decode_output(const std::vector<DecodedUtterance>& decoded) {
  std::string out;
  char score[64];
  for (const auto& d : decoded) {
    std::snprintf(score, sizeof(score), "%.6f", d.result.score);
    out += d.utt_id + "\t" + d.text + "\t" + score + "\t" +
           format_copied_spans(d.result.copied_spans) + "\n";
  }
  return out;
}

Scores score_decoded(std::span<const Example> examples,
                     const std::vector<DecodedUtterance>& decoded) {
  const auto refs = references(examples);
  std::vector<HypothesisText> hyps;
  hyps.reserve(decoded.size());
  for (const auto& d : decoded) hyps.push_back({d.utt_id, d.text});
  const auto paired = pair_by_id(refs, hyps);
  return score_corpus(paired);
}

TrainResult train(const TrainConfig& config, const ModelConfig& model_config,
                  const Vocab& vocab, std::span<const Example> train_set,
                  std::span<const Example> dev_set, const EntityDict& global_dict,
                  const EntityDict& dev_dict,
                  const std::function<void(const EpochMetrics&, bool, const Model&)>& on_epoch) {
  config.validate();
  model_config.validate();
  if (train_set.empty()) throw std::invalid_argument("empty training set");

  Rng init(config.seed, "init");
  Model model = Model::initialize(model_config, vocab, init);
  Model best = model;
  std::size_t best_epoch = 0;
  double best_cer = std::numeric_limits<double>::infinity();
  Adam adam(config);
  std::vector<EpochMetrics> history;

  std::vector<LabeledTranscript> labeled;
  labeled.reserve(train_set.size());
  for (const auto& ex : train_set) labeled.push_back({ex.tokens, ex.entities});

  BeamConfig dev_beam;
  dev_beam.beam_width = config.dev_beam_width;
  dev_beam.gamma = config.dev_gamma;
  dev_beam.mode = model_config.mode;

  const Rng shuffle_root(config.seed, "shuffle");
  const Rng dict_root(config.seed, "batch-dict");
  const Rng dropout_root(config.seed, "dropout");
  std::vector<std::size_t> order(train_set.size());

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle = shuffle_root.split("epoch", epoch);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

    EpochMetrics m;
    m.epoch = epoch;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<const Example*> batch;
      std::vector<LabeledTranscript> batch_labels;
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(&train_set[order[i]]);
        batch_labels.push_back(labeled[order[i]]);
      }
      EntityDict dict;
      if (model.copyne()) {
        Rng rng = dict_root.split("epoch", epoch).split("batch", batches);
        dict = build_batch_dict(batch_labels, global_dict, config.beta, rng);
      }

      Graph g;
      g.enable_dropout(config.dropout, dropout_root.split("epoch", epoch).split("batch", batches));
      BatchLoss loss = batch_loss(g, model, batch, dict, config.lambda, !config.no_copy_loss);
      const double value = g.value(loss.total)[0];
      if (!std::isfinite(value)) {
        throw NonFiniteLoss("non-finite loss in epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batches) + " (first utterance " +
                            batch.front()->utt_id + ")");
      }
      g.backward(loss.total);
      adam.step(model.params(), g.parameter_gradients());
      m.l_trans += loss.l_trans;
      m.l_ctc += loss.l_ctc;
      m.l_copy += loss.l_copy;
      ++batches;
    }
    m.l_trans /= static_cast<double>(batches);
    m.l_ctc /= static_cast<double>(batches);
    m.l_copy /= static_cast<double>(batches);

    bool improved = false;
    if (!dev_set.empty()) {
      const auto decoded = decode_examples(model, dev_set, dev_dict, dev_beam);
      const Scores s = score_decoded(dev_set, decoded);
      m.dev_cer = s.cer;
      m.dev_ne_cer = s.ne_cer;
      // Strict improvement keeps the earliest of equally good epochs.
      if (s.cer < best_cer) improved = true;
    } else {
      improved = true;
    }
    if (improved) {
      best_cer = m.dev_cer;
      best = model;
      best_epoch = epoch;
    }
    history.push_back(m);
    if (on_epoch) on_epoch(m, improved, model);
  }
  return TrainResult{std::move(best), std::move(model), best_epoch, std::move(history)};
}

}  // namespace copyne
