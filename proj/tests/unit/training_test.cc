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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <memory>

#include "copyne/binary_io.h"

namespace copyne {
namespace {

namespace fs = std::filesystem;

SynthConfig micro_corpus() {
  SynthConfig c;
  c.n_chars = 10;
  c.n_syllables = 4;
  c.n_filler_chars = 4;
  c.frame_dim = 4;
  c.min_embedding_distance = 0.5;
  c.n_train = 10;
  c.n_dev = 4;
  c.n_test = 4;
  c.n_train_entities = 3;
  c.n_test_entities = 2;
  c.entity_len_max = 3;
  c.filler_len_min = 2;
  c.filler_len_max = 4;
  return c;
}

ModelConfig micro_model(ModelMode mode) {
  ModelConfig c;
  c.mode = mode;
  c.d_model = 8;
  c.n_heads = 2;
  c.n_enc_layers = 1;
  c.n_dec_layers = 1;
  c.d_ff = 12;
  c.d_attention = 6;
  c.ne_hidden = 5;
  c.frame_dim = 4;
  return c;
}

struct Fixture {
  Corpus corpus = gen_corpus(micro_corpus());
  Vocab vocab{corpus.lexicon.chars};
  std::vector<Example> train = make_examples(corpus.train, corpus.train_frames, vocab);
  std::vector<Example> dev = make_examples(corpus.dev, corpus.dev_frames, vocab);
  EntityDict global, dev_dict;

  Fixture() {
    for (const auto& e : corpus.train_entities) global.add(vocab.encode_strict(e), EntityOrigin::kLoaded);
    for (const auto& e : corpus.test_entities) dev_dict.add(vocab.encode_strict(e), EntityOrigin::kLoaded);
  }
};

TrainConfig quick(std::size_t epochs) {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_size = 4;
  t.learning_rate = 3e-3;
  t.seed = 7;
  return t;
}

TEST(Training, SmokeRunProducesMetricsForEveryEpoch) {
  Fixture f;
  std::size_t calls = 0;
  const auto r = train(quick(2), micro_model(ModelMode::kCopyNE), f.vocab, f.train, f.dev,
                       f.global, f.dev_dict,
                       [&](const EpochMetrics& m, bool, const Model&) { EXPECT_EQ(m.epoch, ++calls); });
  EXPECT_EQ(calls, 2u);
  ASSERT_EQ(r.history.size(), 2u);
  EXPECT_GE(r.best_epoch, 1u);
  for (const auto& m : r.history) {
    EXPECT_TRUE(std::isfinite(m.l_trans));
    EXPECT_GT(m.l_ctc, 0.0);
    EXPECT_GE(m.dev_cer, 0.0);
  }
}

TEST(Training, SameSeedGivesIdenticalCheckpointBytes) {
  Fixture f;
  const fs::path dir = fs::temp_directory_path() / "copyne_training_test";
  fs::create_directories(dir);
  for (int run = 0; run < 2; ++run) {
    const auto r = train(quick(2), micro_model(ModelMode::kCopyNE), f.vocab, f.train, f.dev,
                         f.global, f.dev_dict);
    save_checkpoint(r.last, dir / ("run" + std::to_string(run) + ".ckpt"));
  }
  EXPECT_EQ(binary::read_file(dir / "run0.ckpt"), binary::read_file(dir / "run1.ckpt"));
  fs::remove_all(dir);
}

TEST(Training, LossDecreasesOnTinyCorpus) {
  Fixture f;
  for (ModelMode mode : {ModelMode::kCopyNE, ModelMode::kBaseline}) {
    const auto r = train(quick(8), micro_model(mode), f.vocab, f.train, {}, f.global, f.dev_dict);
    const auto total = [](const EpochMetrics& m) { return 0.7 * m.l_trans + 0.3 * m.l_ctc + m.l_copy; };
    EXPECT_LT(total(r.history.back()), 0.8 * total(r.history.front()));
  }
}

TEST(Training, MicroBatchGradientMatchesFiniteDifferences) {
  Fixture f;
  const ModelConfig cfg = micro_model(ModelMode::kCopyNE);
  Rng init(3, "init");
  const Model model = Model::initialize(cfg, f.vocab, init);
  const std::vector<const Example*> batch{&f.train[0], &f.train[1]};
  std::vector<LabeledTranscript> labels;
  for (const auto* ex : batch) labels.push_back({ex->tokens, ex->entities});
  Rng dict_rng(4, "dict");
  const EntityDict dict = build_batch_dict(labels, f.global, 2.0, dict_rng);
  // The graph points into the model's weights, so the model must outlive it.
  std::unique_ptr<Model> held;
  auto build = [&](Graph& g, const Parameters& ps) {
    held = std::make_unique<Model>(cfg, f.vocab, ps);
    return batch_loss(g, *held, batch, dict, 0.7, true).total;
  };
  const auto report = grad_check(build, model.params(), 1e-5);
  EXPECT_LT(report.max_relative_error, 1e-3)
      << report.worst_parameter << "[" << report.worst_index << "] analytic=" << report.analytic
      << " numeric=" << report.numeric;
}

TEST(Training, ConfigValidation) {
  TrainConfig t;
  t.lambda = 1.5;
  EXPECT_THROW(t.validate(), std::invalid_argument);
  t = TrainConfig{};
  t.batch_size = 0;
  EXPECT_THROW(t.validate(), std::invalid_argument);
  t = TrainConfig{};
  t.dropout = 1.0;
  EXPECT_THROW(t.validate(), std::invalid_argument);
}

TEST(Training, MetricsLineLayout) {
  EpochMetrics m{3, 1.5, 2.25, 0.125, 0.5, 0.75};
  EXPECT_EQ(format_metrics(m), "3\t1.500000\t2.250000\t0.125000\t0.5000\t0.7500");
}

TEST(Training, DecodeOutputLayout) {
  DecodedUtterance d{"u1", "ab", {}};
  d.result.score = -1.5;
  d.result.copied_spans = {{0, 2, 1}};
  EXPECT_EQ(format_decode_output({d}), "u1\tab\t-1.500000\t0-2:1\n");
}

}  // namespace
}  // namespace copyne
