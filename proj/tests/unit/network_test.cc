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

#include "copyne/network.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "copyne/binary_io.h"

namespace copyne {
namespace {

ModelConfig tiny_config(ModelMode mode = ModelMode::kCopyNE) {
  ModelConfig c;
  c.mode = mode;
  c.d_model = 8;
  c.n_heads = 2;
  c.n_enc_layers = 1;
  c.n_dec_layers = 1;
  c.d_ff = 12;
  c.d_attention = 6;
  c.ne_hidden = 5;
  c.frame_dim = 3;
  return c;
}

Vocab tiny_vocab() { return Vocab({"a", "b", "c", "d"}); }

Tensor random_frames(std::size_t t, std::size_t d, Rng& rng) {
  Tensor f({t, d});
  for (auto& v : f.data()) v = rng.normal();
  return f;
}

void expect_rows_normalized(const Tensor& p, double tol) {
  for (std::size_t r = 0; r < p.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < p.cols(); ++c) {
      EXPECT_GE(p.at(r, c), 0.0);
      s += p.at(r, c);
    }
    EXPECT_NEAR(s, 1.0, tol);
  }
}

TEST(Config, DefaultsAndFullScale) {
  ModelConfig c;
  EXPECT_EQ(c.d_model, 64u);
  EXPECT_EQ(c.n_enc_layers, 2u);
  EXPECT_EQ(c.n_heads, 2u);
  EXPECT_EQ(c.ne_hidden, 64u);
  const auto full = ModelConfig::full_scale();
  EXPECT_EQ(full.d_model, 256u);
  EXPECT_EQ(full.n_heads, 4u);
  EXPECT_EQ(full.n_enc_layers, 6u);
  EXPECT_EQ(full.ne_lstm_layers, 3u);
  EXPECT_EQ(full.ne_hidden, 512u);
}

TEST(Config, HeadsMustDivideWidth) {
  ModelConfig c;
  c.n_heads = 3;
  EXPECT_THROW(c.validate(), ModelError);
}

TEST(Config, TextRoundTrip) {
  auto c = tiny_config();
  std::map<std::string, std::string> kv;
  std::istringstream in(c.to_text());
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  EXPECT_EQ(ModelConfig::from_map(kv).to_text(), c.to_text());
}

TEST(EncodeAudio, SingleFrameShape) {
  Rng rng(1, "init");
  const Model m = Model::initialize(tiny_config(), tiny_vocab(), rng);
  Graph g(false);
  Rng data(1, "data");
  const Tensor f = random_frames(1, 3, data);
  EXPECT_EQ(encode_audio(g, m, f).shape(), (Shape{1, 8}));
}

TEST(EncodeAudio, WrongFrameWidthIsRejected) {
  Rng rng(1, "init");
  const Model m = Model::initialize(tiny_config(), tiny_vocab(), rng);
  Graph g(false);
  const Tensor f({4, 5}, 0.0);
  EXPECT_THROW(encode_audio(g, m, f), ModelError);
}

TEST(EncodeAudio, DuplicateRowsWithoutPositionsGiveEqualOutputs) {
  auto cfg = tiny_config();
  cfg.positional_encoding = false;
  Rng rng(2, "init");
  const Model m = Model::initialize(cfg, tiny_vocab(), rng);
  const Tensor f = Tensor::matrix({{0.3, -1.0, 2.0}, {0.3, -1.0, 2.0}, {0.3, -1.0, 2.0}});
  Graph g(false);
  const Tensor& h = g.value(encode_audio(g, m, f));
  for (std::size_t c = 0; c < h.cols(); ++c) {
    EXPECT_EQ(h.at(0, c), h.at(1, c));
    EXPECT_EQ(h.at(0, c), h.at(2, c));
  }
}

TEST(EncodeAudio, GradientMatchesFiniteDifferences) {
  Rng rng(3, "init");
  const Model m = Model::initialize(tiny_config(), tiny_vocab(), rng);
  Rng data(3, "data");
  const Tensor f = random_frames(5, 3, data);
  Model work = m;
  const Tensor mix = random_frames(5, 8, data);
  auto build = [&](Graph& g, const Parameters& p) {
    work.params() = p;
    return sum(mul(encode_audio(g, work, f), g.constant(mix)));
  };
  const auto r = grad_check(build, m.params(), 1e-5,
                            {"enc.in.w", "enc.0.attn.wqkv", "enc.0.ff.w1", "enc.ln.g"});
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_parameter << "[" << r.worst_index << "]";
}

TEST(CtcHead, ZeroWeightsGiveUniformRows) {
  Rng rng(4, "init");
  Model m = Model::initialize(tiny_config(), tiny_vocab(), rng);
  for (auto& v : m.params().get("ctc.w").data()) v = 0.0;
  for (auto& v : m.params().get("ctc.b").data()) v = 0.0;
  Rng data(4, "data");
  const Tensor f = random_frames(3, 3, data);
  Graph g(false);
  const Tensor& lp = g.value(ctc_log_probs(g, m, encode_audio(g, m, f)));
  const double uniform = std::log(1.0 / static_cast<double>(m.vocab().size()));
  for (double v : lp.data()) EXPECT_NEAR(v, uniform, 1e-12);
}

TEST(CtcHead, RowsNormalizeAndGradientChecks) {
  Rng rng(5, "init");
  const Model m = Model::initialize(tiny_config(), tiny_vocab(), rng);
  Rng data(5, "data");
  const Tensor f = random_frames(4, 3, data);
  {
    Graph g(false);
    Tensor p = g.value(ctc_log_probs(g, m, encode_audio(g, m, f)));
    for (auto& v : p.data()) v = std::exp(v);
    expect_rows_normalized(p, 1e-9);
  }
  Model work = m;
  const Tensor mix = random_frames(4, m.vocab().size(), data);
  auto build = [&](Graph& g, const Parameters& p) {
    work.params() = p;
    return sum(mul(ctc_log_probs(g, work, encode_audio(g, work, f)), g.constant(mix)));
  };
  EXPECT_LT(grad_check(build, m.params(), 1e-5, {"ctc.w", "ctc.b"}).max_relative_error, 1e-4);
}

TEST(Decoder, BosOnlyHistoryGivesOneState) {
  Rng rng(6, "init");
  const Model m = Model::initialize(tiny_config(), tiny_vocab(), rng);
  Rng data(6, "data");
  const Tensor f = random_frames(4, 3, data);
  Graph g(false);
  const TokenSeq hist{Vocab::kBos};
  EXPECT_EQ(decoder_states(g, m, hist, encode_audio(g, m, f)).shape(), (Shape{1, 8}));
}

TEST(Decoder, RejectsBlankAndMissingBos) {
  Rng rng(6, "init");
  const Model m = Model::initialize(tiny_config(), tiny_vocab(), rng);
  Rng data(6, "data");
  const Tensor f = random_frames(4, 3, data);
  Graph g(false);
  Var h = encode_audio(g, m, f);
  EXPECT_THROW(decoder_states(g, m, TokenSeq{Vocab::kBos, Vocab::kBlank}, h), ModelError);
  EXPECT_THROW(decoder_states(g, m, TokenSeq{4, 5}, h), ModelError);
}

TEST(Decoder, CausalPrefixStatesAreBitIdentical) {
  Rng rng(7, "init");
  const Model m = Model::initialize(tiny_config(), tiny_vocab(), rng);
  Rng data(7, "data");
  const Tensor f = random_frames(6, 3, data);
  const TokenSeq full{Vocab::kBos, 4, 6, 5, 7, 4};
  Graph g(false);
  const Tensor& all = g.value(decoder_states(g, m, full, encode_audio(g, m, f)));
  for (std::size_t u = 1; u <= full.size(); ++u) {
    Graph g2(false);
    const TokenSeq prefix(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(u));
    const Tensor& part = g2.value(decoder_states(g2, m, prefix, encode_audio(g2, m, f)));
    for (std::size_t r = 0; r < u; ++r) {
      for (std::size_t c = 0; c < part.cols(); ++c) ASSERT_EQ(part.at(r, c), all.at(r, c));
    }
  }
}

EntityDict dict_of(std::initializer_list<TokenSeq> entries) {
  EntityDict d;
  for (const auto& e : entries) d.add(e, EntityOrigin::kLoaded);
  return d;
}

TEST(EntityEncoder, EmptyDictIsZ0) {
  Rng rng(8, "init");
  const Model m = Model::initialize(tiny_config(), tiny_vocab(), rng);
  Graph g(false);
  const Tensor& z = g.value(encode_entities(g, m, EntityDict{}));
  EXPECT_EQ(z, m.params().get("ne.z0"));
}

TEST(EntityEncoder, IdenticalEntitiesGiveIdenticalRows) {
  Rng rng(9, "init");
  const Model m = Model::initialize(tiny_config(), tiny_vocab(), rng);
  // Dedup forbids duplicates in one dictionary; encode the entity twice
  // in two dictionaries and in different positions instead.
  Graph g(false);
  const Tensor& a = g.value(encode_entities(g, m, dict_of({{4, 5}, {6, 7, 4}})));
  const Tensor& b = g.value(encode_entities(g, m, dict_of({{6, 7, 4}, {4, 5}})));
  for (std::size_t c = 0; c < a.cols(); ++c) {
    EXPECT_EQ(a.at(1, c), b.at(2, c));
    EXPECT_EQ(a.at(2, c), b.at(1, c));
  }
}

TEST(EntityEncoder, SingleTokenDifferenceChangesRow) {
  Rng rng(10, "init");
  const Model m = Model::initialize(tiny_config(), tiny_vocab(), rng);
  Graph g(false);
  const Tensor& z = g.value(encode_entities(g, m, dict_of({{4, 5, 6}, {4, 5, 7}})));
  bool differs = false;
  for (std::size_t c = 0; c < z.cols(); ++c) differs |= z.at(1, c) != z.at(2, c);
  EXPECT_TRUE(differs);
}

TEST(EntityEncoder, PermutationEquivariance) {
  Rng rng(11, "init");
  const Model m = Model::initialize(tiny_config(), tiny_vocab(), rng);
  Rng data(11, "data");
  const Tensor f = random_frames(5, 3, data);
  const EntityDict d1 = dict_of({{4, 5}, {6, 7, 4}, {5, 5, 6, 7}});
  const EntityDict d2 = dict_of({{5, 5, 6, 7}, {4, 5}, {6, 7, 4}});
  const std::size_t perm[] = {0, 2, 3, 1};  // row i of d1 is row perm[i] of d2
  Graph g(false);
  Var h = encode_audio(g, m, f);
  Var st = decoder_states(g, m, TokenSeq{Vocab::kBos, 4, 5}, h);
  Var z1 = encode_entities(g, m, d1);
  Var z2 = encode_entities(g, m, d2);
  const Tensor& p1 = g.value(copy_attention(g, m, st, z1).probs);
  const Tensor& p2 = g.value(copy_attention(g, m, st, z2).probs);
  const Tensor& zz1 = g.value(z1);
  const Tensor& zz2 = g.value(z2);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t c = 0; c < zz1.cols(); ++c) EXPECT_EQ(zz1.at(i, c), zz2.at(perm[i], c));
    for (std::size_t r = 0; r < p1.rows(); ++r) {
      EXPECT_NEAR(p1.at(r, i), p2.at(r, perm[i]), 1e-15);
    }
  }
}

TEST(CopyAttention, EqualEntityRowsGiveUniformProbs) {
  Rng rng(12, "init");
  const Model m = Model::initialize(tiny_config(), tiny_vocab(), rng);
  Graph g(false);
  Var st = g.constant(Tensor::matrix({{1, 2, 3, 4, 5, 6, 7, 8}}));
  Var z = g.constant(Tensor({3, 5}, 0.25));
  const Tensor& p = g.value(copy_attention(g, m, st, z).probs);
  for (double v : p.data()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(CopyAttention, HandWorkedExample) {
  auto cfg = tiny_config();
  cfg.d_attention = 1;
  cfg.d_model = 2;
  cfg.n_heads = 1;
  cfg.ne_hidden = 1;
  Rng rng(13, "init");
  Model m = Model::initialize(cfg, tiny_vocab(), rng);
  m.params().get("copy.wq") = Tensor::matrix({{2}, {0}});
  m.params().get("copy.wk") = Tensor::matrix({{1}});
  Graph g(false);
  Var st = g.constant(Tensor::matrix({{1, 0}}));
  Var z = g.constant(Tensor::matrix({{1}, {3}}));
  auto att = copy_attention(g, m, st, z);
  EXPECT_NEAR(g.value(att.scores)[0], 2.0, 1e-15);
  EXPECT_NEAR(g.value(att.scores)[1], 6.0, 1e-15);
  EXPECT_NEAR(g.value(att.probs)[0], 0.0180, 5e-5);
  EXPECT_NEAR(g.value(att.probs)[1], 0.9820, 5e-5);
}

TEST(CopyAttention, ShiftInvariance) {
  Graph g(false);
  const Tensor& a = g.value(softmax(g.constant(Tensor::row({0.3, -1.0, 2.0}))));
  const Tensor& b = g.value(softmax(g.constant(Tensor::row({5.3, 4.0, 7.0}))));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], 1e-15);
}

TEST(DictStep, OneHotAndUniformMixtures) {
  Rng rng(14, "init");
  const Model m = Model::initialize(tiny_config(), tiny_vocab(), rng);
  Graph g(false);
  Var st = g.constant(Tensor::matrix({{1, 0, 0, 0, 0, 0, 0, 1}}));
  Var z = g.constant(Tensor::matrix({{1, 2, 3, 4, 5}, {0, 0, 0, 0, 1}, {2, 1, 0, 1, 2}}));
  auto one_hot = dict_enhanced_step(g, m, st, z, g.constant(Tensor::row({1, 0, 0})));
  EXPECT_EQ(g.value(one_hot.dict_repr), Tensor::matrix({{1, 2, 3, 4, 5}}));
  auto uni = dict_enhanced_step(g, m, st, z, g.constant(Tensor::row({1.0 / 3, 1.0 / 3, 1.0 / 3})));
  const Tensor& r = g.value(uni.dict_repr);
  EXPECT_NEAR(r[0], 1.0, 1e-15);
  EXPECT_NEAR(r[4], 8.0 / 3.0, 1e-15);
  expect_rows_normalized(g.value(uni.token_probs), 1e-9);
  EXPECT_EQ(g.value(uni.token_probs).cols(), m.vocab().decoder_classes());
}

TEST(DictStep, PipelineGradientMatchesFiniteDifferences) {
  Rng rng(15, "init");
  const Model m = Model::initialize(tiny_config(), tiny_vocab(), rng);
  Rng data(15, "data");
  const Tensor f = random_frames(4, 3, data);
  const EntityDict d = dict_of({{4, 5}, {6, 7, 4}});
  Model work = m;
  auto build = [&](Graph& g, const Parameters& p) {
    work.params() = p;
    Var st = decoder_states(g, work, TokenSeq{Vocab::kBos, 4, 5}, encode_audio(g, work, f));
    Var z = encode_entities(g, work, d);
    auto att = copy_attention(g, work, st, z);
    auto step = dict_enhanced_step(g, work, st, z, att.probs);
    return sum(mul(log(step.token_probs), g.constant(Tensor({3, 6}, 0.3))));
  };
  const auto r = grad_check(build, m.params(), 1e-5,
                            {"out.w", "copy.wq", "copy.wk", "ne.z0", "ne.lstm.0.wx", "ne.embed"});
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_parameter << "[" << r.worst_index << "]";
}

TEST(BaselineStep, ZeroWeightsUniformAndNormalized) {
  Rng rng(16, "init");
  Model m = Model::initialize(tiny_config(ModelMode::kBaseline), tiny_vocab(), rng);
  EXPECT_FALSE(m.params().contains("ne.z0"));
  EXPECT_EQ(m.params().get("out.w").rows(), 8u);
  Graph g(false);
  Var st = g.constant(Tensor::matrix({{1, 2, 3, 4, 5, 6, 7, 8}}));
  expect_rows_normalized(g.value(baseline_step(g, m, st)), 1e-9);
  for (auto& v : m.params().get("out.w").data()) v = 0.0;
  for (auto& v : m.params().get("out.b").data()) v = 0.0;
  Graph g2(false);
  const Tensor& p = g2.value(baseline_step(g2, m, g2.constant(Tensor::matrix({{1, 2, 3, 4, 5, 6, 7, 8}}))));
  for (double v : p.data()) EXPECT_NEAR(v, 1.0 / 6.0, 1e-15);
}

TEST(BaselineStep, ArgmaxStableUnderSharedBiasShift) {
  Rng rng(17, "init");
  Model m = Model::initialize(tiny_config(ModelMode::kBaseline), tiny_vocab(), rng);
  Graph g(false);
  Var st = g.constant(Tensor::matrix({{1, -2, 3, 0, 5, 1, 7, 2}}));
  const Tensor a = g.value(baseline_step(g, m, st));
  for (auto& v : m.params().get("out.b").data()) v += 3.5;
  Graph g2(false);
  const Tensor b = g2.value(baseline_step(g2, m, g2.constant(Tensor::matrix({{1, -2, 3, 0, 5, 1, 7, 2}}))));
  auto argmax = [](const Tensor& t) {
    return std::max_element(t.data().begin(), t.data().end()) - t.data().begin();
  };
  EXPECT_EQ(argmax(a), argmax(b));
}

TEST(Checkpoint, RoundTripIsBitExact) {
  Rng rng(18, "init");
  const Model m = Model::initialize(tiny_config(), tiny_vocab(), rng);
  const auto dir = std::filesystem::temp_directory_path() / "copyne_ckpt_test";
  std::filesystem::create_directories(dir);
  save_checkpoint(m, dir / "a.ckpt");
  const Model back = load_checkpoint(dir / "a.ckpt");
  save_checkpoint(back, dir / "b.ckpt");
  EXPECT_EQ(binary::read_file(dir / "a.ckpt"), binary::read_file(dir / "b.ckpt"));
  EXPECT_EQ(back.vocab().content_string(), "abcd");
  for (const auto& name : m.params().names()) EXPECT_EQ(back.params().get(name), m.params().get(name));
}

TEST(Checkpoint, TruncatedAndBadMagicAreRejected) {
  Rng rng(19, "init");
  const Model m = Model::initialize(tiny_config(), tiny_vocab(), rng);
  const auto dir = std::filesystem::temp_directory_path() / "copyne_ckpt_test";
  std::filesystem::create_directories(dir);
  save_checkpoint(m, dir / "c.ckpt");
  std::string data = binary::read_file(dir / "c.ckpt");
  binary::write_file(dir / "trunc.ckpt", data.substr(0, data.size() - 5));
  EXPECT_THROW(load_checkpoint(dir / "trunc.ckpt"), binary::FormatError);
  data[0] = 'X';
  binary::write_file(dir / "magic.ckpt", data);
  EXPECT_THROW(load_checkpoint(dir / "magic.ckpt"), binary::FormatError);
}

}  // namespace
}  // namespace copyne
