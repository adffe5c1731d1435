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

#include "copyne/corpus.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "copyne/binary_io.h"
#include "copyne/vocab.h"

namespace copyne {
namespace {

namespace fs = std::filesystem;

SynthConfig small_config() {
  SynthConfig c;
  c.n_train = 60;
  c.n_dev = 20;
  c.n_test = 20;
  return c;
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("copyne_corpus_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string span_text(const Utterance& u, const EntitySpan& s) {
  const auto c = utf8_chars(u.transcript);
  std::string out;
  for (std::size_t i = s.begin; i < s.end; ++i) out += c[i];
  return out;
}

TEST(Lexicon, FourCharsTwoSyllablesIsBalanced) {
  SynthConfig c;
  c.n_chars = 4;
  c.n_syllables = 2;
  c.n_filler_chars = 2;
  Rng rng(1, "lexicon");
  const Lexicon lex = gen_lexicon(c, rng);
  ASSERT_EQ(lex.chars.size(), 4u);
  std::vector<std::size_t> load(2, 0);
  for (std::size_t s : lex.syllable_of) ++load[s];
  EXPECT_EQ(load, (std::vector<std::size_t>{2, 2}));
}

TEST(Lexicon, EverySyllableHasCharacters) {
  Rng rng(2, "lexicon");
  const Lexicon lex = gen_lexicon(SynthConfig{}, rng);
  std::vector<std::size_t> load(lex.n_syllables(), 0);
  for (std::size_t s : lex.syllable_of) ++load[s];
  for (std::size_t n : load) EXPECT_GE(n, 2u);
}

TEST(Lexicon, FullTrapRateGivesEveryEntityCharAFillerHomophone) {
  Rng rng(3, "lexicon");
  const Lexicon lex = gen_lexicon(SynthConfig{}, rng);
  std::set<std::size_t> filler_syllables;
  for (std::size_t i = 0; i < lex.chars.size(); ++i) {
    if (lex.roles[i] == CharRole::kFiller) filler_syllables.insert(lex.syllable_of[i]);
  }
  for (std::size_t i = 0; i < lex.chars.size(); ++i) {
    if (lex.roles[i] == CharRole::kEntity) EXPECT_TRUE(filler_syllables.count(lex.syllable_of[i]));
  }
}

TEST(Lexicon, ZeroTrapRateKeepsEntityCharsApart) {
  SynthConfig c;
  c.n_filler_chars = 12;
  c.trap_rate = 0.0;
  Rng rng(4, "lexicon");
  const Lexicon lex = gen_lexicon(c, rng);
  std::set<std::size_t> filler_syllables;
  for (std::size_t i = 0; i < lex.chars.size(); ++i) {
    if (lex.roles[i] == CharRole::kFiller) filler_syllables.insert(lex.syllable_of[i]);
  }
  for (std::size_t i = 0; i < lex.chars.size(); ++i) {
    if (lex.roles[i] == CharRole::kEntity) EXPECT_FALSE(filler_syllables.count(lex.syllable_of[i]));
  }
}

TEST(Lexicon, EmbeddingsAreUnitNormAndSeparated) {
  Rng rng(5, "lexicon");
  const Lexicon lex = gen_lexicon(SynthConfig{}, rng);
  const Tensor& e = lex.embeddings;
  for (std::size_t a = 0; a < e.rows(); ++a) {
    double n = 0.0;
    for (std::size_t k = 0; k < e.cols(); ++k) n += e.at(a, k) * e.at(a, k);
    EXPECT_NEAR(n, 1.0, 1e-6);
    for (std::size_t b = 0; b < a; ++b) {
      double d = 0.0;
      for (std::size_t k = 0; k < e.cols(); ++k) d += (e.at(a, k) - e.at(b, k)) * (e.at(a, k) - e.at(b, k));
      EXPECT_GE(std::sqrt(d), 1.0 - 1e-6);
    }
  }
}

TEST(Lexicon, InfeasibleConfigsAreRejected) {
  SynthConfig c;
  c.n_chars = 10;
  c.n_syllables = 24;
  Rng rng(6, "lexicon");
  EXPECT_THROW(gen_lexicon(c, rng), CorpusError);
  SynthConfig d;
  d.frame_dim = 1;
  Rng rng2(6, "lexicon");
  EXPECT_THROW(gen_lexicon(d, rng2), CorpusError);
}

TEST(Frames, HomophonesAreAcousticallyIdentical) {
  Rng rng(7, "lexicon");
  const Lexicon lex = gen_lexicon(SynthConfig{}, rng);
  std::size_t a = 0, b = 0;
  for (std::size_t i = 0; i < lex.chars.size() && b == 0; ++i) {
    for (std::size_t j = i + 1; j < lex.chars.size(); ++j) {
      if (lex.syllable_of[i] == lex.syllable_of[j]) {
        a = i;
        b = j;
        break;
      }
    }
  }
  ASSERT_NE(b, 0u);
  Rng r1(8, "noise"), r2(8, "noise");
  EXPECT_EQ(synth_frames({lex.chars[a]}, lex, 2, 3, 0.3, r1),
            synth_frames({lex.chars[b]}, lex, 2, 3, 0.3, r2));
}

double nearest_accuracy(double noise) {
  Rng rng(9, "lexicon");
  const Lexicon lex = gen_lexicon(SynthConfig{}, rng);
  Rng noise_rng(10, "noise");
  std::size_t right = 0, total = 0;
  for (std::size_t i = 0; i < lex.chars.size(); ++i) {
    for (int rep = 0; rep < 20; ++rep) {
      // One frame per character so each row maps to a known syllable.
      const Tensor f = synth_frames({lex.chars[i]}, lex, 1, 1, noise, noise_rng);
      std::size_t best = 0;
      double best_d = 1e300;
      for (std::size_t s = 0; s < lex.n_syllables(); ++s) {
        double d = 0.0;
        for (std::size_t k = 0; k < f.cols(); ++k) {
          d += (f.at(0, k) - lex.embeddings.at(s, k)) * (f.at(0, k) - lex.embeddings.at(s, k));
        }
        if (d < best_d) {
          best_d = d;
          best = s;
        }
      }
      right += best == lex.syllable_of[i];
      ++total;
    }
  }
  return static_cast<double>(right) / static_cast<double>(total);
}

TEST(Frames, NearestEmbeddingRecoversSyllable) {
  EXPECT_EQ(nearest_accuracy(0.0), 1.0);
  EXPECT_GT(nearest_accuracy(0.1), 0.99);
}

TEST(Frames, FrameCountsFollowConfig) {
  Rng rng(11, "lexicon");
  const Lexicon lex = gen_lexicon(SynthConfig{}, rng);
  Rng noise(12, "noise");
  for (int i = 0; i < 50; ++i) {
    const Tensor f = synth_frames({lex.chars[0], lex.chars[1], lex.chars[2]}, lex, 2, 3, 0.3, noise);
    EXPECT_GE(f.rows(), 6u);
    EXPECT_LE(f.rows(), 9u);
    EXPECT_EQ(f.cols(), 16u);
  }
  EXPECT_THROW(synth_frames({}, lex, 2, 3, 0.3, noise), CorpusError);
}

TEST(Corpus, DeterministicForSeed) {
  const Corpus a = gen_corpus(small_config());
  const Corpus b = gen_corpus(small_config());
  ASSERT_EQ(a.train.size(), b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    EXPECT_EQ(a.train[i].transcript, b.train[i].transcript);
    EXPECT_EQ(a.train_frames[i], b.train_frames[i]);
  }
  SynthConfig other = small_config();
  other.seed = 2;
  const Corpus c = gen_corpus(other);
  bool differs = false;
  for (std::size_t i = 0; i < a.train.size(); ++i) differs |= a.train[i].transcript != c.train[i].transcript;
  EXPECT_TRUE(differs);
}

TEST(Corpus, SplitSizesAndIds) {
  const Corpus c = gen_corpus(small_config());
  EXPECT_EQ(c.train.size(), 60u);
  EXPECT_EQ(c.dev.size(), 20u);
  EXPECT_EQ(c.test.size(), 20u);
  EXPECT_EQ(c.train[0].utt_id, "train-00000");
  EXPECT_EQ(c.test[19].frames_path, "frames/test-00019.cpnf");
}

TEST(Corpus, SpansCoverInventoryEntities) {
  const Corpus c = gen_corpus(small_config());
  const std::set<std::string> train_inv(c.train_entities.begin(), c.train_entities.end());
  const std::set<std::string> test_inv(c.test_entities.begin(), c.test_entities.end());
  std::size_t with_entities = 0;
  for (const auto& u : c.train) {
    with_entities += !u.spans.empty();
    for (const auto& s : u.spans) EXPECT_TRUE(train_inv.count(span_text(u, s))) << u.utt_id;
  }
  EXPECT_GT(with_entities, 0u);
  for (const auto& u : c.test) {
    for (const auto& s : u.spans) EXPECT_TRUE(test_inv.count(span_text(u, s))) << u.utt_id;
  }
}

TEST(Corpus, InventoriesAreDisjointAndTestCharsAreTrained) {
  const SynthConfig cfg;
  const Corpus c = gen_corpus(cfg);
  std::set<std::string> train_chars;
  for (const auto& e : c.train_entities) {
    for (const auto& ch : utf8_chars(e)) train_chars.insert(ch);
  }
  for (const auto& e : c.test_entities) {
    EXPECT_EQ(std::count(c.train_entities.begin(), c.train_entities.end(), e), 0);
    for (const auto& ch : utf8_chars(e)) EXPECT_TRUE(train_chars.count(ch));
  }
  EXPECT_EQ(c.train_entities.size(), cfg.n_train_entities);
  EXPECT_EQ(c.test_entities.size(), cfg.n_test_entities);
}

TEST(Corpus, EntityFractionZeroHasNoSpans) {
  SynthConfig cfg = small_config();
  cfg.entity_fraction = 0.0;
  const Corpus c = gen_corpus(cfg);
  for (const auto& u : c.train) EXPECT_TRUE(u.spans.empty());
  for (const auto& u : c.test) EXPECT_TRUE(u.spans.empty());
}

TEST(Corpus, FramesMatchTranscriptLength) {
  const Corpus c = gen_corpus(small_config());
  for (std::size_t i = 0; i < c.train.size(); ++i) {
    const std::size_t n = utf8_chars(c.train[i].transcript).size();
    EXPECT_GE(c.train_frames[i].rows(), 2 * n);
    EXPECT_LE(c.train_frames[i].rows(), 3 * n);
  }
}

TEST(Corpus, WriteAndReadBack) {
  const SynthConfig cfg = small_config();
  const Corpus c = gen_corpus(cfg);
  const fs::path dir = temp_dir("roundtrip");
  write_corpus(c, cfg, dir);
  for (const char* f : {"lexicon.txt", "train.tsv", "dev.tsv", "test.tsv", "dev_ne.tsv",
                        "test_ne.tsv", "train_entities.txt", "test_entities.txt", "config.txt"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const auto train = load_manifest(dir / "train.tsv");
  ASSERT_EQ(train.size(), c.train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    EXPECT_EQ(train[i].utt_id, c.train[i].utt_id);
    EXPECT_EQ(train[i].transcript, c.train[i].transcript);
    ASSERT_EQ(train[i].spans.size(), c.train[i].spans.size());
    EXPECT_EQ(read_frames(dir / train[i].frames_path), c.train_frames[i]);
  }
  const auto test_ne = load_manifest(dir / "test_ne.tsv");
  EXPECT_EQ(test_ne.size(), entity_bearing(c.test).size());
  for (const auto& u : test_ne) EXPECT_FALSE(u.spans.empty());

  const Lexicon lex = read_lexicon(dir / "lexicon.txt");
  EXPECT_EQ(lex.chars, c.lexicon.chars);
  EXPECT_EQ(lex.syllable_of, c.lexicon.syllable_of);
  EXPECT_EQ(lex.embeddings, c.lexicon.embeddings);
  fs::remove_all(dir);
}

TEST(Frames, EncodeDecodeRoundTrip) {
  Tensor f({3, 2});
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = 0.25 * static_cast<double>(i) - 0.5;
  EXPECT_EQ(decode_frames(encode_frames(f), "mem"), f);
}

TEST(Frames, TruncatedFileIsAnError) {
  Tensor f({3, 2}, 0.5);
  std::string bytes = encode_frames(f);
  bytes.resize(bytes.size() - 3);
  try {
    decode_frames(bytes, "x.cpnf");
    FAIL() << "expected an error";
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("x.cpnf"), std::string::npos) << e.what();
  }
  std::string bad = encode_frames(f);
  bad[0] = 'X';
  EXPECT_ANY_THROW(decode_frames(bad, "bad.cpnf"));
  EXPECT_ANY_THROW(decode_frames(encode_frames(f) + "z", "long.cpnf"));
}

TEST(Manifest, OverlappingSpansAreRejected) {
  Utterance u{"u1", "frames/u1.cpnf", "abcdef", {{0, 3}, {2, 4}}};
  EXPECT_THROW(validate_utterance(u), CorpusError);
  u.spans = {{3, 2}};
  EXPECT_THROW(validate_utterance(u), CorpusError);
  u.spans = {{4, 7}};
  EXPECT_THROW(validate_utterance(u), CorpusError);
  u.spans = {{0, 2}, {2, 4}};
  EXPECT_NO_THROW(validate_utterance(u));
}

TEST(Manifest, ErrorsNameFileAndLine) {
  const fs::path dir = temp_dir("manifest");
  {
    std::ofstream os(dir / "m.tsv");
    os << "u1\tframes/u1.cpnf\tabc\t0-2\n";
    os << "u2\tframes/u2.cpnf\tabc\t1-2;0-2\n";
  }
  try {
    load_manifest(dir / "m.tsv");
    FAIL() << "expected an error";
  } catch (const CorpusError& e) {
    EXPECT_NE(std::string(e.what()).find("m.tsv:2"), std::string::npos) << e.what();
  }
  {
    std::ofstream os(dir / "n.tsv");
    os << "u1\tframes/u1.cpnf\tabc\n";
  }
  EXPECT_THROW(load_manifest(dir / "n.tsv"), CorpusError);
  fs::remove_all(dir);
}

TEST(Manifest, WriteReadRoundTrip) {
  const fs::path dir = temp_dir("manifest_rt");
  const std::vector<Utterance> us{{"a", "frames/a.cpnf", "xyzw", {{0, 2}, {2, 4}}},
                                  {"b", "frames/b.cpnf", "q", {}}};
  write_manifest(dir / "m.tsv", us);
  const auto back = load_manifest(dir / "m.tsv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].spans.size(), 2u);
  EXPECT_EQ(back[0].spans[1].begin, 2u);
  EXPECT_EQ(back[1].transcript, "q");
  fs::remove_all(dir);
}

TEST(SynthConfigText, RoundTripsAndRejectsUnknownKeys) {
  SynthConfig c;
  c.noise_stddev = 0.17;
  c.seed = 42;
  const SynthConfig back = SynthConfig::from_map(parse_key_values(c.to_text(), "mem"));
  EXPECT_EQ(back.to_text(), c.to_text());
  EXPECT_FALSE(SynthConfig::is_key("bogus"));
  EXPECT_TRUE(SynthConfig::is_key("trap_rate"));
}

}  // namespace
}  // namespace copyne
