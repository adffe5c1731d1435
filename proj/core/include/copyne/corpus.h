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

// Synthetic homophone corpus.
//
// Characters map many-to-one onto syllables and frames are generated from
// syllables only, so homophones cannot be told apart acoustically. Filler
// characters are frequent; entity characters occur only inside entities and
// share syllables with fillers.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "copyne/eval.h"
#include "copyne/kv.h"
#include "copyne/rng.h"
#include "copyne/tensor.h"

namespace copyne {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SynthConfig {
  std::size_t n_chars = 60;
  std::size_t n_syllables = 24;
  std::size_t n_filler_chars = 24;
  std::size_t frame_dim = 16;
  std::size_t frames_min = 2;
  std::size_t frames_max = 3;
  double noise_stddev = 0.3;
  double min_embedding_distance = 1.0;
  std::size_t n_train = 4000;
  std::size_t n_dev = 300;
  std::size_t n_test = 300;
  std::size_t n_train_entities = 1000;
  std::size_t n_test_entities = 30;
  std::size_t entity_len_min = 2;
  std::size_t entity_len_max = 4;
  double entity_fraction = 0.5;
  std::size_t filler_len_min = 4;
  std::size_t filler_len_max = 10;
  double zipf_exponent = 1.0;
  double trap_rate = 1.0;
  std::uint64_t seed = 1;

  /// Throws CorpusError naming the offending field.
  void validate() const;
  std::string to_text() const;
  /// Reads the keys this struct knows and ignores the rest.
  static SynthConfig from_map(const KeyValues& kv);
  static bool is_key(const std::string& key);
};

enum class CharRole { kFiller, kEntity };

struct Lexicon {
  std::vector<std::string> chars;
  std::vector<std::size_t> syllable_of;  // parallel to chars
  std::vector<CharRole> roles;           // parallel to chars; not persisted
  Tensor embeddings;                     // [n_syllables, D]

  std::size_t n_syllables() const { return embeddings.rows(); }
  /// Index of a character, or throws CorpusError.
  std::size_t index_of(const std::string& ch) const;
  std::vector<std::string> chars_with_role(CharRole role) const;
};

/// Balanced assignment: fillers first, then entity characters, each onto a
/// least-loaded syllable (ties broken at random). With probability
/// trap_rate an entity character goes to a syllable that carries a filler.
Lexicon gen_lexicon(const SynthConfig& config, Rng& rng);

/// k frames per character, k uniform in [frames_min, frames_max], each the
/// syllable embedding plus N(0, noise_stddev^2), rounded to 32-bit floats.
Tensor synth_frames(const std::vector<std::string>& text, const Lexicon& lexicon,
                    std::size_t frames_min, std::size_t frames_max,
                    double noise_stddev, Rng& rng);

struct Utterance {
  std::string utt_id;
  std::string frames_path;  // relative to the manifest's directory
  std::string transcript;
  std::vector<EntitySpan> spans;  // character offsets, sorted, disjoint
};

struct Corpus {
  Lexicon lexicon;
  std::vector<std::string> train_entities;
  std::vector<std::string> test_entities;
  std::vector<Utterance> train, dev, test;
  std::vector<Tensor> train_frames, dev_frames, test_frames;
};

/// Pure function of the config. Dev and test draw entities from the test
/// inventory; no test entity appears in training text.
Corpus gen_corpus(const SynthConfig& config);

/// Writes lexicon.txt, {train,dev,test,dev_ne,test_ne}.tsv,
/// {train,test}_entities.txt, frames/ and config.txt.
void write_corpus(const Corpus& corpus, const SynthConfig& config,
                  const std::filesystem::path& dir);

std::vector<Utterance> load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path,
                    const std::vector<Utterance>& utterances);
/// Checks span order, bounds and overlap; throws CorpusError.
void validate_utterance(const Utterance& u);

std::string encode_frames(const Tensor& frames);
Tensor decode_frames(std::string_view data, const std::string& source);
Tensor read_frames(const std::filesystem::path& path);
void write_frames(const std::filesystem::path& path, const Tensor& frames);

Lexicon read_lexicon(const std::filesystem::path& path);
void write_lexicon(const std::filesystem::path& path, const Lexicon& lexicon);

/// Utterances that carry at least one entity.
std::vector<std::size_t> entity_bearing(const std::vector<Utterance>& utterances);

/// Reference transcripts and spans in the form the scorer takes.
std::vector<Reference> references(const std::vector<Utterance>& utterances);

}  // namespace copyne
