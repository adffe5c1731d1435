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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "copyne/binary_io.h"
#include "copyne/vocab.h"

namespace copyne {

namespace {

constexpr char kFramesMagic[4] = {'C', 'P', 'N', 'F'};
constexpr std::uint16_t kFramesVersion = 1;

// a-z, A-Z, 0-9, then CJK ideographs.
std::string char_symbol(std::size_t i) {
  static const std::string ascii =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  if (i < ascii.size()) return std::string(1, ascii[i]);
  const std::uint32_t cp = 0x4E00 + static_cast<std::uint32_t>(i - ascii.size());
  std::string s;
  s.push_back(static_cast<char>(0xE0 | (cp >> 12)));
  s.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
  s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  return s;
}

double as_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

std::size_t least_loaded(const std::vector<std::size_t>& load,
                         const std::vector<std::size_t>& candidates, Rng& rng) {
  std::size_t best = SIZE_MAX;
  for (auto s : candidates) best = std::min(best, load[s]);
  std::vector<std::size_t> ties;
  for (auto s : candidates) {
    if (load[s] == best) ties.push_back(s);
  }
  return ties[rng.below(ties.size())];
}

std::string join(const std::vector<std::string>& chars) {
  std::string s;
  for (const auto& c : chars) s += c;
  return s;
}

[[noreturn]] void fail_line(const std::filesystem::path& path, std::size_t line,
                            const std::string& msg) {
  throw CorpusError(path.string() + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::size_t parse_index(const std::string& s, const char* what) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw CorpusError(std::string("bad ") + what + " '" + s + "'");
  }
  return v;
}

}  // namespace

// SynthConfig ---------------------------------------------------------------

void SynthConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw CorpusError("invalid corpus config: " + msg);
  };
  require(n_syllables >= 2, "n_syllables must be at least 2");
  require(n_chars > n_syllables, "n_chars must exceed n_syllables (homophones are required)");
  require(n_filler_chars >= 1, "n_filler_chars must be at least 1");
  require(n_filler_chars < n_chars, "n_filler_chars must leave room for entity characters");
  require(n_chars <= 62 + 20000, "n_chars too large");
  require(frame_dim >= 1, "frame_dim must be at least 1");
  require(frames_min >= 1 && frames_min <= frames_max, "need 1 <= frames_min <= frames_max");
  require(noise_stddev >= 0.0, "noise_stddev must be non-negative");
  require(min_embedding_distance >= 0.0 && min_embedding_distance < 2.0,
          "min_embedding_distance must lie in [0, 2)");
  require(entity_len_min >= 2 && entity_len_min <= entity_len_max,
          "need 2 <= entity_len_min <= entity_len_max");
  require(entity_fraction >= 0.0 && entity_fraction <= 1.0, "entity_fraction must lie in [0, 1]");
  require(filler_len_min >= 1 && filler_len_min <= filler_len_max,
          "need 1 <= filler_len_min <= filler_len_max");
  require(zipf_exponent >= 0.0, "zipf_exponent must be non-negative");
  require(trap_rate >= 0.0 && trap_rate <= 1.0, "trap_rate must lie in [0, 1]");
  require(entity_fraction == 0.0 || n_train_entities >= 1,
          "entities requested but n_train_entities is 0");
  require(entity_fraction == 0.0 || (n_dev + n_test == 0) || n_test_entities >= 1,
          "entities requested but n_test_entities is 0");
}

std::string SynthConfig::to_text() const {
  std::ostringstream os;
  os << "n_chars=" << n_chars << '\n'
     << "n_syllables=" << n_syllables << '\n'
     << "n_filler_chars=" << n_filler_chars << '\n'
     << "frame_dim=" << frame_dim << '\n'
     << "frames_min=" << frames_min << '\n'
     << "frames_max=" << frames_max << '\n'
     << "noise_stddev=" << format_double(noise_stddev) << '\n'
     << "min_embedding_distance=" << format_double(min_embedding_distance) << '\n'
     << "n_train=" << n_train << '\n'
     << "n_dev=" << n_dev << '\n'
     << "n_test=" << n_test << '\n'
     << "n_train_entities=" << n_train_entities << '\n'
     << "n_test_entities=" << n_test_entities << '\n'
     << "entity_len_min=" << entity_len_min << '\n'
     << "entity_len_max=" << entity_len_max << '\n'
     << "entity_fraction=" << format_double(entity_fraction) << '\n'
     << "filler_len_min=" << filler_len_min << '\n'
     << "filler_len_max=" << filler_len_max << '\n'
     << "zipf_exponent=" << format_double(zipf_exponent) << '\n'
     << "trap_rate=" << format_double(trap_rate) << '\n'
     << "seed=" << seed << '\n';
  return os.str();
}

bool SynthConfig::is_key(const std::string& key) {
  static const std::set<std::string> keys = {
      "n_chars", "n_syllables", "n_filler_chars", "frame_dim", "frames_min",
      "frames_max", "noise_stddev", "min_embedding_distance", "n_train", "n_dev",
      "n_test", "n_train_entities", "n_test_entities", "entity_len_min",
      "entity_len_max", "entity_fraction", "filler_len_min", "filler_len_max",
      "zipf_exponent", "trap_rate", "seed"};
  return keys.contains(key);
}

SynthConfig SynthConfig::from_map(const KeyValues& kv) {
  SynthConfig c;
  auto size_of = [&](const char* key, std::size_t& field) {
    if (auto it = kv.find(key); it != kv.end()) field = kv_size(key, it->second);
  };
  auto real_of = [&](const char* key, double& field) {
    if (auto it = kv.find(key); it != kv.end()) field = kv_double(key, it->second);
  };
  size_of("n_chars", c.n_chars);
  size_of("n_syllables", c.n_syllables);
  size_of("n_filler_chars", c.n_filler_chars);
  size_of("frame_dim", c.frame_dim);
  size_of("frames_min", c.frames_min);
  size_of("frames_max", c.frames_max);
  real_of("noise_stddev", c.noise_stddev);
  real_of("min_embedding_distance", c.min_embedding_distance);
  size_of("n_train", c.n_train);
  size_of("n_dev", c.n_dev);
  size_of("n_test", c.n_test);
  size_of("n_train_entities", c.n_train_entities);
  size_of("n_test_entities", c.n_test_entities);
  size_of("entity_len_min", c.entity_len_min);
  size_of("entity_len_max", c.entity_len_max);
  real_of("entity_fraction", c.entity_fraction);
  size_of("filler_len_min", c.filler_len_min);
  size_of("filler_len_max", c.filler_len_max);
  real_of("zipf_exponent", c.zipf_exponent);
  real_of("trap_rate", c.trap_rate);
  if (auto it = kv.find("seed"); it != kv.end()) c.seed = kv_u64("seed", it->second);
  return c;
}

// Lexicon -------------------------------------------------------------------

std::size_t Lexicon::index_of(const std::string& ch) const {
  auto it = std::find(chars.begin(), chars.end(), ch);
  if (it == chars.end()) throw CorpusError("character '" + ch + "' is not in the lexicon");
  return static_cast<std::size_t>(it - chars.begin());
}

std::vector<std::string> Lexicon::chars_with_role(CharRole role) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < chars.size() && i < roles.size(); ++i) {
    if (roles[i] == role) out.push_back(chars[i]);
  }
  return out;
}

Lexicon gen_lexicon(const SynthConfig& config, Rng& rng) {
  config.validate();
  const std::size_t S = config.n_syllables;
  Lexicon lex;
  std::vector<std::size_t> load(S, 0);
  std::vector<std::size_t> all(S);
  for (std::size_t s = 0; s < S; ++s) all[s] = s;

  Rng assign = rng.split("assign");
  for (std::size_t i = 0; i < config.n_filler_chars; ++i) {
    const std::size_t s = least_loaded(load, all, assign);
    ++load[s];
    lex.chars.push_back(char_symbol(i));
    lex.syllable_of.push_back(s);
    lex.roles.push_back(CharRole::kFiller);
  }
  std::vector<std::size_t> with_filler, without_filler;
  for (std::size_t s = 0; s < S; ++s) (load[s] > 0 ? with_filler : without_filler).push_back(s);
  for (std::size_t i = config.n_filler_chars; i < config.n_chars; ++i) {
    const bool trap = assign.bernoulli(config.trap_rate) || without_filler.empty();
    const std::size_t s = least_loaded(load, trap ? with_filler : without_filler, assign);
    ++load[s];
    lex.chars.push_back(char_symbol(i));
    lex.syllable_of.push_back(s);
    lex.roles.push_back(CharRole::kEntity);
  }
  for (std::size_t s = 0; s < S; ++s) {
    if (load[s] == 0) {
      throw CorpusError("infeasible corpus config: syllable " + std::to_string(s) +
                        " has no character");
    }
  }

  // Unit-norm embeddings with a minimum pairwise distance, by rejection.
  const std::size_t D = config.frame_dim;
  Rng draw = rng.split("embeddings");
  lex.embeddings = Tensor({S, D}, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    bool placed = false;
    for (int attempt = 0; attempt < 100000 && !placed; ++attempt) {
      std::vector<double> v(D);
      double norm = 0.0;
      for (auto& x : v) {
        x = draw.normal();
        norm += x * x;
      }
      norm = std::sqrt(norm);
      if (norm == 0.0) continue;
      for (auto& x : v) x = as_f32(x / norm);
      placed = true;
      for (std::size_t r = 0; r < s && placed; ++r) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < D; ++k) {
          const double diff = v[k] - lex.embeddings.at(r, k);
          d2 += diff * diff;
        }
        // Distinctness is required even when the minimum distance is 0.
        if (std::sqrt(d2) < config.min_embedding_distance || d2 == 0.0) placed = false;
      }
      if (placed) {
        for (std::size_t k = 0; k < D; ++k) lex.embeddings.at(s, k) = v[k];
      }
    }
    if (!placed) {
      throw CorpusError("infeasible corpus config: cannot place " + std::to_string(S) +
                        " embeddings of width " + std::to_string(D) +
                        " at distance " + format_double(config.min_embedding_distance));
    }
  }
  return lex;
}

Tensor synth_frames(const std::vector<std::string>& text, const Lexicon& lexicon,
                    std::size_t frames_min, std::size_t frames_max,
                    double noise_stddev, Rng& rng) {
  if (text.empty()) throw CorpusError("cannot synthesize frames for empty text");
  const std::size_t D = lexicon.embeddings.cols();
  std::vector<std::size_t> syllables;
  for (const auto& ch : text) {
    const std::size_t s = lexicon.syllable_of[lexicon.index_of(ch)];
    const std::size_t k = rng.between(frames_min, frames_max);
    syllables.insert(syllables.end(), k, s);
  }
  Tensor frames({syllables.size(), D}, 0.0);
  for (std::size_t t = 0; t < syllables.size(); ++t) {
    for (std::size_t k = 0; k < D; ++k) {
      double v = lexicon.embeddings.at(syllables[t], k);
      if (noise_stddev > 0.0) v += rng.normal(0.0, noise_stddev);
      frames.at(t, k) = as_f32(v);
    }
  }
  return frames;
}

// Corpus generation ---------------------------------------------------------

namespace {

struct Inventory {
  std::vector<std::vector<std::string>> entities;
};

std::vector<std::size_t> syllable_key(const std::vector<std::string>& e, const Lexicon& lex) {
  std::vector<std::size_t> key;
  for (const auto& ch : e) key.push_back(lex.syllable_of[lex.index_of(ch)]);
  return key;
}

Inventory draw_inventory(std::size_t count, const std::vector<std::string>& alphabet,
                         const SynthConfig& config, const Lexicon& lex,
                         std::set<std::string>& used_text,
                         std::set<std::vector<std::size_t>>& used_sound, Rng& rng,
                         const char* which) {
  Inventory inv;
  std::size_t failures = 0;
  while (inv.entities.size() < count) {
    const std::size_t len = rng.between(config.entity_len_min, config.entity_len_max);
    std::vector<std::string> e;
    for (std::size_t i = 0; i < len; ++i) e.push_back(alphabet[rng.below(alphabet.size())]);
    auto sound = syllable_key(e, lex);
    // Distinct spellings and distinct pronunciations across both inventories.
    if (used_text.contains(join(e)) || used_sound.contains(sound)) {
      if (++failures > 100000) {
        throw CorpusError(std::string("infeasible corpus config: cannot draw ") +
                          std::to_string(count) + " distinct " + which + " entities");
      }
      continue;
    }
    used_text.insert(join(e));
    used_sound.insert(std::move(sound));
    inv.entities.push_back(std::move(e));
  }
  return inv;
}

struct SplitOut {
  std::vector<Utterance> utts;
  std::vector<Tensor> frames;
};

SplitOut gen_split(const std::string& name, std::size_t count, const Inventory& inv,
                   const std::vector<double>& filler_cdf,
                   const std::vector<std::string>& fillers, const Lexicon& lex,
                   const SynthConfig& config) {
  SplitOut out;
  const Rng text_root(config.seed, "text");
  const Rng noise_root(config.seed, "noise");
  char id[64];
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = text_root.split(name, i);
    const std::size_t filler_len = rng.between(config.filler_len_min, config.filler_len_max);
    std::vector<std::string> filler;
    for (std::size_t k = 0; k < filler_len; ++k) {
      const double u = rng.uniform();
      const auto it = std::upper_bound(filler_cdf.begin(), filler_cdf.end(), u);
      const std::size_t idx = std::min<std::size_t>(
          static_cast<std::size_t>(it - filler_cdf.begin()), fillers.size() - 1);
      filler.push_back(fillers[idx]);
    }
    std::vector<std::size_t> picks;
    std::vector<std::size_t> slots;
    if (!inv.entities.empty() && rng.bernoulli(config.entity_fraction)) {
      const std::size_t k = rng.between(1, 2);
      for (std::size_t j = 0; j < k; ++j) {
        picks.push_back(rng.below(inv.entities.size()));
        slots.push_back(rng.below(filler_len + 1));
      }
      std::sort(slots.begin(), slots.end());
    }
    Utterance u;
    std::vector<std::string> text;
    std::size_t next = 0;
    for (std::size_t f = 0; f <= filler_len; ++f) {
      while (next < slots.size() && slots[next] == f) {
        const auto& e = inv.entities[picks[next]];
        u.spans.push_back({text.size(), text.size() + e.size()});
        text.insert(text.end(), e.begin(), e.end());
        ++next;
      }
      if (f < filler_len) text.push_back(filler[f]);
    }
    std::snprintf(id, sizeof(id), "%s-%05zu", name.c_str(), i);
    u.utt_id = id;
    u.frames_path = "frames/" + u.utt_id + ".cpnf";
    u.transcript = join(text);
    Rng noise = noise_root.split(name, i);
    out.frames.push_back(synth_frames(text, lex, config.frames_min, config.frames_max,
                                      config.noise_stddev, noise));
    out.utts.push_back(std::move(u));
  }
  return out;
}

}  // namespace

Corpus gen_corpus(const SynthConfig& config) {
  config.validate();
  Corpus c;
  Rng lex_rng(config.seed, "lexicon");
  c.lexicon = gen_lexicon(config, lex_rng);

  const auto fillers = c.lexicon.chars_with_role(CharRole::kFiller);
  const auto entity_chars = c.lexicon.chars_with_role(CharRole::kEntity);

  // Test entities only use characters seen in training entities, so the
  // entity encoder has trained embeddings for every character it meets.
  Rng inv_rng(config.seed, "inventory");
  std::set<std::string> used_text;
  std::set<std::vector<std::size_t>> used_sound;
  Inventory train_inv = draw_inventory(config.n_train_entities, entity_chars, config,
                                       c.lexicon, used_text, used_sound, inv_rng, "train");
  std::set<std::string> seen;
  for (const auto& e : train_inv.entities) seen.insert(e.begin(), e.end());
  std::vector<std::string> test_alphabet;
  for (const auto& ch : entity_chars) {
    if (seen.contains(ch)) test_alphabet.push_back(ch);
  }
  if (test_alphabet.empty() && config.n_test_entities > 0) test_alphabet = entity_chars;
  Inventory test_inv = draw_inventory(config.n_test_entities, test_alphabet, config,
                                      c.lexicon, used_text, used_sound, inv_rng, "test");
  for (const auto& e : train_inv.entities) c.train_entities.push_back(join(e));
  for (const auto& e : test_inv.entities) c.test_entities.push_back(join(e));

  std::vector<double> cdf;
  double total = 0.0;
  for (std::size_t i = 0; i < fillers.size(); ++i) {
    total += 1.0 / std::pow(static_cast<double>(i + 1), config.zipf_exponent);
    cdf.push_back(total);
  }
  for (auto& v : cdf) v /= total;

  auto train = gen_split("train", config.n_train, train_inv, cdf, fillers, c.lexicon, config);
  auto dev = gen_split("dev", config.n_dev, test_inv, cdf, fillers, c.lexicon, config);
  auto test = gen_split("test", config.n_test, test_inv, cdf, fillers, c.lexicon, config);
  c.train = std::move(train.utts);
  c.train_frames = std::move(train.frames);
  c.dev = std::move(dev.utts);
  c.dev_frames = std::move(dev.frames);
  c.test = std::move(test.utts);
  c.test_frames = std::move(test.frames);
  return c;
}

std::vector<std::size_t> entity_bearing(const std::vector<Utterance>& utterances) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    if (!utterances[i].spans.empty()) out.push_back(i);
  }
  return out;
}

std::vector<Reference> references(const std::vector<Utterance>& utterances) {
  std::vector<Reference> out;
  out.reserve(utterances.size());
  for (const auto& u : utterances) out.push_back({u.utt_id, u.transcript, u.spans});
  return out;
}

void write_corpus(const Corpus& corpus, const SynthConfig& config,
                  const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "frames", ec);
  if (ec) throw binary::IoError("cannot create " + (dir / "frames").string() + ": " + ec.message());

  write_lexicon(dir / "lexicon.txt", corpus.lexicon);
  auto emit = [&](const char* name, const std::vector<Utterance>& utts,
                  const std::vector<Tensor>& frames) {
    write_manifest(dir / (std::string(name) + ".tsv"), utts);
    for (std::size_t i = 0; i < utts.size(); ++i) write_frames(dir / utts[i].frames_path, frames[i]);
    std::vector<Utterance> ne;
    for (auto i : entity_bearing(utts)) ne.push_back(utts[i]);
    return ne;
  };
  emit("train", corpus.train, corpus.train_frames);
  write_manifest(dir / "dev_ne.tsv", emit("dev", corpus.dev, corpus.dev_frames));
  write_manifest(dir / "test_ne.tsv", emit("test", corpus.test, corpus.test_frames));
  binary::write_file(dir / "train_entities.txt", [&] {
    std::string s;
    for (const auto& e : corpus.train_entities) s += e + "\n";
    return s;
  }());
  binary::write_file(dir / "test_entities.txt", [&] {
    std::string s;
    for (const auto& e : corpus.test_entities) s += e + "\n";
    return s;
  }());
  binary::write_file(dir / "config.txt", config.to_text());
}

// Manifests -----------------------------------------------------------------

void validate_utterance(const Utterance& u) {
  const std::size_t n = utf8_chars(u.transcript).size();
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < u.spans.size(); ++i) {
    const auto& s = u.spans[i];
    if (s.begin >= s.end) {
      throw CorpusError("span " + std::to_string(s.begin) + "-" + std::to_string(s.end) +
                        " is empty or reversed");
    }
    if (s.end > n) {
      throw CorpusError("span " + std::to_string(s.begin) + "-" + std::to_string(s.end) +
                        " exceeds transcript length " + std::to_string(n));
    }
    if (i > 0 && s.begin < prev_end) {
      throw CorpusError("span " + std::to_string(s.begin) + "-" + std::to_string(s.end) +
                        " overlaps or precedes the previous span");
    }
    prev_end = s.end;
  }
}

std::vector<Utterance> load_manifest(const std::filesystem::path& path) {
  const std::string data = binary::read_file(path);
  std::vector<Utterance> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < data.size()) {
    ++line_no;
    auto nl = data.find('\n', start);
    if (nl == std::string::npos) nl = data.size();
    std::string line = data.substr(start, nl - start);
    start = nl + 1;
    const auto fields = split_tabs(line);
    if (fields.size() != 4) {
      fail_line(path, line_no, "expected 4 tab-separated fields, got " +
                                   std::to_string(fields.size()));
    }
    Utterance u;
    u.utt_id = fields[0];
    u.frames_path = fields[1];
    u.transcript = fields[2];
    if (u.utt_id.empty()) fail_line(path, line_no, "empty utterance id");
    if (u.transcript.empty()) fail_line(path, line_no, "empty transcript");
    if (!fields[3].empty()) {
      std::size_t p = 0;
      const std::string& spans = fields[3];
      while (p <= spans.size()) {
        auto semi = spans.find(';', p);
        if (semi == std::string::npos) semi = spans.size();
        const std::string item = spans.substr(p, semi - p);
        const auto dash = item.find('-');
        try {
          if (dash == std::string::npos) throw CorpusError("bad span '" + item + "'");
          u.spans.push_back({parse_index(item.substr(0, dash), "span start"),
                             parse_index(item.substr(dash + 1), "span end")});
        } catch (const CorpusError& e) {
          fail_line(path, line_no, e.what());
        }
        p = semi + 1;
      }
    }
    try {
      validate_utterance(u);
    } catch (const CorpusError& e) {
      fail_line(path, line_no, e.what());
    }
    out.push_back(std::move(u));
  }
  return out;
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<Utterance>& utterances) {
  std::string out;
  for (const auto& u : utterances) {
    validate_utterance(u);
    out += u.utt_id + "\t" + u.frames_path + "\t" + u.transcript + "\t";
    for (std::size_t i = 0; i < u.spans.size(); ++i) {
      if (i > 0) out += ';';
      out += std::to_string(u.spans[i].begin) + "-" + std::to_string(u.spans[i].end);
    }
    out += '\n';
  }
  binary::write_file(path, out);
}

// Frames --------------------------------------------------------------------

std::string encode_frames(const Tensor& frames) {
  std::string out(kFramesMagic, 4);
  binary::put<std::uint16_t>(out, kFramesVersion);
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(frames.rows()));
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(frames.cols()));
  for (double v : frames.data()) binary::put<float>(out, static_cast<float>(v));
  return out;
}

Tensor decode_frames(std::string_view data, const std::string& source) {
  binary::Reader r(data, source);
  if (r.bytes(4, "magic") != std::string_view(kFramesMagic, 4)) {
    throw binary::FormatError(source + ": not a frames file (bad magic)");
  }
  const auto version = r.get<std::uint16_t>("version");
  if (version != kFramesVersion) {
    throw binary::FormatError(source + ": unsupported frames version " + std::to_string(version));
  }
  const std::size_t T = r.get<std::uint32_t>("frame count");
  const std::size_t D = r.get<std::uint32_t>("frame width");
  if (T == 0 || D == 0) throw binary::FormatError(source + ": zero-sized frame matrix");
  r.need(T * D * 4, "frame values");
  std::vector<double> values(T * D);
  for (auto& v : values) v = r.get<float>("frame value");
  if (!r.done()) {
    throw binary::FormatError(source + ": " + std::to_string(r.remaining()) +
                              " trailing bytes after frame values");
  }
  return Tensor({T, D}, std::move(values));
}

Tensor read_frames(const std::filesystem::path& path) {
  return decode_frames(binary::read_file(path), path.string());
}

void write_frames(const std::filesystem::path& path, const Tensor& frames) {
  binary::write_file(path, encode_frames(frames));
}

// Lexicon file --------------------------------------------------------------

void write_lexicon(const std::filesystem::path& path, const Lexicon& lexicon) {
  std::string out = std::to_string(lexicon.chars.size()) + "\t" +
                    std::to_string(lexicon.n_syllables()) + "\n";
  for (std::size_t i = 0; i < lexicon.chars.size(); ++i) {
    out += lexicon.chars[i] + "\t" + std::to_string(lexicon.syllable_of[i]) + "\n";
  }
  out += encode_frames(lexicon.embeddings);
  binary::write_file(path, out);
}

Lexicon read_lexicon(const std::filesystem::path& path) {
  const std::string data = binary::read_file(path);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&]() {
    ++line_no;
    const auto nl = data.find('\n', pos);
    if (nl == std::string::npos) fail_line(path, line_no, "unexpected end of file");
    std::string line = data.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };
  Lexicon lex;
  std::size_t n_chars = 0, n_syl = 0;
  {
    const auto f = split_tabs(next_line());
    if (f.size() != 2) fail_line(path, line_no, "expected header '<chars>\\t<syllables>'");
    try {
      n_chars = parse_index(f[0], "character count");
      n_syl = parse_index(f[1], "syllable count");
    } catch (const CorpusError& e) {
      fail_line(path, line_no, e.what());
    }
  }
  for (std::size_t i = 0; i < n_chars; ++i) {
    const auto f = split_tabs(next_line());
    if (f.size() != 2 || utf8_chars(f[0]).size() != 1) {
      fail_line(path, line_no, "expected '<char>\\t<syllableId>'");
    }
    std::size_t s = 0;
    try {
      s = parse_index(f[1], "syllable id");
    } catch (const CorpusError& e) {
      fail_line(path, line_no, e.what());
    }
    if (s >= n_syl) fail_line(path, line_no, "syllable id " + f[1] + " out of range");
    lex.chars.push_back(f[0]);
    lex.syllable_of.push_back(s);
  }
  lex.embeddings = decode_frames(std::string_view(data).substr(pos), path.string());
  if (lex.embeddings.rows() != n_syl) {
    throw CorpusError(path.string() + ": embedding matrix has " +
                      std::to_string(lex.embeddings.rows()) + " rows, header says " +
                      std::to_string(n_syl));
  }
  return lex;
}

}  // namespace copyne
