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

#include "run_config.h"

#include <set>
#include <sstream>

#include "copyne/binary_io.h"

namespace copyne::cli {

namespace {

const std::set<std::string>& model_keys() {
  static const std::set<std::string> keys = {
      "mode", "d_model", "n_heads", "n_enc_layers", "n_dec_layers", "d_ff",
      "d_attention", "ne_lstm_layers", "ne_hidden", "max_positions",
      "positional_encoding"};
  return keys;
}

const std::set<std::string>& run_keys() {
  static const std::set<std::string> keys = {
      "epochs", "batch_size", "learning_rate", "adam_beta1", "adam_beta2",
      "adam_eps", "clip_norm", "lambda", "beta", "dropout", "no_copy_loss",
      "dev_beam_width", "gamma", "beam_width", "max_actions"};
  return keys;
}

}  // namespace

bool RunConfig::is_key(const std::string& key) {
  // frame_dim and seed are shared between the corpus and the model.
  return SynthConfig::is_key(key) || model_keys().contains(key) || run_keys().contains(key);
}

RunConfig RunConfig::from_map(const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    if (!is_key(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  RunConfig c;
  c.synth = SynthConfig::from_map(kv);
  try {
    c.synth.validate();
  } catch (const CorpusError& e) {
    throw ConfigError(e.what());
  }
  try {
    c.model = ModelConfig::from_map(kv);
  } catch (const ModelError& e) {
    throw ConfigError(e.what());
  }

  auto size_of = [&](const char* key, std::size_t& field) {
    if (auto it = kv.find(key); it != kv.end()) field = kv_size(key, it->second);
  };
  auto real_of = [&](const char* key, double& field) {
    if (auto it = kv.find(key); it != kv.end()) field = kv_double(key, it->second);
  };
  size_of("epochs", c.train.epochs);
  size_of("batch_size", c.train.batch_size);
  real_of("learning_rate", c.train.learning_rate);
  real_of("adam_beta1", c.train.adam_beta1);
  real_of("adam_beta2", c.train.adam_beta2);
  real_of("adam_eps", c.train.adam_eps);
  real_of("clip_norm", c.train.clip_norm);
  real_of("lambda", c.train.lambda);
  real_of("beta", c.train.beta);
  real_of("dropout", c.train.dropout);
  if (auto it = kv.find("no_copy_loss"); it != kv.end()) {
    c.train.no_copy_loss = kv_bool("no_copy_loss", it->second);
  }
  size_of("dev_beam_width", c.train.dev_beam_width);
  real_of("gamma", c.beam.gamma);
  size_of("beam_width", c.beam.beam_width);
  size_of("max_actions", c.beam.max_actions);
  c.train.seed = c.synth.seed;
  c.train.dev_gamma = c.beam.gamma;
  c.beam.mode = c.model.mode;
  try {
    c.train.validate();
    c.beam.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& file,
                          const std::vector<std::string>& overrides) {
  KeyValues kv;
  if (!file.empty()) {
    std::string text;
    try {
      text = binary::read_file(file);
    } catch (const binary::IoError& e) {
      throw ConfigError(e.what());
    }
    kv = parse_key_values(text, file.string());
  }
  for (const auto& o : overrides) {
    const auto more = parse_key_values(o, "--set " + o);
    for (const auto& [k, v] : more) kv[k] = v;
  }
  return from_map(kv);
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os << "# corpus\n" << synth.to_text();
  os << "# model\n";
  // frame_dim already appears with the corpus keys.
  std::istringstream model_lines(model.to_text());
  for (std::string line; std::getline(model_lines, line);) {
    if (line.rfind("frame_dim=", 0) != 0) os << line << '\n';
  }
  os << "# training\n"
     << "epochs=" << train.epochs << '\n'
     << "batch_size=" << train.batch_size << '\n'
     << "learning_rate=" << format_double(train.learning_rate) << '\n'
     << "adam_beta1=" << format_double(train.adam_beta1) << '\n'
     << "adam_beta2=" << format_double(train.adam_beta2) << '\n'
     << "adam_eps=" << format_double(train.adam_eps) << '\n'
     << "clip_norm=" << format_double(train.clip_norm) << '\n'
     << "lambda=" << format_double(train.lambda) << '\n'
     << "beta=" << format_double(train.beta) << '\n'
     << "dropout=" << format_double(train.dropout) << '\n'
     << "no_copy_loss=" << (train.no_copy_loss ? "true" : "false") << '\n'
     << "dev_beam_width=" << train.dev_beam_width << '\n'
     << "# decoding\n"
     << "gamma=" << format_double(beam.gamma) << '\n'
     << "beam_width=" << beam.beam_width << '\n'
     << "max_actions=" << beam.max_actions << '\n';
  return os.str();
}

}  // namespace copyne::cli
