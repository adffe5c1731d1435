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

// Effective configuration of a command-line run: corpus, model, training
// and decoding settings in one flat key=value namespace.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "copyne/corpus.h"
#include "copyne/decoding.h"
#include "copyne/kv.h"
#include "copyne/network.h"
#include "copyne/training.h"

namespace copyne::cli {

struct RunConfig {
  SynthConfig synth;
  ModelConfig model;
  TrainConfig train;
  BeamConfig beam;

  /// Every key the file format accepts.
  static bool is_key(const std::string& key);

  /// Defaults, then the file (if non-empty), then "key=value" overrides.
  /// Unknown keys and bad values throw ConfigError. The single `seed`
  /// drives corpus generation and training alike.
  static RunConfig load(const std::filesystem::path& file,
                        const std::vector<std::string>& overrides);
  static RunConfig from_map(const KeyValues& kv);

  std::string to_text() const;
};

}  // namespace copyne::cli
