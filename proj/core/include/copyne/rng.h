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

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string_view>

namespace copyne {

/// Counter-based generator: output i of a stream is mix(key + i * step),
/// where key is derived from (seed, label, index). Streams with different
/// labels or indices never share state, so every consumer gets its own
/// reproducible sequence no matter what else ran before it.
///
/// Stream labels in use: "init" (parameter initialization), "shuffle"
/// (epoch order), "pseudo-entities", "negatives", "noise" (frame noise), "dropout",
/// "lexicon", "embeddings", "inventory", "text" (corpus generation).
class Rng {
 public:
  using result_type = std::uint64_t;

  Rng(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

  /// Child stream; independent of how far this stream has advanced.
  Rng split(std::string_view label, std::uint64_t index = 0) const;

  result_type operator()();
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  /// Uniform in [0, 1).
  double uniform();
  /// Uniform integer in [0, n); n must be positive.
  std::size_t below(std::size_t n);
  /// Uniform integer in [lo, hi].
  std::size_t between(std::size_t lo, std::size_t hi) {
    return lo + below(hi - lo + 1);
  }
  double normal(double mean = 0.0, double stddev = 1.0);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  explicit Rng(std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace copyne
