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

#include <string>
#include <vector>

#include "benchmark/benchmark.h"
#include "copyne/autodiff.h"
#include "copyne/network.h"

namespace copyne {
namespace {

Vocab bench_vocab() {
  std::vector<std::string> chars;
  for (char c = 'a'; c <= 'z'; ++c) chars.emplace_back(1, c);
  for (char c = 'A'; c <= 'Z'; ++c) chars.emplace_back(1, c);
  for (char c = '0'; c <= '7'; ++c) chars.emplace_back(1, c);
  return Vocab(chars);
}

Tensor bench_frames(std::size_t t, std::size_t d, Rng& rng) {
  Tensor f({t, d}, 0.0);
  for (auto& v : f.data()) v = rng.normal();
  return f;
}

void BM_EncoderForwardBackward(benchmark::State& state) {
  Rng rng(7, "init");
  ModelConfig cfg;
  cfg.mode = ModelMode::kBaseline;
  const Model model = Model::initialize(cfg, bench_vocab(), rng);
  const Tensor frames = bench_frames(static_cast<std::size_t>(state.range(0)), cfg.frame_dim, rng);
  std::vector<TokenId> history{Vocab::kBos};
  for (int i = 0; i < 10; ++i) history.push_back(Vocab::kFirstContent + i);
  for (auto _ : state) {
    Graph g;
    Var h = encode_audio(g, model, frames);
    Var d = decoder_states(g, model, history, h);
    Var loss = add(sum(baseline_step(g, model, d)), sum(ctc_log_probs(g, model, h)));
    g.backward(loss);
    benchmark::DoNotOptimize(g.parameter_gradients());
  }
}
BENCHMARK(BM_EncoderForwardBackward)->Arg(25)->Unit(benchmark::kMillisecond);

void BM_DecoderStep(benchmark::State& state) {
  Rng rng(7, "init");
  ModelConfig cfg;
  const Model model = Model::initialize(cfg, bench_vocab(), rng);
  const Tensor frames = bench_frames(25, cfg.frame_dim, rng);
  Graph enc(false);
  const Tensor h = enc.value(encode_audio(enc, model, frames));
  std::vector<TokenId> history{Vocab::kBos};
  for (int i = 0; i < state.range(0); ++i) history.push_back(Vocab::kFirstContent + i);
  for (auto _ : state) {
    Graph g(false);
    Var d = decoder_states(g, model, history, g.external(h));
    benchmark::DoNotOptimize(g.value(d));
  }
}
BENCHMARK(BM_DecoderStep)->Arg(4)->Arg(12)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace copyne

BENCHMARK_MAIN();
