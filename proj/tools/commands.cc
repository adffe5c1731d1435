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

#include "commands.h"

#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <iostream>

#include "copyne/binary_io.h"
#include "copyne/copy_supervision.h"
#include "copyne/entity_dict.h"
#include "copyne/eval.h"

namespace copyne::cli {

namespace {

// Maps library exceptions onto exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kBadConfig;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << '\n';
    return kBadConfig;
  } catch (const NonFiniteLoss& e) {
    err << "error: " << e.what() << '\n';
    return kNonFinite;
  } catch (const EvalError& e) {
    err << "error: " << e.what() << '\n';
    return kIdMismatch;
  } catch (const binary::IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const binary::FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const CorpusError& e) {
    err << "error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const EntityDictError& e) {
    err << "error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoFailure;
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw binary::IoError("cannot create " + dir.string() + ": " + ec.message());
}

void echo_config(const RunConfig& config, const fs::path& path) {
  binary::write_file(path, config.to_text());
}

// Loads the decode dictionary; nullopt means "missing" for the caller.
std::optional<EntityDict> decode_dict(const Model& model, const std::optional<fs::path>& path,
                                      std::ostream& err) {
  if (!model.copyne()) return EntityDict{};
  if (!path || path->empty() || !fs::exists(*path)) return std::nullopt;
  std::vector<std::string> warnings;
  EntityDict dict = load_entity_dict(*path, model.vocab(), &warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  if (dict.entity_count() == 0) {
    err << "warning: dictionary " << path->string() << " is empty; decoding without copies\n";
  }
  return dict;
}

std::vector<HypothesisText> read_hypotheses(const fs::path& path) {
  const std::string data = binary::read_file(path);
  std::vector<HypothesisText> out;
  std::size_t start = 0, line_no = 0;
  while (start < data.size()) {
    ++line_no;
    auto nl = data.find('\n', start);
    if (nl == std::string::npos) nl = data.size();
    const std::string line = data.substr(start, nl - start);
    start = nl + 1;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw CorpusError(path.string() + ":" + std::to_string(line_no) +
                        ": expected utt_id<TAB>text");
    }
    const auto tab2 = line.find('\t', tab + 1);
    out.push_back({line.substr(0, tab), line.substr(tab + 1, tab2 == std::string::npos
                                                                  ? std::string::npos
                                                                  : tab2 - tab - 1)});
  }
  return out;
}

}  // namespace

int cmd_gen_data(const RunConfig& config, const fs::path& out_dir, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    ensure_dir(out_dir);
    const Corpus corpus = gen_corpus(config.synth);
    write_corpus(corpus, config.synth, out_dir);
    echo_config(config, out_dir / "run_config.txt");
    out << "wrote " << corpus.train.size() << " train, " << corpus.dev.size() << " dev, "
        << corpus.test.size() << " test utterances to " << out_dir.string() << '\n';
    return kOk;
  });
}

int cmd_train(const RunConfig& config, const fs::path& corpus_dir, const fs::path& out_dir,
              std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Lexicon lexicon = read_lexicon(corpus_dir / "lexicon.txt");
    if (lexicon.embeddings.cols() != config.model.frame_dim) {
      throw ConfigError("frame_dim=" + std::to_string(config.model.frame_dim) +
                        " but the corpus has " + std::to_string(lexicon.embeddings.cols()) +
                        "-dimensional frames");
    }
    const Vocab vocab(lexicon.chars);
    const auto train_set = load_examples(corpus_dir / "train.tsv", vocab);
    const auto dev_set = load_examples(corpus_dir / "dev.tsv", vocab);
    std::vector<std::string> warnings;
    const EntityDict global = load_entity_dict(corpus_dir / "train_entities.txt", vocab, &warnings);
    const EntityDict dev_dict = load_entity_dict(corpus_dir / "test_entities.txt", vocab, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';

    ensure_dir(out_dir);
    echo_config(config, out_dir / "config.txt");
    std::string metrics;
    const auto result = train(config.train, config.model, vocab, train_set, dev_set, global,
                              dev_dict, [&](const EpochMetrics& m, bool best, const Model& model) {
                                const std::string line = format_metrics(m);
                                metrics += line + "\n";
                                binary::write_file(out_dir / "metrics.tsv", metrics);
                                // Saved as it happens so an interrupted run keeps its best.
                                if (best) save_checkpoint(model, out_dir / "best.ckpt");
                                out << line << (best ? "\t*" : "") << '\n' << std::flush;
                              });
    save_checkpoint(result.last, out_dir / "last.ckpt");
    out << "best epoch " << result.best_epoch << '\n';
    return kOk;
  });
}

int cmd_decode(const RunConfig& config, const fs::path& checkpoint, const fs::path& manifest,
               const std::optional<fs::path>& dict_path, const fs::path& hyp_out,
               const std::optional<std::string>& requested_mode, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&] {
    const Model model = load_checkpoint(checkpoint);
    if (requested_mode && parse_mode(*requested_mode) != model.config().mode) {
      throw ConfigError("requested mode " + *requested_mode + " but the checkpoint is " +
                        mode_name(model.config().mode));
    }
    const auto dict = decode_dict(model, dict_path, err);
    if (!dict) {
      err << "error: copyne decoding needs an entity dictionary (--dict)\n";
      return static_cast<int>(kMissingDict);
    }
    BeamConfig beam = config.beam;
    beam.mode = model.config().mode;
    const auto examples = load_examples(manifest, model.vocab());
    const auto decoded = decode_examples(model, examples, *dict, beam);
    binary::write_file(hyp_out, format_decode_output(decoded));
    echo_config(config, hyp_out.string() + ".config.txt");
    out << "decoded " << decoded.size() << " utterances to " << hyp_out.string() << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_eval(const fs::path& ref_manifest, const fs::path& hyp_file,
             const std::optional<fs::path>& report_out, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto refs = references(load_manifest(ref_manifest));
    const auto hyps = read_hypotheses(hyp_file);
    const Scores s = score_corpus(pair_by_id(refs, hyps));
    const std::string report = format_report(s);
    if (report_out) binary::write_file(*report_out, report);
    out << report;
    return kOk;
  });
}

int cmd_gamma_sweep(const RunConfig& config, const fs::path& checkpoint,
                    const fs::path& manifest, const std::optional<fs::path>& dict_path,
                    const std::vector<double>& gammas, const fs::path& tsv_out,
                    std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Model model = load_checkpoint(checkpoint);
    if (!model.copyne()) throw ConfigError("gamma-sweep needs a copyne checkpoint");
    const auto dict = decode_dict(model, dict_path, err);
    if (!dict) {
      err << "error: gamma-sweep needs an entity dictionary (--dict)\n";
      return static_cast<int>(kMissingDict);
    }
    const auto examples = load_examples(manifest, model.vocab());
    std::string tsv;
    char row[128];
    for (double gamma : gammas) {
      BeamConfig beam = config.beam;
      beam.mode = model.config().mode;
      beam.gamma = gamma;
      try {
        beam.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      const Scores s = score_decoded(examples, decode_examples(model, examples, *dict, beam));
      std::snprintf(row, sizeof(row), "%s\t%.4f\t%.4f\n", format_double(gamma).c_str(), s.cer,
                    s.ne_cer);
      tsv += row;
      out << row << std::flush;
    }
    binary::write_file(tsv_out, tsv);
    echo_config(config, tsv_out.string() + ".config.txt");
    return static_cast<int>(kOk);
  });
}

int run(int argc, char** argv) {
  CLI::App app{"CopyNE: span-level entity copying for contextual speech recognition"};
  app.require_subcommand(1);

  std::string config_file;
  std::vector<std::string> sets;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_file, "key=value config file");
    sub->add_option("--set", sets, "override, as key=value (repeatable)");
  };

  std::string out_path, corpus_dir, checkpoint, manifest, dict, ref, hyp, report, mode;
  std::optional<double> gamma;
  std::optional<std::size_t> beam_width;
  std::optional<std::uint64_t> seed;
  std::vector<double> gammas{0.0, 0.3, 0.6, 0.9, 1.0};

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic corpus");
  add_config(gen);
  gen->add_option("-o,--out", out_path, "output directory")->required();
  gen->add_option("--seed", seed, "random seed");

  auto* tr = app.add_subcommand("train", "train a baseline or CopyNE model");
  add_config(tr);
  tr->add_option("--corpus", corpus_dir, "corpus directory")->required();
  tr->add_option("-o,--out", out_path, "output directory")->required();
  tr->add_option("--mode", mode, "baseline or copyne");
  tr->add_option("--seed", seed, "random seed");

  auto* dec = app.add_subcommand("decode", "decode a manifest");
  add_config(dec);
  dec->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  dec->add_option("--manifest", manifest, "utterance manifest")->required();
  dec->add_option("--dict", dict, "entity dictionary (copyne mode)");
  dec->add_option("-o,--out", out_path, "hypothesis file")->required();
  dec->add_option("--mode", mode, "expected checkpoint mode");
  dec->add_option("--gamma", gamma, "copy confidence threshold");
  dec->add_option("--beam-width", beam_width, "beam width");

  auto* ev = app.add_subcommand("eval", "score hypotheses against a manifest");
  ev->add_option("--ref", ref, "reference manifest")->required();
  ev->add_option("--hyp", hyp, "hypothesis file")->required();
  ev->add_option("-o,--out", report, "also write the report here");

  auto* sweep = app.add_subcommand("gamma-sweep", "CER as a function of gamma");
  add_config(sweep);
  sweep->add_option("--checkpoint", checkpoint, "copyne checkpoint")->required();
  sweep->add_option("--manifest", manifest, "utterance manifest")->required();
  sweep->add_option("--dict", dict, "entity dictionary");
  sweep->add_option("--gammas", gammas, "thresholds to try")->delimiter(',');
  sweep->add_option("-o,--out", out_path, "TSV output")->required();
  sweep->add_option("--beam-width", beam_width, "beam width");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  // Flags override the file; --set overrides both.
  std::vector<std::string> overrides;
  if (seed) overrides.push_back("seed=" + std::to_string(*seed));
  if (!mode.empty() && tr->parsed()) overrides.push_back("mode=" + mode);
  if (gamma) overrides.push_back("gamma=" + format_double(*gamma));
  if (beam_width) overrides.push_back("beam_width=" + std::to_string(*beam_width));
  overrides.insert(overrides.end(), sets.begin(), sets.end());

  if (ev->parsed()) {
    return cmd_eval(ref, hyp, report.empty() ? std::nullopt : std::optional<fs::path>(report),
                    std::cout, std::cerr);
  }
  RunConfig config;
  try {
    config = RunConfig::load(config_file, overrides);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadConfig;
  }
  const auto dict_opt = dict.empty() ? std::nullopt : std::optional<fs::path>(dict);
  if (gen->parsed()) return cmd_gen_data(config, out_path, std::cout, std::cerr);
  if (tr->parsed()) return cmd_train(config, corpus_dir, out_path, std::cout, std::cerr);
  if (dec->parsed()) {
    return cmd_decode(config, checkpoint, manifest, dict_opt, out_path,
                      mode.empty() ? std::nullopt : std::optional<std::string>(mode), std::cout,
                      std::cerr);
  }
  return cmd_gamma_sweep(config, checkpoint, manifest, dict_opt, gammas, out_path, std::cout,
                         std::cerr);
}

}  // namespace copyne::cli
