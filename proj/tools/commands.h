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

// Subcommands of the copyne tool. Each returns a process exit code and
// writes diagnostics to `err`.

#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "run_config.h"

namespace copyne::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kBadConfig = 2,
  kIoFailure = 3,
  kNonFinite = 4,
  kMissingDict = 5,
  kIdMismatch = 6,
};

namespace fs = std::filesystem;

int cmd_gen_data(const RunConfig& config, const fs::path& out_dir, std::ostream& out,
                 std::ostream& err);

/// Writes best.ckpt, last.ckpt, metrics.tsv and config.txt into out_dir.
int cmd_train(const RunConfig& config, const fs::path& corpus_dir, const fs::path& out_dir,
              std::ostream& out, std::ostream& err);

/// requested_mode, when given, must match the checkpoint.
int cmd_decode(const RunConfig& config, const fs::path& checkpoint, const fs::path& manifest,
               const std::optional<fs::path>& dict, const fs::path& hyp_out,
               const std::optional<std::string>& requested_mode, std::ostream& out,
               std::ostream& err);

int cmd_eval(const fs::path& ref_manifest, const fs::path& hyp_file,
             const std::optional<fs::path>& report_out, std::ostream& out, std::ostream& err);

/// Rows "gamma<TAB>cer<TAB>ne_cer", one per gamma in the given order.
int cmd_gamma_sweep(const RunConfig& config, const fs::path& checkpoint,
                    const fs::path& manifest, const std::optional<fs::path>& dict,
                    const std::vector<double>& gammas, const fs::path& tsv_out,
                    std::ostream& out, std::ostream& err);

/// Full command-line entry point.
int run(int argc, char** argv);

}  // namespace copyne::cli
