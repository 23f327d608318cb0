//
// Copyright 2026 The forgeset Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "forgeset/forgeset.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitGuard = 4;

int ExitCode(fs_status status) {
  switch (status) {
    case FS_OK:
      return 0;
    case FS_ERR_BRACKET:
    case FS_ERR_NO_CONVERGENCE:
    case FS_ERR_DIVERGENCE:
    case FS_ERR_INTERNAL:
      return kExitNumerical;
    case FS_ERR_TOO_LARGE:
      return kExitGuard;
    default:
      return kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Worst- and easiest-case forget sets for machine unlearning"};
  app.set_version_flag("--version", std::string(fs_version()));
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool force_guard = false;

  const char* verbs[][2] = {
      {"gen", "Generate train/test CSVs"},
      {"train", "Pretrain the configured models"},
      {"select", "Worst/easiest-case selection plus random baseline masks"},
      {"unlearn-eval", "Unlearn every mask with every method and tabulate metrics"},
      {"oracle", "Rank every size-m subset by Retrain UA"},
      {"transfer", "Cross-model transfer of worst-case masks"},
      {"coreset", "Test accuracy after training on mask complements"},
      {"mixture", "Retrain UA for worst/random mixtures"},
      {"report", "Run the full pipeline and write report.md"},
  };
  for (const auto& verb : verbs) {
    CLI::App* sub = app.add_subcommand(verb[0], verb[1]);
    sub->add_option("--config", config_path, "JSON config (defaults when omitted)");
    sub->add_option("--out", out_dir, "Existing output directory")->capture_default_str();
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_flag("--force-guard", force_guard, "Run the oracle past its size guard");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  const std::uint64_t seed_value = seed.value_or(0);
  const fs_status status =
      fs_harness_run(verb.c_str(), config_path.c_str(), out_dir.c_str(),
                     seed ? &seed_value : nullptr, force_guard ? 1 : 0);
  if (status != FS_OK) {
    std::fprintf(stderr, "forgeset %s: %s: %s\n", verb.c_str(), fs_status_name(status),
                 fs_last_error());
  }
  return ExitCode(status);
}
