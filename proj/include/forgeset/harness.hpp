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

#ifndef FORGESET_HARNESS_HPP_
#define FORGESET_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forgeset/blo.hpp"
#include "forgeset/data.hpp"
#include "forgeset/models.hpp"
#include "forgeset/unlearn.hpp"

namespace forgeset::harness {

struct DatasetSpec {
  std::string generator = "blobs";  // blobs | biased | csv
  // blobs
  std::size_t n_per_class = 200;
  std::size_t test_per_class = 200;
  std::size_t classes = 2;
  std::size_t dim = 2;
  double spread = 1.4;
  // biased
  std::size_t n = 400;
  std::size_t test_n = 400;
  double correlation = 0.9;
  // csv, relative paths resolve against the config file's directory
  std::string train_csv;
  std::string test_csv;
};

struct ModelSpec {
  std::string name = "linear";
  std::vector<std::size_t> hidden;
  Activation activation = Activation::kReLU;
  std::size_t epochs = 300;
  double lr = 0.5;
};

struct ExperimentConfig {
  std::uint64_t seed = 7;
  DatasetSpec dataset;
  std::vector<ModelSpec> models{ModelSpec{}};
  double forget_ratio = 0.1;
  std::size_t forget_m = 0;  // overrides forget_ratio when > 0
  BloConfig selection;       // rng is derived from seed
  bool easiest = true;
  std::size_t random_masks = 10;
  std::vector<UnlearnConfig> methods;  // Retrain is always evaluated first
  std::size_t eval_seeds = 10;
  bool oracle = false;
  bool oracle_force = false;
  std::vector<double> mixture_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  std::size_t mixture_seeds = 10;
  std::filesystem::path base_dir;  // for relative csv paths; not echoed
};

// Parses a JSON config. Unknown keys, wrong types and out-of-range values
// throw kConfig. Missing keys take the defaults above.
ExperimentConfig ParseConfig(const std::string& json_text,
                             const std::filesystem::path& base_dir = {});
ExperimentConfig LoadConfig(const std::filesystem::path& path);

// Every field with its effective value, as pretty-printed JSON.
std::string ResolvedConfigJson(const ExperimentConfig& config);

// Forget budget in selection units (samples, or classes at class granularity).
std::size_t ForgetUnits(const ExperimentConfig& config, std::size_t units);

// Unit mask mixing round(p * m) of the highest-weight worst-case units with
// the first m - that many entries of `pool_order`, which must list units
// outside the worst-case mask.
ForgetMask MixtureMask(const SelectionResult& worst, double p,
                       std::span<const std::size_t> pool_order);

std::string Sha1Hex(std::string_view data);
// Identifier git assigns to a blob with this content.
std::string GitBlobId(std::string_view content);

struct RunOptions {
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
  bool force_guard = false;
};

const std::vector<std::string_view>& Verbs();

// Runs one verb, writing its artifacts into options.out_dir (which must
// exist). Missing prerequisites are produced on the way and written too;
// artifacts left by an earlier run with the same resolved config are reused.
void RunVerb(std::string_view verb, ExperimentConfig config, const RunOptions& options);

}  // namespace forgeset::harness

#endif  // FORGESET_HARNESS_HPP_
