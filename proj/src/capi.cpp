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

#include "forgeset/forgeset.h"

#include <algorithm>
#include <exception>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "forgeset/blo.hpp"
#include "forgeset/data.hpp"
#include "forgeset/error.hpp"
#include "forgeset/harness.hpp"
#include "forgeset/metrics.hpp"
#include "forgeset/models.hpp"
#include "forgeset/projection.hpp"
#include "forgeset/unlearn.hpp"

struct fs_dataset {
  forgeset::Dataset data;
};
struct fs_model {
  forgeset::ModelParams params;
};
struct fs_selection {
  forgeset::SelectionResult result;
};

namespace {

thread_local std::string last_error;

fs_status Record(fs_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
fs_status Guard(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return FS_OK;
  } catch (const forgeset::Error& e) {
    return Record(static_cast<fs_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return Record(FS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Record(FS_ERR_INTERNAL, e.what());
  }
}

fs_status NullArg(const char* name) {
  return Record(FS_ERR_NULL_ARGUMENT, std::string(name) + " is NULL");
}

fs_status CopyOut(const std::vector<double>& v, double* out, size_t cap, size_t* len) {
  if (len == nullptr) return NullArg("len");
  *len = v.size();
  if (out != nullptr) std::copy_n(v.begin(), std::min(cap, v.size()), out);
  last_error.clear();
  return FS_OK;
}

forgeset::ForgetMask MaskFrom(const size_t* mask, size_t len, size_t n) {
  if (len > 0 && mask == nullptr) {
    forgeset::Fail(forgeset::ErrorCode::kBadSpec, "mask is NULL");
  }
  return forgeset::MakeMask(std::vector<std::size_t>(mask, mask + len), n);
}

}  // namespace

extern "C" {

const char* fs_version(void) { return "0.1.0"; }

const char* fs_status_name(fs_status status) {
  switch (status) {
    case FS_OK:
      return "OK";
    case FS_ERR_NULL_ARGUMENT:
      return "NullArgument";
    case FS_ERR_INTERNAL:
      return "Internal";
    default:
      if (status >= FS_ERR_BAD_SPEC && status <= FS_ERR_CONFIG) {
        return forgeset::ErrorCodeName(static_cast<forgeset::ErrorCode>(status));
      }
      return "Unknown";
  }
}

const char* fs_last_error(void) { return last_error.c_str(); }

void fs_blo_config_default(fs_blo_config* config) {
  if (config == nullptr) return;
  const forgeset::BloConfig d;
  *config = fs_blo_config{d.gamma, d.alpha, d.beta, d.inner_steps, d.outer_steps, 0, 0, 0, 0,
                          0, 0};
}

void fs_unlearn_config_default(fs_unlearn_config* config) {
  if (config == nullptr) return;
  const forgeset::UnlearnConfig d;
  *config = fs_unlearn_config{static_cast<fs_method>(d.method), d.lambda_reg, d.lr, d.epochs,
                              d.l1_coef, FS_SCOPE_ALL, 0, 0};
}

fs_status fs_dataset_gen_blobs(size_t n_per_class, size_t classes, size_t dim, double spread,
                               uint64_t seed, uint64_t stream, fs_dataset** out) {
  if (out == nullptr) return NullArg("out");
  return Guard([&] {
    *out = new fs_dataset{
        forgeset::GenBlobs(n_per_class, classes, dim, spread, {seed, stream})};
  });
}

fs_status fs_dataset_gen_biased(size_t n, double correlation, uint64_t seed, uint64_t stream,
                                fs_dataset** out) {
  if (out == nullptr) return NullArg("out");
  return Guard([&] {
    *out = new fs_dataset{forgeset::GenBiased(n, correlation, {seed, stream})};
  });
}

fs_status fs_dataset_load_csv(const char* path, fs_dataset** out) {
  if (path == nullptr) return NullArg("path");
  if (out == nullptr) return NullArg("out");
  return Guard([&] { *out = new fs_dataset{forgeset::LoadCsv(path)}; });
}

fs_status fs_dataset_save_csv(const fs_dataset* data, const char* path) {
  if (data == nullptr) return NullArg("data");
  if (path == nullptr) return NullArg("path");
  return Guard([&] { forgeset::SaveCsv(data->data, path); });
}

size_t fs_dataset_size(const fs_dataset* data) { return data ? data->data.size() : 0; }
size_t fs_dataset_dim(const fs_dataset* data) { return data ? data->data.dim() : 0; }
size_t fs_dataset_classes(const fs_dataset* data) {
  return data ? data->data.num_classes : 0;
}
void fs_dataset_free(fs_dataset* data) { delete data; }

fs_status fs_model_train(const fs_dataset* data, const size_t* sizes, size_t n_sizes,
                         size_t epochs, double lr, fs_activation activation, uint64_t seed,
                         uint64_t stream, fs_model** out) {
  if (data == nullptr) return NullArg("data");
  if (sizes == nullptr) return NullArg("sizes");
  if (out == nullptr) return NullArg("out");
  return Guard([&] {
    const std::vector<std::size_t> layer_sizes(sizes, sizes + n_sizes);
    const auto act = activation == FS_IDENTITY ? forgeset::Activation::kIdentity
                                               : forgeset::Activation::kReLU;
    *out = new fs_model{
        forgeset::Train(data->data, layer_sizes, epochs, lr, {seed, stream}, act)};
  });
}

fs_status fs_model_load(const char* path, fs_model** out) {
  if (path == nullptr) return NullArg("path");
  if (out == nullptr) return NullArg("out");
  return Guard([&] { *out = new fs_model{forgeset::LoadCheckpoint(path)}; });
}

fs_status fs_model_save(const fs_model* model, const char* path) {
  if (model == nullptr) return NullArg("model");
  if (path == nullptr) return NullArg("path");
  return Guard([&] { forgeset::SaveCheckpoint(model->params, path); });
}

fs_status fs_model_accuracy(const fs_model* model, const fs_dataset* data, double* out) {
  if (model == nullptr) return NullArg("model");
  if (data == nullptr) return NullArg("data");
  if (out == nullptr) return NullArg("out");
  return Guard([&] { *out = forgeset::Accuracy(model->params, data->data.x, data->data.y); });
}

void fs_model_free(fs_model* model) { delete model; }

fs_status fs_select(const fs_dataset* data, size_t m, const fs_model* theta_o,
                    const fs_blo_config* config, fs_selection** out) {
  if (data == nullptr) return NullArg("data");
  if (theta_o == nullptr) return NullArg("theta_o");
  if (out == nullptr) return NullArg("out");
  return Guard([&] {
    forgeset::BloConfig c;
    if (config != nullptr) {
      c.gamma = config->gamma;
      c.alpha = config->alpha;
      c.beta = config->beta;
      c.inner_steps = config->inner_steps;
      c.outer_steps = config->outer_steps;
      c.granularity = config->class_granularity ? forgeset::Granularity::kClass
                                                : forgeset::Granularity::kSample;
      c.direction =
          config->easiest ? forgeset::Direction::kEasiest : forgeset::Direction::kWorst;
      c.lower_init = config->random_lower_init ? forgeset::LowerInit::kRandom
                                               : forgeset::LowerInit::kPretrained;
      c.weight_init = config->random_binary_w0 ? forgeset::WeightInit::kRandomBinary
                                               : forgeset::WeightInit::kUniform;
      c.rng = {config->seed, config->stream};
    }
    *out = new fs_selection{forgeset::Select(data->data, m, theta_o->params, c)};
  });
}

fs_status fs_selection_mask(const fs_selection* sel, size_t* out, size_t cap, size_t* len) {
  if (sel == nullptr) return NullArg("sel");
  if (len == nullptr) return NullArg("len");
  const auto& idx = sel->result.mask.indices;
  *len = idx.size();
  if (out != nullptr) std::copy_n(idx.begin(), std::min(cap, idx.size()), out);
  last_error.clear();
  return FS_OK;
}

fs_status fs_selection_weights(const fs_selection* sel, double* out, size_t cap,
                               size_t* len) {
  if (sel == nullptr) return NullArg("sel");
  return CopyOut(sel->result.weights.w, out, cap, len);
}

fs_status fs_selection_trajectory(const fs_selection* sel, double* out, size_t cap,
                                  size_t* len) {
  if (sel == nullptr) return NullArg("sel");
  return CopyOut(sel->result.trajectory, out, cap, len);
}

void fs_selection_free(fs_selection* sel) { delete sel; }

fs_status fs_unlearn(const fs_model* theta_o, const fs_dataset* data, const size_t* mask,
                     size_t mask_len, const fs_unlearn_config* config, fs_model** out) {
  if (theta_o == nullptr) return NullArg("theta_o");
  if (data == nullptr) return NullArg("data");
  if (config == nullptr) return NullArg("config");
  if (out == nullptr) return NullArg("out");
  return Guard([&] {
    if (config->method < FS_RETRAIN || config->method > FS_L1_SPARSE) {
      forgeset::Fail(forgeset::ErrorCode::kBadSpec, "unknown unlearning method");
    }
    forgeset::UnlearnConfig c;
    c.method = static_cast<forgeset::Method>(config->method);
    c.lambda_reg = config->lambda_reg;
    c.lr = config->lr;
    c.epochs = config->epochs;
    c.l1_coef = config->l1_coef;
    c.scope = config->scope == FS_SCOPE_LAST_LAYER ? forgeset::ParamScope::kLastLayer
                                                   : forgeset::ParamScope::kAll;
    c.rng = {config->seed, config->stream};
    const auto m = MaskFrom(mask, mask_len, data->data.size());
    *out = new fs_model{forgeset::Unlearn(theta_o->params, data->data, m, c)};
  });
}

fs_status fs_evaluate(const fs_model* theta_u, const fs_dataset* train, const size_t* mask,
                      size_t mask_len, const fs_dataset* test, fs_eval_report* out) {
  if (theta_u == nullptr) return NullArg("theta_u");
  if (train == nullptr) return NullArg("train");
  if (test == nullptr) return NullArg("test");
  if (out == nullptr) return NullArg("out");
  return Guard([&] {
    const auto m = MaskFrom(mask, mask_len, train->data.size());
    const auto r = forgeset::Evaluate(theta_u->params, train->data, m, test->data);
    *out = fs_eval_report{r.ua, r.mia, r.ra, r.ta};
  });
}

fs_status fs_avg_gap(const fs_eval_report* report, const fs_eval_report* reference,
                     fs_gap_report* out) {
  if (report == nullptr) return NullArg("report");
  if (reference == nullptr) return NullArg("reference");
  if (out == nullptr) return NullArg("out");
  return Guard([&] {
    const auto g = forgeset::AvgGap({report->ua, report->mia, report->ra, report->ta},
                                    {reference->ua, reference->mia, reference->ra,
                                     reference->ta});
    *out = fs_gap_report{g.ua, g.mia, g.ra, g.ta, g.avg_gap};
  });
}

fs_status fs_project_capped_simplex(const double* a, size_t n, size_t m, double* out) {
  if (n > 0 && (a == nullptr || out == nullptr)) return NullArg("a/out");
  return Guard([&] {
    const auto w = forgeset::ProjectCappedSimplex({a, n}, m).w;
    std::copy(w.begin(), w.end(), out);
  });
}

fs_status fs_harness_run(const char* verb, const char* config_path, const char* out_dir,
                         const uint64_t* seed, int force_guard) {
  if (verb == nullptr) return NullArg("verb");
  if (out_dir == nullptr) return NullArg("out_dir");
  return Guard([&] {
    auto config = config_path != nullptr && config_path[0] != '\0'
                      ? forgeset::harness::LoadConfig(config_path)
                      : forgeset::harness::ParseConfig("{}");
    forgeset::harness::RunOptions options;
    options.out_dir = out_dir;
    if (seed != nullptr) options.seed = *seed;
    options.force_guard = force_guard != 0;
    forgeset::harness::RunVerb(verb, std::move(config), options);
  });
}

}  // extern "C"
