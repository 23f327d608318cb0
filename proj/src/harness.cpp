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

#include "forgeset/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "forgeset/error.hpp"
#include "forgeset/metrics.hpp"
#include "forgeset/oracle.hpp"
#include "json.hpp"

namespace forgeset::harness {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

// Stream tags under RngStream{seed, 0}.
constexpr std::uint64_t kTagTrainData = 1;
constexpr std::uint64_t kTagTestData = 2;
constexpr std::uint64_t kTagModel = 10;
constexpr std::uint64_t kTagSelect = 20;
constexpr std::uint64_t kTagRandomMask = 100;
constexpr std::uint64_t kTagEval = 1000;
constexpr std::uint64_t kTagMixturePool = 2000;

// ---------------------------------------------------------------- config

using Path = std::string;

[[noreturn]] void ConfigFail(const Path& where, const std::string& msg) {
  Fail(ErrorCode::kConfig, "config " + (where.empty() ? std::string("root") : where) +
                               ": " + msg);
}

void CheckObject(const json& j, const Path& where,
                 std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) ConfigFail(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      ConfigFail(where, "unknown key '" + key + "'");
    }
  }
}

std::string Join(const Path& where, std::string_view key) {
  return where.empty() ? std::string(key) : where + "." + std::string(key);
}

void ReadCount(const json& j, const Path& where, const char* key, std::size_t& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_number_unsigned()) ConfigFail(Join(where, key), "expected a non-negative integer");
  out = v.get<std::size_t>();
}

void ReadU64(const json& j, const Path& where, const char* key, std::uint64_t& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_number_unsigned()) ConfigFail(Join(where, key), "expected a non-negative integer");
  out = v.get<std::uint64_t>();
}

void ReadReal(const json& j, const Path& where, const char* key, double& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_number()) ConfigFail(Join(where, key), "expected a number");
  out = v.get<double>();
  if (!std::isfinite(out)) ConfigFail(Join(where, key), "must be finite");
}

void ReadBool(const json& j, const Path& where, const char* key, bool& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_boolean()) ConfigFail(Join(where, key), "expected true or false");
  out = v.get<bool>();
}

void ReadString(const json& j, const Path& where, const char* key, std::string& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_string()) ConfigFail(Join(where, key), "expected a string");
  out = v.get<std::string>();
}

// Reads a string field and maps it through `choices`.
template <typename E>
void ReadEnum(const json& j, const Path& where, const char* key, E& out,
              std::initializer_list<std::pair<std::string_view, E>> choices) {
  std::string name;
  if (!j.contains(key)) return;
  ReadString(j, where, key, name);
  for (const auto& [label, value] : choices) {
    if (label == name) {
      out = value;
      return;
    }
  }
  std::string allowed;
  for (const auto& c : choices) allowed += (allowed.empty() ? "" : ", ") + std::string(c.first);
  ConfigFail(Join(where, key), "'" + name + "' is not one of " + allowed);
}

std::string_view ActivationName(Activation a) {
  return a == Activation::kReLU ? "relu" : "identity";
}
std::string_view ScopeName(ParamScope s) {
  return s == ParamScope::kAll ? "all" : "last_layer";
}

void ParseDataset(const json& j, DatasetSpec& d) {
  const Path where = "dataset";
  CheckObject(j, where,
              {"generator", "n_per_class", "test_per_class", "classes", "dim", "spread",
               "n", "test_n", "correlation", "train_csv", "test_csv"});
  ReadString(j, where, "generator", d.generator);
  ReadCount(j, where, "n_per_class", d.n_per_class);
  ReadCount(j, where, "test_per_class", d.test_per_class);
  ReadCount(j, where, "classes", d.classes);
  ReadCount(j, where, "dim", d.dim);
  ReadReal(j, where, "spread", d.spread);
  ReadCount(j, where, "n", d.n);
  ReadCount(j, where, "test_n", d.test_n);
  ReadReal(j, where, "correlation", d.correlation);
  ReadString(j, where, "train_csv", d.train_csv);
  ReadString(j, where, "test_csv", d.test_csv);
  if (d.generator == "blobs") {
    if (d.classes < 2) ConfigFail("dataset.classes", "need at least 2 classes");
    if (d.dim < 1) ConfigFail("dataset.dim", "must be at least 1");
    if (d.n_per_class < 1 || d.test_per_class < 1) {
      ConfigFail(where, "n_per_class and test_per_class must be at least 1");
    }
    if (!(d.spread >= 0.0)) ConfigFail("dataset.spread", "must be >= 0");
  } else if (d.generator == "biased") {
    if (d.n < 2 || d.test_n < 2) ConfigFail(where, "n and test_n must be at least 2");
    if (!(d.correlation >= 0.0 && d.correlation <= 1.0)) {
      ConfigFail("dataset.correlation", "must lie in [0, 1]");
    }
  } else if (d.generator == "csv") {
    if (d.train_csv.empty() || d.test_csv.empty()) {
      ConfigFail(where, "csv generator needs train_csv and test_csv");
    }
  } else {
    ConfigFail("dataset.generator", "'" + d.generator + "' is not one of blobs, biased, csv");
  }
}

ModelSpec ParseModel(const json& j, const Path& where) {
  ModelSpec m;
  CheckObject(j, where, {"name", "hidden", "activation", "epochs", "lr"});
  ReadString(j, where, "name", m.name);
  if (j.contains("hidden")) {
    const auto& h = j.at("hidden");
    if (!h.is_array()) ConfigFail(Join(where, "hidden"), "expected an array of widths");
    for (const auto& v : h) {
      if (!v.is_number_unsigned() || v.get<std::size_t>() == 0) {
        ConfigFail(Join(where, "hidden"), "widths must be positive integers");
      }
      m.hidden.push_back(v.get<std::size_t>());
    }
  }
  ReadEnum(j, where, "activation", m.activation,
           {{"relu", Activation::kReLU}, {"identity", Activation::kIdentity}});
  ReadCount(j, where, "epochs", m.epochs);
  ReadReal(j, where, "lr", m.lr);
  if (!(m.lr > 0.0)) ConfigFail(Join(where, "lr"), "must be > 0");
  return m;
}

UnlearnConfig DefaultMethod(Method method, const ModelSpec& model) {
  UnlearnConfig c;
  c.method = method;
  switch (method) {
    case Method::kRetrain:
      c.epochs = model.epochs;
      c.lr = model.lr;
      break;
    case Method::kGradientAscent:
      c.epochs = 5;
      c.lr = 0.05;
      break;
    case Method::kL1Sparse:
      c.l1_coef = 1e-3;
      break;
    default:
      break;
  }
  return c;
}

UnlearnConfig ParseMethodSpec(const json& j, const Path& where, const ModelSpec& model) {
  UnlearnConfig c;
  if (j.is_string()) {
    const auto method = ParseMethod(j.get<std::string>());
    if (!method) ConfigFail(where, "unknown method '" + j.get<std::string>() + "'");
    return DefaultMethod(*method, model);
  }
  CheckObject(j, where, {"method", "lambda_reg", "lr", "epochs", "l1_coef", "scope"});
  std::string name;
  ReadString(j, where, "method", name);
  const auto method = ParseMethod(name);
  if (!method) ConfigFail(Join(where, "method"), "unknown method '" + name + "'");
  c = DefaultMethod(*method, model);
  ReadReal(j, where, "lambda_reg", c.lambda_reg);
  ReadReal(j, where, "lr", c.lr);
  ReadCount(j, where, "epochs", c.epochs);
  ReadReal(j, where, "l1_coef", c.l1_coef);
  ReadEnum(j, where, "scope", c.scope,
           {{"all", ParamScope::kAll}, {"last_layer", ParamScope::kLastLayer}});
  if (!(c.lr > 0.0)) ConfigFail(Join(where, "lr"), "must be > 0");
  if (c.lambda_reg < 0.0 || c.l1_coef < 0.0) {
    ConfigFail(where, "lambda_reg and l1_coef must be >= 0");
  }
  return c;
}

void ParseSelection(const json& j, ExperimentConfig& c) {
  const Path where = "selection";
  CheckObject(j, where,
              {"gamma", "alpha", "beta", "inner_steps", "outer_steps", "granularity",
               "lower_init", "weight_init", "easiest", "random_masks"});
  BloConfig& b = c.selection;
  ReadReal(j, where, "gamma", b.gamma);
  ReadReal(j, where, "alpha", b.alpha);
  ReadReal(j, where, "beta", b.beta);
  ReadCount(j, where, "inner_steps", b.inner_steps);
  ReadCount(j, where, "outer_steps", b.outer_steps);
  ReadEnum(j, where, "granularity", b.granularity,
           {{"sample", Granularity::kSample}, {"class", Granularity::kClass}});
  ReadEnum(j, where, "lower_init", b.lower_init,
           {{"pretrained", LowerInit::kPretrained}, {"random", LowerInit::kRandom}});
  ReadEnum(j, where, "weight_init", b.weight_init,
           {{"uniform", WeightInit::kUniform}, {"random_binary", WeightInit::kRandomBinary}});
  ReadBool(j, where, "easiest", c.easiest);
  ReadCount(j, where, "random_masks", c.random_masks);
  if (!(b.alpha > 0.0) || !(b.beta > 0.0) || !(b.gamma >= 0.0)) {
    ConfigFail(where, "need alpha > 0, beta > 0 and gamma >= 0");
  }
}

}  // namespace

ExperimentConfig ParseConfig(const std::string& json_text, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    Fail(ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  c.base_dir = base_dir;
  CheckObject(root, "",
              {"seed", "dataset", "model", "models", "forget", "selection", "unlearn",
               "oracle", "mixture"});
  ReadU64(root, "", "seed", c.seed);
  if (root.contains("dataset")) ParseDataset(root.at("dataset"), c.dataset);

  if (root.contains("model") && root.contains("models")) {
    ConfigFail("", "give either model or models, not both");
  }
  if (root.contains("model")) c.models = {ParseModel(root.at("model"), "model")};
  if (root.contains("models")) {
    const auto& arr = root.at("models");
    if (!arr.is_array() || arr.empty()) ConfigFail("models", "expected a non-empty array");
    c.models.clear();
    for (std::size_t k = 0; k < arr.size(); ++k) {
      c.models.push_back(ParseModel(arr[k], "models[" + std::to_string(k) + "]"));
    }
  }

  if (root.contains("forget")) {
    const auto& f = root.at("forget");
    CheckObject(f, "forget", {"ratio", "m"});
    if (f.contains("ratio") && f.contains("m")) {
      ConfigFail("forget", "give either ratio or m, not both");
    }
    ReadReal(f, "forget", "ratio", c.forget_ratio);
    ReadCount(f, "forget", "m", c.forget_m);
  }
  if (c.forget_m == 0 && !(c.forget_ratio > 0.0 && c.forget_ratio <= 1.0)) {
    ConfigFail("forget.ratio", "must lie in (0, 1]");
  }

  if (root.contains("selection")) ParseSelection(root.at("selection"), c);

  if (root.contains("unlearn")) {
    const auto& u = root.at("unlearn");
    CheckObject(u, "unlearn", {"methods", "seeds"});
    ReadCount(u, "unlearn", "seeds", c.eval_seeds);
    if (u.contains("methods")) {
      const auto& arr = u.at("methods");
      if (!arr.is_array()) ConfigFail("unlearn.methods", "expected an array");
      for (std::size_t k = 0; k < arr.size(); ++k) {
        c.methods.push_back(ParseMethodSpec(
            arr[k], "unlearn.methods[" + std::to_string(k) + "]", c.models.front()));
      }
    }
  }
  if (c.methods.empty()) {
    for (Method m : {Method::kRetrain, Method::kFineTune, Method::kGradientAscent,
                     Method::kRandomLabel, Method::kL1Sparse}) {
      c.methods.push_back(DefaultMethod(m, c.models.front()));
    }
  }
  auto retrain = std::find_if(c.methods.begin(), c.methods.end(), [](const auto& m) {
    return m.method == Method::kRetrain;
  });
  if (retrain == c.methods.end()) {
    c.methods.insert(c.methods.begin(), DefaultMethod(Method::kRetrain, c.models.front()));
  } else {
    std::rotate(c.methods.begin(), retrain, retrain + 1);
  }
  if (c.eval_seeds < 1) ConfigFail("unlearn.seeds", "must be at least 1");
  if (c.random_masks < 1) ConfigFail("selection.random_masks", "must be at least 1");

  if (root.contains("oracle")) {
    const auto& o = root.at("oracle");
    CheckObject(o, "oracle", {"enabled", "force"});
    ReadBool(o, "oracle", "enabled", c.oracle);
    ReadBool(o, "oracle", "force", c.oracle_force);
  }
  if (root.contains("mixture")) {
    const auto& m = root.at("mixture");
    CheckObject(m, "mixture", {"grid", "seeds"});
    ReadCount(m, "mixture", "seeds", c.mixture_seeds);
    if (m.contains("grid")) {
      const auto& g = m.at("grid");
      if (!g.is_array() || g.empty()) ConfigFail("mixture.grid", "expected a non-empty array");
      c.mixture_grid.clear();
      for (const auto& v : g) {
        if (!v.is_number()) ConfigFail("mixture.grid", "expected numbers");
        const double p = v.get<double>();
        if (!(p >= 0.0 && p <= 1.0)) ConfigFail("mixture.grid", "entries must lie in [0, 1]");
        c.mixture_grid.push_back(p);
      }
    }
    if (c.mixture_seeds < 1) ConfigFail("mixture.seeds", "must be at least 1");
  }
  return c;
}

ExperimentConfig LoadConfig(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorCode::kFile, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ParseConfig(ss.str(), path.parent_path());
}

std::string ResolvedConfigJson(const ExperimentConfig& c) {
  ojson root;
  root["seed"] = c.seed;
  const auto& d = c.dataset;
  ojson ds;
  ds["generator"] = d.generator;
  if (d.generator == "blobs") {
    ds["n_per_class"] = d.n_per_class;
    ds["test_per_class"] = d.test_per_class;
    ds["classes"] = d.classes;
    ds["dim"] = d.dim;
    ds["spread"] = d.spread;
  } else if (d.generator == "biased") {
    ds["n"] = d.n;
    ds["test_n"] = d.test_n;
    ds["correlation"] = d.correlation;
  } else {
    ds["train_csv"] = d.train_csv;
    ds["test_csv"] = d.test_csv;
  }
  root["dataset"] = ds;
  ojson models = ojson::array();
  for (const auto& m : c.models) {
    models.push_back({{"name", m.name},
                      {"hidden", m.hidden},
                      {"activation", ActivationName(m.activation)},
                      {"epochs", m.epochs},
                      {"lr", m.lr}});
  }
  root["models"] = models;
  if (c.forget_m > 0) {
    root["forget"] = {{"m", c.forget_m}};
  } else {
    root["forget"] = {{"ratio", c.forget_ratio}};
  }
  const auto& b = c.selection;
  root["selection"] = {{"gamma", b.gamma},
                       {"alpha", b.alpha},
                       {"beta", b.beta},
                       {"inner_steps", b.inner_steps},
                       {"outer_steps", b.outer_steps},
                       {"granularity", GranularityName(b.granularity)},
                       {"lower_init", LowerInitName(b.lower_init)},
                       {"weight_init", WeightInitName(b.weight_init)},
                       {"easiest", c.easiest},
                       {"random_masks", c.random_masks}};
  ojson methods = ojson::array();
  for (const auto& m : c.methods) {
    methods.push_back({{"method", MethodName(m.method)},
                       {"lambda_reg", m.lambda_reg},
                       {"lr", m.lr},
                       {"epochs", m.epochs},
                       {"l1_coef", m.l1_coef},
                       {"scope", ScopeName(m.scope)}});
  }
  root["unlearn"] = {{"methods", methods}, {"seeds", c.eval_seeds}};
  root["oracle"] = {{"enabled", c.oracle}, {"force", c.oracle_force}};
  root["mixture"] = {{"grid", c.mixture_grid}, {"seeds", c.mixture_seeds}};
  return root.dump(2) + "\n";
}

std::size_t ForgetUnits(const ExperimentConfig& config, std::size_t units) {
  std::size_t m = config.forget_m;
  if (m == 0) {
    m = static_cast<std::size_t>(std::llround(config.forget_ratio * static_cast<double>(units)));
    m = std::max<std::size_t>(m, 1);
  }
  if (m > units) {
    Fail(ErrorCode::kConfig, "forget budget " + std::to_string(m) + " exceeds " +
                                 std::to_string(units) + " selection units");
  }
  return m;
}

ForgetMask MixtureMask(const SelectionResult& worst, double p,
                       std::span<const std::size_t> pool_order) {
  const std::size_t m = worst.mask.size();
  const auto k = static_cast<std::size_t>(std::llround(p * static_cast<double>(m)));
  std::vector<std::size_t> ranked = worst.mask.indices;
  const auto& w = worst.weights.w;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
  if (pool_order.size() < m - k) {
    Fail(ErrorCode::kBudget, "random pool too small for the mixture");
  }
  std::vector<std::size_t> picked(ranked.begin(), ranked.begin() + static_cast<long>(k));
  picked.insert(picked.end(), pool_order.begin(),
                pool_order.begin() + static_cast<long>(m - k));
  return MakeMask(std::move(picked), w.size());
}

std::string Sha1Hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha1(), nullptr) != 1) {
    Fail(ErrorCode::kFile, "SHA-1 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 15];
  }
  return out;
}

std::string GitBlobId(std::string_view content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob.push_back('\0');
  blob.append(content);
  return Sha1Hex(blob);
}

const std::vector<std::string_view>& Verbs() {
  static const std::vector<std::string_view> verbs = {
      "gen", "train", "select", "unlearn-eval", "oracle", "transfer", "coreset",
      "mixture", "report"};
  return verbs;
}

namespace {

// ---------------------------------------------------------------- output

std::string Fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", RoundReported(v));
  std::string s(buf);
  return s == "-0.00" ? "0.00" : s;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorCode::kFile, "cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(ErrorCode::kFile, "cannot write " + path.string());
  os << content;
  if (!os) Fail(ErrorCode::kFile, "failed writing " + path.string());
}

std::string JoinIndices(std::span<const std::size_t> idx, char sep) {
  std::string s;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (k) s += sep;
    s += std::to_string(idx[k]);
  }
  return s;
}

std::string MaskFileName(std::string_view kind) {
  return "mask_" + std::string(kind) + ".txt";
}

std::string RandomMaskName(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "random_%02zu", k);
  return buf;
}

struct Cell {
  bool ok = false;
  EvalReport report;
  ErrorCode code = ErrorCode::kDivergence;
  std::string error;
};

struct Summary {
  std::string method;
  std::string kind;
  std::size_t ok = 0;
  std::size_t failed = 0;
  EvalReport mean;
  EvalReport std;
  GapReport gap;
};

// ---------------------------------------------------------------- pipeline

class Pipeline {
 public:
  Pipeline(ExperimentConfig config, const RunOptions& options)
      : config_(std::move(config)), opts_(options), root_{config_.seed, 0} {
    if (opts_.out_dir.empty()) Fail(ErrorCode::kFile, "no output directory given");
    if (!fs::is_directory(opts_.out_dir)) {
      Fail(ErrorCode::kFile, "output directory " + opts_.out_dir.string() + " does not exist");
    }
    resolved_ = ResolvedConfigJson(config_);
    const fs::path echo = Out("resolved_config.json");
    reuse_ = fs::exists(echo) && ReadFile(echo) == resolved_;
    if (!reuse_) WriteFile(echo, resolved_);
  }

  fs::path Out(std::string_view name) const { return opts_.out_dir / name; }
  const ExperimentConfig& config() const { return config_; }
  const std::string& resolved() const { return resolved_; }

  void Timed(const std::string& label, const std::function<void()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    timings_[label] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  void FlushTimings(std::string_view verb) {
    ojson t;
    for (const auto& [k, v] : timings_) t[k] = v;
    WriteFile(Out("timings_" + std::string(verb) + ".json"), t.dump(2) + "\n");
  }

  // ------------------------------------------------------------ data

  const Dataset& Train() {
    EnsureData();
    return *train_;
  }
  const Dataset& Test() {
    EnsureData();
    return *test_;
  }

  void EnsureData() {
    if (train_) return;
    const fs::path train_path = Out("train.csv");
    const fs::path test_path = Out("test.csv");
    if (reuse_ && fs::exists(train_path) && fs::exists(test_path)) {
      train_ = LoadCsv(train_path);
      test_ = LoadCsv(test_path);
    } else {
      const auto& d = config_.dataset;
      if (d.generator == "blobs") {
        train_ = GenBlobs(d.n_per_class, d.classes, d.dim, d.spread, root_.Derive(kTagTrainData));
        test_ = GenBlobs(d.test_per_class, d.classes, d.dim, d.spread, root_.Derive(kTagTestData));
      } else if (d.generator == "biased") {
        train_ = GenBiased(d.n, d.correlation, root_.Derive(kTagTrainData));
        test_ = GenBiased(d.test_n, d.correlation, root_.Derive(kTagTestData));
      } else {
        train_ = LoadCsv(Resolve(d.train_csv));
        test_ = LoadCsv(Resolve(d.test_csv));
      }
      SaveCsv(*train_, train_path);
      SaveCsv(*test_, test_path);
    }
    const std::size_t classes = std::max(train_->num_classes, test_->num_classes);
    train_->num_classes = test_->num_classes = classes;
    train_->split = Split::kTrain;
    test_->split = Split::kTest;
    if (train_->dim() != test_->dim()) {
      Fail(ErrorCode::kShape, "train and test feature widths differ");
    }
  }

  fs::path Resolve(const std::string& p) const {
    fs::path path(p);
    if (path.is_relative() && !config_.base_dir.empty()) path = config_.base_dir / path;
    if (!fs::exists(path)) Fail(ErrorCode::kFile, "dataset file " + path.string() + " not found");
    return path;
  }

  // ------------------------------------------------------------ models

  static std::string ModelFile(std::size_t k) {
    return k == 0 ? "model.ckpt" : "model_" + std::to_string(k) + ".ckpt";
  }

  std::vector<std::size_t> Sizes(std::size_t k) {
    const auto& spec = config_.models.at(k);
    std::vector<std::size_t> sizes{Train().dim()};
    sizes.insert(sizes.end(), spec.hidden.begin(), spec.hidden.end());
    sizes.push_back(Train().num_classes);
    return sizes;
  }

  RngStream ModelStream(std::size_t k) const { return root_.Derive(kTagModel + k); }

  const ModelParams& Model(std::size_t k) {
    if (auto it = models_.find(k); it != models_.end()) return it->second;
    const fs::path path = Out(ModelFile(k));
    ModelParams theta;
    if (reuse_ && fs::exists(path)) {
      theta = LoadCheckpoint(path);
    } else {
      const auto& spec = config_.models.at(k);
      theta = forgeset::Train(Train(), Sizes(k), spec.epochs, spec.lr, ModelStream(k),
                              spec.activation);
      SaveCheckpoint(theta, path);
    }
    return models_.emplace(k, std::move(theta)).first->second;
  }

  // ------------------------------------------------------------ selection

  std::size_t Units() {
    return config_.selection.granularity == Granularity::kSample ? Train().size()
                                                                 : Train().num_classes;
  }
  std::size_t Budget() { return ForgetUnits(config_, Units()); }

  ForgetMask SampleMask(const ForgetMask& unit_mask) {
    if (config_.selection.granularity == Granularity::kSample) return unit_mask;
    std::vector<bool> chosen(Train().num_classes, false);
    for (std::size_t c : unit_mask.indices) chosen[c] = true;
    ForgetMask out;
    for (std::size_t i = 0; i < Train().size(); ++i) {
      if (chosen[static_cast<std::size_t>(Train().y[i])]) out.indices.push_back(i);
    }
    return out;
  }

  BloConfig SelectConfig(Direction direction) const {
    BloConfig b = config_.selection;
    b.direction = direction;
    b.rng = root_.Derive(kTagSelect + (direction == Direction::kWorst ? 0 : 1));
    return b;
  }

  std::string SelectionJson(const SelectionResult& r, Direction direction, std::size_t model) {
    const BloConfig b = SelectConfig(direction);
    ojson j;
    j["direction"] = DirectionName(direction);
    j["granularity"] = GranularityName(b.granularity);
    j["budget"] = r.weights.budget;
    j["model"] = config_.models.at(model).name;
    j["weights"] = r.weights.w;
    j["mask"] = r.mask.indices;
    j["trajectory"] = r.trajectory;
    j["config"] = {{"gamma", b.gamma},
                   {"alpha", b.alpha},
                   {"beta", b.beta},
                   {"inner_steps", b.inner_steps},
                   {"outer_steps", b.outer_steps},
                   {"lower_init", LowerInitName(b.lower_init)},
                   {"weight_init", WeightInitName(b.weight_init)},
                   {"seed", b.rng.seed},
                   {"stream", b.rng.stream_id}};
    return j.dump(2) + "\n";
  }

  static SelectionResult ParseSelectionJson(const std::string& text) {
    try {
      const json j = json::parse(text);
      SelectionResult r;
      r.weights.w = j.at("weights").get<Vector>();
      r.weights.budget = j.at("budget").get<std::size_t>();
      r.mask.indices = j.at("mask").get<std::vector<std::size_t>>();
      r.trajectory = j.at("trajectory").get<Vector>();
      return r;
    } catch (const json::exception& e) {
      Fail(ErrorCode::kParse, std::string("bad selection file: ") + e.what());
    }
  }

  const SelectionResult& Selection(Direction direction) {
    auto& slot = direction == Direction::kWorst ? worst_ : easiest_;
    if (slot) return *slot;
    const std::string kind(DirectionName(direction));
    const fs::path path = Out("selection_" + kind + ".json");
    if (reuse_ && fs::exists(path)) {
      slot = ParseSelectionJson(ReadFile(path));
    } else {
      slot = Select(Train(), Budget(), Model(0), SelectConfig(direction));
      WriteFile(path, SelectionJson(*slot, direction, 0));
      SaveMask(SampleMask(slot->mask), Out(MaskFileName(kind)));
    }
    return *slot;
  }

  void SelectBoth() {
    if (worst_ && (easiest_ || !config_.easiest)) return;
    Train();
    Model(0);
    Budget();
    if (!config_.easiest) {
      Selection(Direction::kWorst);
      return;
    }
    // The two directions are independent runs.
    ParallelFor(2, [&](std::size_t k) {
      Selection(k == 0 ? Direction::kWorst : Direction::kEasiest);
    });
  }

  ForgetMask SampleMaskOf(Direction d) { return SampleMask(Selection(d).mask); }

  // Sample-level random masks, one per random seed.
  const std::vector<ForgetMask>& RandomMasks() {
    if (random_) return *random_;
    std::vector<ForgetMask> masks(config_.random_masks);
    for (std::size_t k = 0; k < masks.size(); ++k) {
      const fs::path path = Out(MaskFileName(RandomMaskName(k)));
      if (reuse_ && fs::exists(path)) {
        masks[k] = LoadMask(path);
      } else {
        masks[k] = SampleMask(RandomMask(Units(), Budget(), root_.Derive(kTagRandomMask + k)));
        SaveMask(masks[k], path);
      }
    }
    random_ = std::move(masks);
    return *random_;
  }

  UnlearnConfig RetrainConfig(std::size_t model, std::size_t seed) const {
    const auto& spec = config_.models.at(model);
    UnlearnConfig c;
    c.method = Method::kRetrain;
    c.epochs = spec.epochs;
    c.lr = spec.lr;
    c.rng = root_.Derive(kTagEval + seed);
    return c;
  }

  double RetrainUa(std::size_t model, const ForgetMask& mask, std::size_t seed) {
    const ModelParams theta = Retrain(Model(model), Train(), mask, RetrainConfig(model, seed));
    const Dataset forget = Train().Subset(mask.indices);
    return ComputeUa(theta, forget.x, forget.y);
  }

  // ------------------------------------------------------------ verbs

  void Gen() { EnsureData(); }

  void TrainModels() {
    for (std::size_t k = 0; k < config_.models.size(); ++k) Model(k);
  }

  void SelectVerb() {
    SelectBoth();
    RandomMasks();
    WriteFile(Out("selection_summary.csv"), SelectionSummaryCsv());
    WriteFile(Out("class_entropy.csv"), ClassEntropyCsv());
  }

  std::string SelectionSummaryCsv() {
    const bool grouped = !Train().groups.empty();
    auto aligned = [&](const ForgetMask& m) {
      return grouped ? Fixed2(100.0 * AlignedFraction(Train(), m.indices)) : std::string("NA");
    };
    std::string s = "set_kind,size,objective_first,objective_last,aligned_pct\n";
    for (Direction d : {Direction::kWorst, Direction::kEasiest}) {
      if (d == Direction::kEasiest && !config_.easiest) continue;
      const auto& r = Selection(d);
      const ForgetMask mask = SampleMaskOf(d);
      s += std::string(DirectionName(d)) + "," + std::to_string(mask.size()) + "," +
           FormatDouble(r.trajectory.front()) + "," + FormatDouble(r.trajectory.back()) +
           "," + aligned(mask) + "\n";
    }
    Vector fractions;
    for (const auto& m : RandomMasks()) {
      if (grouped) fractions.push_back(100.0 * AlignedFraction(Train(), m.indices));
    }
    s += "random," + std::to_string(RandomMasks().front().size()) + ",NA,NA," +
         (grouped ? Fixed2(Mean(fractions)) : std::string("NA")) + "\n";
    if (grouped) s += "all," + std::to_string(Train().size()) + ",NA,NA," +
                      Fixed2(100.0 * AlignedFraction(Train())) + "\n";
    return s;
  }

  std::string ClassEntropyCsv() {
    const Vector h = ClassEntropy(Model(0), Train());
    std::vector<std::size_t> worst_count(Train().num_classes, 0);
    for (std::size_t i : SampleMaskOf(Direction::kWorst).indices) {
      ++worst_count[static_cast<std::size_t>(Train().y[i])];
    }
    std::string s = "class,entropy,worst_count\n";
    for (std::size_t c = 0; c < h.size(); ++c) {
      s += std::to_string(c) + "," + FormatDouble(h[c]) + "," +
           std::to_string(worst_count[c]) + "\n";
    }
    return s;
  }

  void Oracle() {
    if (config_.selection.granularity != Granularity::kSample) {
      Fail(ErrorCode::kConfig, "the oracle enumerates sample subsets; use sample granularity");
    }
    const ForgetMask blo = SampleMaskOf(Direction::kWorst);
    const auto ranking = EnumerateWorst(Model(0), Train(), blo.size(), RetrainConfig(0, 0),
                                        opts_.force_guard || config_.oracle_force);
    SaveSubsetScores(ranking, Out("oracle.csv"));
    const double ua = RetrainUa(0, blo, 0);
    std::size_t at_or_below = 0;
    for (const auto& s : ranking) at_or_below += s.ua <= ua;
    const double below = FractionStrictlyBelow(ranking, ua);
    std::string s = "subsets,blo_mask,blo_ua,fraction_below,fraction_at_or_below\n";
    s += std::to_string(ranking.size()) + "," + JoinIndices(blo.indices, ';') + "," +
         Fixed2(ua) + "," + FormatDouble(below) + "," +
         FormatDouble(static_cast<double>(at_or_below) / static_cast<double>(ranking.size())) +
         "\n";
    WriteFile(Out("oracle_summary.csv"), s);
  }

  std::vector<std::pair<std::string, ForgetMask>> EvalMaskKinds() {
    std::vector<std::pair<std::string, ForgetMask>> kinds;
    kinds.emplace_back("worst", SampleMaskOf(Direction::kWorst));
    kinds.emplace_back("random", ForgetMask{});
    if (config_.easiest) kinds.emplace_back("easiest", SampleMaskOf(Direction::kEasiest));
    return kinds;
  }

  void UnlearnEval() {
    SelectBoth();
    RandomMasks();
    const ModelParams& theta_o = Model(0);
    const auto kinds = EvalMaskKinds();
    const auto& methods = config_.methods;
    const std::size_t seeds = config_.eval_seeds;
    const std::size_t cells = kinds.size() * methods.size() * seeds;
    std::vector<Cell> results(cells);
    ParallelFor(cells, [&](std::size_t c) {
      const std::size_t e = c % seeds;
      const std::size_t j = (c / seeds) % methods.size();
      const std::size_t k = c / (seeds * methods.size());
      const ForgetMask& mask = kinds[k].first == "random"
                                   ? random_->at(e % random_->size())
                                   : kinds[k].second;
      UnlearnConfig cfg = methods[j];
      cfg.rng = root_.Derive(kTagEval + e);
      try {
        const ModelParams theta_u = Unlearn(theta_o, *train_, mask, cfg);
        results[c].report = Evaluate(theta_u, *train_, mask, *test_);
        results[c].ok = true;
      } catch (const Error& err) {
        results[c].code = err.code();
        results[c].error = err.what();
      }
    });

    std::string raw = "method,set_kind,seed,status,ua,mia,ra,ta\n";
    std::vector<Summary> summaries;
    std::optional<std::string> first_error;
    ErrorCode first_code = ErrorCode::kDivergence;
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      EvalReport reference;
      for (std::size_t j = 0; j < methods.size(); ++j) {
        Summary s;
        s.method = MethodName(methods[j].method);
        s.kind = kinds[k].first;
        Vector ua, mia, ra, ta;
        for (std::size_t e = 0; e < seeds; ++e) {
          const Cell& cell = results[(k * methods.size() + j) * seeds + e];
          raw += s.method + "," + s.kind + "," + std::to_string(e) + ",";
          if (!cell.ok) {
            raw += "FAILED,,,,\n";
            ++s.failed;
            if (!first_error) {
              first_error = s.method + "/" + s.kind + " seed " + std::to_string(e) + ": " +
                            cell.error;
              first_code = cell.code;
            }
            continue;
          }
          ++s.ok;
          const auto& r = cell.report;
          raw += "ok," + FormatDouble(r.ua) + "," + FormatDouble(r.mia) + "," +
                 FormatDouble(r.ra) + "," + FormatDouble(r.ta) + "\n";
          ua.push_back(r.ua);
          mia.push_back(r.mia);
          ra.push_back(r.ra);
          ta.push_back(r.ta);
        }
        if (s.ok > 0) {
          s.mean = {Mean(ua), Mean(mia), Mean(ra), Mean(ta)};
          s.std = {StdDev(ua), StdDev(mia), StdDev(ra), StdDev(ta)};
        }
        if (j == 0) reference = s.mean;
        s.gap = AvgGap(s.mean, reference);
        summaries.push_back(s);
      }
    }

    std::string csv =
        "method,set_kind,ua,mia,ra,ta,avg_gap,ua_std,mia_std,ra_std,ta_std,"
        "ua_gap,mia_gap,ra_gap,ta_gap,seeds_ok,seeds_failed\n";
    for (const auto& s : summaries) {
      csv += s.method + "," + s.kind + ",";
      if (s.ok == 0) {
        csv += "FAILED,FAILED,FAILED,FAILED,FAILED,,,,,,,,,";
      } else {
        for (double v : {s.mean.ua, s.mean.mia, s.mean.ra, s.mean.ta, s.gap.avg_gap,
                         s.std.ua, s.std.mia, s.std.ra, s.std.ta, s.gap.ua, s.gap.mia,
                         s.gap.ra, s.gap.ta}) {
          csv += Fixed2(v) + ",";
        }
      }
      csv += std::to_string(s.ok) + "," + std::to_string(s.failed) + "\n";
    }
    WriteFile(Out("eval_raw.csv"), raw);
    WriteFile(Out("eval_summary.csv"), csv);
    eval_table_ = EvalTable(summaries);
    WriteFile(Out("eval_table.md"), eval_table_);
    WriteFile(Out("run_record.json"), RunRecord(summaries));
    if (first_error) Fail(first_code, "unlearning cell failed: " + *first_error);
  }

  static std::string EvalTable(const std::vector<Summary>& summaries) {
    std::string md;
    std::string kind;
    for (const auto& s : summaries) {
      if (s.kind != kind) {
        kind = s.kind;
        md += (md.empty() ? "" : "\n");
        md += "### " + kind + " forget set\n\n";
        md += "| Method | UA | MIA | RA | TA | Avg. Gap |\n";
        md += "|---|---|---|---|---|---|\n";
      }
      if (s.ok == 0) {
        md += "| " + s.method + " | FAILED | FAILED | FAILED | FAILED | FAILED |\n";
        continue;
      }
      auto cell = [](double mean, double sd, double gap) {
        return Fixed2(mean) + "±" + Fixed2(sd) + " (" + Fixed2(gap) + ")";
      };
      md += "| " + s.method + " | " + cell(s.mean.ua, s.std.ua, s.gap.ua) + " | " +
            cell(s.mean.mia, s.std.mia, s.gap.mia) + " | " +
            cell(s.mean.ra, s.std.ra, s.gap.ra) + " | " +
            cell(s.mean.ta, s.std.ta, s.gap.ta) + " | " + Fixed2(s.gap.avg_gap) + " |\n";
    }
    return md;
  }

  std::string RunRecord(const std::vector<Summary>& summaries) {
    ojson j;
    j["schema"] = 1;
    j["config_sha1"] = Sha1Hex(resolved_);
    ojson inputs;
    std::string digest_input;
    std::vector<std::string> names = {"train.csv", "test.csv", ModelFile(0),
                                      MaskFileName("worst")};
    if (config_.easiest) names.push_back(MaskFileName("easiest"));
    for (std::size_t k = 0; k < config_.random_masks; ++k) {
      names.push_back(MaskFileName(RandomMaskName(k)));
    }
    for (const auto& name : names) {
      const std::string id = GitBlobId(ReadFile(Out(name)));
      inputs[name] = id;
      digest_input += id + " " + name + "\n";
    }
    j["inputs"] = inputs;
    j["input_digest"] = Sha1Hex(digest_input);
    ojson rows = ojson::array();
    for (const auto& s : summaries) {
      ojson r;
      r["method"] = s.method;
      r["set_kind"] = s.kind;
      r["seeds_ok"] = s.ok;
      r["seeds_failed"] = s.failed;
      if (s.ok > 0) {
        r["mean"] = {{"ua", s.mean.ua}, {"mia", s.mean.mia}, {"ra", s.mean.ra}, {"ta", s.mean.ta}};
        r["std"] = {{"ua", s.std.ua}, {"mia", s.std.mia}, {"ra", s.std.ra}, {"ta", s.std.ta}};
        r["gap"] = {{"ua", s.gap.ua},
                    {"mia", s.gap.mia},
                    {"ra", s.gap.ra},
                    {"ta", s.gap.ta},
                    {"avg_gap", s.gap.avg_gap}};
      }
      rows.push_back(r);
    }
    j["results"] = rows;
    return j.dump(2) + "\n";
  }

  void Transfer() {
    const std::size_t n_models = config_.models.size();
    if (n_models < 2) Fail(ErrorCode::kConfig, "transfer needs at least 2 models");
    if (config_.selection.granularity != Granularity::kSample) {
      Fail(ErrorCode::kConfig, "transfer runs at sample granularity");
    }
    Train();
    for (std::size_t k = 0; k < n_models; ++k) Model(k);
    std::vector<ForgetMask> masks(n_models);
    masks[0] = SampleMaskOf(Direction::kWorst);
    RandomMasks();
    ParallelFor(n_models - 1, [&](std::size_t a) {
      masks[a + 1] = Select(*train_, Budget(), models_.at(a + 1),
                            SelectConfig(Direction::kWorst)).mask;
    });
    const std::size_t rows = n_models + 1;
    const std::size_t randoms = random_->size();
    // Row n_models holds the random baseline, averaged over the random masks.
    std::vector<double> ua(rows * n_models, 0.0);
    std::vector<double> random_ua(randoms * n_models, 0.0);
    ParallelFor(n_models * n_models + randoms * n_models, [&](std::size_t c) {
      if (c < n_models * n_models) {
        const std::size_t a = c / n_models;
        const std::size_t b = c % n_models;
        ua[a * n_models + b] = RetrainUaCached(b, masks[a], 0);
      } else {
        const std::size_t r = (c - n_models * n_models) / n_models;
        const std::size_t b = (c - n_models * n_models) % n_models;
        random_ua[r * n_models + b] = RetrainUaCached(b, random_->at(r), 0);
      }
    });
    for (std::size_t b = 0; b < n_models; ++b) {
      Vector col;
      for (std::size_t r = 0; r < randoms; ++r) col.push_back(random_ua[r * n_models + b]);
      ua[n_models * n_models + b] = Mean(col);
    }
    std::string s = "source,target,ua\n";
    for (std::size_t a = 0; a < rows; ++a) {
      for (std::size_t b = 0; b < n_models; ++b) {
        s += (a < n_models ? config_.models[a].name : std::string("random")) + "," +
             config_.models[b].name + "," + Fixed2(ua[a * n_models + b]) + "\n";
      }
    }
    WriteFile(Out("transfer.csv"), s);
    std::string md = "| Source \\ Target |";
    for (const auto& m : config_.models) md += " " + m.name + " |";
    md += "\n|---|";
    for (std::size_t b = 0; b < n_models; ++b) md += "---|";
    md += "\n";
    for (std::size_t a = 0; a < rows; ++a) {
      md += "| " + (a < n_models ? config_.models[a].name : std::string("random")) + " |";
      for (std::size_t b = 0; b < n_models; ++b) md += " " + Fixed2(ua[a * n_models + b]) + " |";
      md += "\n";
    }
    transfer_table_ = md;
    WriteFile(Out("transfer.md"), md);
  }

  // Only touches models already loaded, so it is safe inside ParallelFor.
  double RetrainUaCached(std::size_t model, const ForgetMask& mask, std::size_t seed) {
    const ModelParams theta =
        Retrain(models_.at(model), *train_, mask, RetrainConfig(model, seed));
    const Dataset forget = train_->Subset(mask.indices);
    return ComputeUa(theta, forget.x, forget.y);
  }

  void Coreset() {
    const ForgetMask worst = SampleMaskOf(Direction::kWorst);
    RandomMasks();
    const ModelParams& theta_o = Model(0);
    const auto& spec = config_.models.front();
    const auto sizes = Sizes(0);
    const std::size_t randoms = random_->size();
    Vector ta(randoms + 2, 0.0);
    ParallelFor(randoms + 2, [&](std::size_t c) {
      if (c == 0) {
        ta[c] = Accuracy(theta_o, test_->x, test_->y);
        return;
      }
      const ForgetMask& mask = c == 1 ? worst : random_->at(c - 2);
      const Dataset keep = train_->Subset(Complement(mask, train_->size()));
      const ModelParams theta =
          forgeset::Train(keep, sizes, spec.epochs, spec.lr, ModelStream(0), spec.activation);
      ta[c] = Accuracy(theta, test_->x, test_->y);
    });
    const Vector random_ta(ta.begin() + 2, ta.end());
    std::string s = "subset,train_size,ta,ta_std\n";
    s += "full," + std::to_string(train_->size()) + "," + Fixed2(ta[0]) + ",0.00\n";
    s += "worst_complement," + std::to_string(train_->size() - worst.size()) + "," +
         Fixed2(ta[1]) + ",0.00\n";
    s += "random_complement," + std::to_string(train_->size() - random_->front().size()) +
         "," + Fixed2(Mean(random_ta)) + "," + Fixed2(StdDev(random_ta)) + "\n";
    WriteFile(Out("coreset.csv"), s);
  }

  void Mixture() {
    const SelectionResult& worst = Selection(Direction::kWorst);
    Model(0);
    const std::size_t units = Units();
    const auto pool = Complement(worst.mask, units);
    const auto& grid = config_.mixture_grid;
    const std::size_t seeds = config_.mixture_seeds;
    std::vector<std::vector<std::size_t>> orders(seeds);
    for (std::size_t s = 0; s < seeds; ++s) {
      Rng rng(root_.Derive(kTagMixturePool + s));
      const auto perm = rng.Permutation(pool.size());
      for (std::size_t i : perm) orders[s].push_back(pool[i]);
    }
    Vector ua(grid.size() * seeds, 0.0);
    ParallelFor(grid.size() * seeds, [&](std::size_t c) {
      const std::size_t g = c / seeds;
      const std::size_t s = c % seeds;
      const ForgetMask mask = SampleMaskUnlocked(MixtureMask(worst, grid[g], orders[s]));
      ua[c] = RetrainUaCached(0, mask, s);
    });
    std::string out = "p,worst_units,ua,ua_std\n";
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const Vector col(ua.begin() + static_cast<long>(g * seeds),
                       ua.begin() + static_cast<long>((g + 1) * seeds));
      const auto k = std::llround(grid[g] * static_cast<double>(worst.mask.size()));
      out += FormatDouble(grid[g]) + "," + std::to_string(k) + "," + Fixed2(Mean(col)) + "," +
             Fixed2(StdDev(col)) + "\n";
    }
    WriteFile(Out("mixture.csv"), out);
  }

  // SampleMask without lazy loading; the training set must already be loaded.
  ForgetMask SampleMaskUnlocked(const ForgetMask& unit_mask) const {
    if (config_.selection.granularity == Granularity::kSample) return unit_mask;
    ForgetMask out;
    for (std::size_t i = 0; i < train_->size(); ++i) {
      const auto c = static_cast<std::size_t>(train_->y[i]);
      if (std::binary_search(unit_mask.indices.begin(), unit_mask.indices.end(), c)) {
        out.indices.push_back(i);
      }
    }
    return out;
  }

  void Report() {
    Timed("select", [&] { SelectVerb(); });
    Timed("unlearn-eval", [&] { UnlearnEval(); });
    Timed("coreset", [&] { Coreset(); });
    Timed("mixture", [&] { Mixture(); });
    if (config_.models.size() >= 2) Timed("transfer", [&] { Transfer(); });
    if (config_.oracle) Timed("oracle", [&] { Oracle(); });

    std::string md = "# forgeset report\n\n";
    md += "- config sha1: `" + Sha1Hex(resolved_) + "`\n";
    md += "- training samples: " + std::to_string(Train().size()) + ", test samples: " +
          std::to_string(Test().size()) + ", classes: " + std::to_string(Train().num_classes) +
          "\n";
    md += "- forget budget: " + std::to_string(Budget()) + " " +
          std::string(GranularityName(config_.selection.granularity)) + " units\n\n";
    md += "## Selection\n\n" + CsvToMarkdown(ReadFile(Out("selection_summary.csv"))) + "\n";
    md += "## Unlearning\n\nCells read mean±std (gap to Retrain on the same set kind).\n\n" +
          eval_table_ + "\n";
    md += "## Coreset\n\n" + CsvToMarkdown(ReadFile(Out("coreset.csv"))) + "\n";
    md += "## Mixture\n\n" + CsvToMarkdown(ReadFile(Out("mixture.csv"))) + "\n";
    if (!transfer_table_.empty()) md += "## Transfer (Retrain UA)\n\n" + transfer_table_ + "\n";
    if (config_.oracle) {
      md += "## Oracle\n\n" + CsvToMarkdown(ReadFile(Out("oracle_summary.csv"))) + "\n";
    }
    md += "## Class entropy\n\n" + CsvToMarkdown(ReadFile(Out("class_entropy.csv")));
    WriteFile(Out("report.md"), md);
  }

  static std::string CsvToMarkdown(const std::string& csv) {
    std::istringstream is(csv);
    std::string line;
    std::string md;
    bool header = true;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::string row = "|";
      std::size_t cols = 0;
      std::size_t start = 0;
      while (true) {
        const std::size_t comma = line.find(',', start);
        row += " " + line.substr(start, comma - start) + " |";
        ++cols;
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      md += row + "\n";
      if (header) {
        md += "|";
        for (std::size_t c = 0; c < cols; ++c) md += "---|";
        md += "\n";
        header = false;
      }
    }
    return md;
  }

 private:
  ExperimentConfig config_;
  RunOptions opts_;
  RngStream root_;
  std::string resolved_;
  bool reuse_ = false;
  std::optional<Dataset> train_;
  std::optional<Dataset> test_;
  std::map<std::size_t, ModelParams> models_;
  std::optional<SelectionResult> worst_;
  std::optional<SelectionResult> easiest_;
  std::optional<std::vector<ForgetMask>> random_;
  std::string eval_table_;
  std::string transfer_table_;
  std::map<std::string, double> timings_;
};

}  // namespace

void RunVerb(std::string_view verb, ExperimentConfig config, const RunOptions& options) {
  if (options.seed) config.seed = *options.seed;
  const auto& verbs = Verbs();
  if (std::find(verbs.begin(), verbs.end(), verb) == verbs.end()) {
    Fail(ErrorCode::kConfig, "unknown verb '" + std::string(verb) + "'");
  }
  Pipeline p(std::move(config), options);
  const std::string label(verb);
  if (verb == "gen") {
    p.Timed(label, [&] { p.Gen(); });
  } else if (verb == "train") {
    p.Timed(label, [&] { p.TrainModels(); });
  } else if (verb == "select") {
    p.Timed(label, [&] { p.SelectVerb(); });
  } else if (verb == "oracle") {
    p.Timed(label, [&] { p.Oracle(); });
  } else if (verb == "unlearn-eval") {
    p.Timed(label, [&] { p.UnlearnEval(); });
  } else if (verb == "transfer") {
    p.Timed(label, [&] { p.Transfer(); });
  } else if (verb == "coreset") {
    p.Timed(label, [&] { p.Coreset(); });
  } else if (verb == "mixture") {
    p.Timed(label, [&] { p.Mixture(); });
  } else {
    p.Report();
  }
  p.FlushTimings(verb);
}

}  // namespace forgeset::harness
