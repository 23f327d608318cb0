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

#include "forgeset/models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "forgeset/error.hpp"

namespace forgeset {

std::vector<std::size_t> ModelParams::LayerSizes() const {
  std::vector<std::size_t> sizes;
  if (layers.empty()) return sizes;
  sizes.push_back(layers.front().weight.rows());
  for (const auto& layer : layers) sizes.push_back(layer.weight.cols());
  return sizes;
}

std::size_t ModelParams::ParameterCount() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.weight.size() + layer.bias.size();
  return n;
}

void ModelParams::Validate() const {
  if (layers.empty()) Fail(ErrorCode::kBadSpec, "model has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Layer& layer = layers[l];
    if (layer.weight.rows() == 0 || layer.weight.cols() == 0) {
      Fail(ErrorCode::kBadSpec, "layer " + std::to_string(l) + " has a zero dimension");
    }
    if (layer.bias.size() != layer.weight.cols()) {
      Fail(ErrorCode::kBadSpec, "layer " + std::to_string(l) + " bias width mismatch");
    }
    if (l > 0 && layers[l - 1].weight.cols() != layer.weight.rows()) {
      Fail(ErrorCode::kBadSpec, "layer " + std::to_string(l) +
                                    " input width does not chain with layer " +
                                    std::to_string(l - 1));
    }
    if (!layer.weight.AllFinite() ||
        !std::all_of(layer.bias.begin(), layer.bias.end(),
                     [](double v) { return std::isfinite(v); })) {
      Fail(ErrorCode::kBadSpec, "layer " + std::to_string(l) + " has non-finite entries");
    }
  }
}

ModelParams ZerosLike(const ModelParams& like) {
  ModelParams out;
  out.activation = like.activation;
  out.layers.reserve(like.layers.size());
  for (const auto& layer : like.layers) {
    out.layers.push_back({Matrix(layer.weight.rows(), layer.weight.cols()),
                          Vector(layer.bias.size(), 0.0)});
  }
  return out;
}

void AddScaled(ModelParams& params, const ModelParams& delta, double scale) {
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& w = params.layers[l].weight.data();
    const auto& dw = delta.layers[l].weight.data();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += scale * dw[i];
    auto& b = params.layers[l].bias;
    const auto& db = delta.layers[l].bias;
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += scale * db[i];
  }
}

double L1Norm(const ModelParams& params) {
  double s = 0.0;
  for (const auto& layer : params.layers) {
    for (double v : layer.weight.data()) s += std::abs(v);
    for (double v : layer.bias) s += std::abs(v);
  }
  return s;
}

double GlorotBound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

ModelParams InitParams(std::span<const std::size_t> sizes, RngStream rng,
                       Activation activation) {
  if (sizes.size() < 2) {
    Fail(ErrorCode::kBadSpec, "layer spec needs at least input and output sizes");
  }
  for (std::size_t s : sizes) {
    if (s == 0) Fail(ErrorCode::kBadSpec, "layer sizes must be positive");
  }
  Rng gen(rng);
  ModelParams params;
  params.activation = activation;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double bound = GlorotBound(sizes[l], sizes[l + 1]);
    Layer layer{Matrix(sizes[l], sizes[l + 1]), Vector(sizes[l + 1], 0.0)};
    for (double& v : layer.weight.data()) v = gen.Uniform(-bound, bound);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

namespace {

void CheckInput(const ModelParams& params, const Matrix& x) {
  if (params.layers.empty()) Fail(ErrorCode::kBadSpec, "model has no layers");
  if (x.cols() != params.input_width()) {
    Fail(ErrorCode::kShape, "input has " + std::to_string(x.cols()) +
                                " features, model expects " +
                                std::to_string(params.input_width()));
  }
}

void AddBias(Matrix& z, const Vector& bias) {
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto row = z.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += bias[j];
  }
}

void Activate(Matrix& z, Activation act) {
  if (act == Activation::kReLU) {
    for (double& v : z.data()) v = v > 0.0 ? v : 0.0;
  }
}

// Pre-activations of every layer; the last entry holds the logits.
std::vector<Matrix> ForwardTrace(const ModelParams& params, const Matrix& x) {
  CheckInput(params, x);
  std::vector<Matrix> pre;
  pre.reserve(params.layers.size());
  const Matrix* input = &x;
  Matrix activated;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    Matrix z = MatMul(*input, params.layers[l].weight);
    AddBias(z, params.layers[l].bias);
    pre.push_back(std::move(z));
    if (l + 1 < params.layers.size()) {
      activated = pre.back();
      Activate(activated, params.activation);
      input = &activated;
    }
  }
  return pre;
}

void CheckLabels(std::span<const int> y, std::size_t rows, std::size_t classes) {
  if (y.size() != rows) {
    Fail(ErrorCode::kShape, "label count " + std::to_string(y.size()) +
                                " does not match " + std::to_string(rows) + " rows");
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0 || static_cast<std::size_t>(y[i]) >= classes) {
      Fail(ErrorCode::kLabelOutOfRange, "label " + std::to_string(y[i]) + " at row " +
                                            std::to_string(i) + " outside [0, " +
                                            std::to_string(classes) + ")");
    }
  }
}

double LogSumExp(std::span<const double> row) {
  const double mx = *std::max_element(row.begin(), row.end());
  double s = 0.0;
  for (double v : row) s += std::exp(v - mx);
  return mx + std::log(s);
}

}  // namespace

Matrix Forward(const ModelParams& params, const Matrix& x) {
  auto pre = ForwardTrace(params, x);
  return std::move(pre.back());
}

Matrix Softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto in = logits.row(i);
    auto o = out.row(i);
    const double mx = *std::max_element(in.begin(), in.end());
    double s = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      o[j] = std::exp(in[j] - mx);
      s += o[j];
    }
    for (double& v : o) v /= s;
  }
  return out;
}

Vector PerSampleLoss(const ModelParams& params, const Matrix& x,
                     std::span<const int> y) {
  const Matrix logits = Forward(params, x);
  CheckLabels(y, x.rows(), params.num_classes());
  Vector out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = logits.row(i);
    out[i] = LogSumExp(row) - row[static_cast<std::size_t>(y[i])];
  }
  return out;
}

LossAndGrad ComputeLossAndGrad(const ModelParams& params, const Matrix& x,
                               std::span<const int> y,
                               std::optional<std::span<const double>> weights,
                               ParamScope scope) {
  std::vector<Matrix> pre = ForwardTrace(params, x);
  const std::size_t n = x.rows();
  const std::size_t classes = params.num_classes();
  CheckLabels(y, n, classes);
  if (weights && weights->size() != n) {
    Fail(ErrorCode::kShape, "weight count " + std::to_string(weights->size()) +
                                " does not match " + std::to_string(n) + " rows");
  }
  if (n == 0) Fail(ErrorCode::kEmptyBatch, "loss over an empty batch");

  LossAndGrad out;
  out.grad = ZerosLike(params);
  out.loss.per_sample.resize(n);
  const double inv_n = 1.0 / static_cast<double>(n);

  // dL/dlogits = weight_i * (softmax - onehot) / n
  Matrix delta = Softmax(pre.back());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto logits = pre.back().row(i);
    const auto label = static_cast<std::size_t>(y[i]);
    const double ce = LogSumExp(logits) - logits[label];
    const double wi = weights ? (*weights)[i] : 1.0;
    out.loss.per_sample[i] = wi * ce;
    total += wi * ce;
    auto d = delta.row(i);
    d[label] -= 1.0;
    for (double& v : d) v *= wi * inv_n;
  }
  out.loss.total = total * inv_n;

  const std::size_t last = params.layers.size() - 1;
  const std::size_t stop = scope == ParamScope::kLastLayer ? last : 0;
  for (std::size_t l = last + 1; l-- > stop;) {
    Matrix input;
    if (l == 0) {
      input = x;
    } else {
      input = pre[l - 1];
      Activate(input, params.activation);
    }
    out.grad.layers[l].weight = MatMulTransA(input, delta);
    auto& gb = out.grad.layers[l].bias;
    for (std::size_t i = 0; i < n; ++i) {
      const auto d = delta.row(i);
      for (std::size_t j = 0; j < gb.size(); ++j) gb[j] += d[j];
    }
    if (l == stop) break;
    Matrix upstream = MatMulTransB(delta, params.layers[l].weight);
    if (params.activation == Activation::kReLU) {
      const Matrix& z = pre[l - 1];
      for (std::size_t k = 0; k < upstream.size(); ++k) {
        if (!(z.data()[k] > 0.0)) upstream.data()[k] = 0.0;
      }
    }
    delta = std::move(upstream);
  }
  return out;
}

std::vector<int> Predict(const ModelParams& params, const Matrix& x) {
  const Matrix logits = Forward(params, x);
  std::vector<int> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = logits.row(i);
    // max_element returns the first maximum, i.e. the lowest class index.
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

std::string CheckpointToString(const ModelParams& params) {
  params.Validate();
  std::ostringstream os;
  os << "forgeset-model 1\n";
  os << "activation "
     << (params.activation == Activation::kReLU ? "relu" : "identity") << "\n";
  os << "layers " << params.layers.size() << "\n";
  for (const auto& layer : params.layers) {
    os << "layer " << layer.weight.rows() << " " << layer.weight.cols() << "\n";
    for (std::size_t r = 0; r < layer.weight.rows(); ++r) {
      const auto row = layer.weight.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) {
        os << (c ? " " : "") << FormatDouble(row[c]);
      }
      os << "\n";
    }
    for (std::size_t c = 0; c < layer.bias.size(); ++c) {
      os << (c ? " " : "") << FormatDouble(layer.bias[c]);
    }
    os << "\n";
  }
  return os.str();
}

namespace {

class TokenReader {
 public:
  explicit TokenReader(const std::string& text) : is_(text) {}

  std::string Word(const char* what) {
    std::string tok;
    if (!(is_ >> tok)) Fail(ErrorCode::kParse, std::string("checkpoint: missing ") + what);
    return tok;
  }

  void Expect(const std::string& literal) {
    const std::string tok = Word(literal.c_str());
    if (tok != literal) {
      Fail(ErrorCode::kParse, "checkpoint: expected '" + literal + "', got '" + tok + "'");
    }
  }

  std::size_t Count(const char* what) {
    const std::string tok = Word(what);
    std::size_t v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
      Fail(ErrorCode::kParse, std::string("checkpoint: bad ") + what + " '" + tok + "'");
    }
    return v;
  }

  double Number() {
    const std::string tok = Word("value");
    const auto v = ParseDouble(tok);
    if (!v) Fail(ErrorCode::kParse, "checkpoint: bad value '" + tok + "'");
    return *v;
  }

  bool AtEnd() {
    std::string tok;
    return !(is_ >> tok);
  }

 private:
  std::istringstream is_;
};

}  // namespace

ModelParams CheckpointFromString(const std::string& text) {
  TokenReader in(text);
  in.Expect("forgeset-model");
  in.Expect("1");
  in.Expect("activation");
  ModelParams params;
  const std::string act = in.Word("activation");
  if (act == "relu") {
    params.activation = Activation::kReLU;
  } else if (act == "identity") {
    params.activation = Activation::kIdentity;
  } else {
    Fail(ErrorCode::kParse, "checkpoint: unknown activation '" + act + "'");
  }
  in.Expect("layers");
  const std::size_t num_layers = in.Count("layer count");
  for (std::size_t l = 0; l < num_layers; ++l) {
    in.Expect("layer");
    const std::size_t rows = in.Count("fan_in");
    const std::size_t cols = in.Count("fan_out");
    Layer layer{Matrix(rows, cols), Vector(cols)};
    for (double& v : layer.weight.data()) v = in.Number();
    for (double& v : layer.bias) v = in.Number();
    params.layers.push_back(std::move(layer));
  }
  if (!in.AtEnd()) Fail(ErrorCode::kParse, "checkpoint: trailing data");
  params.Validate();
  return params;
}

void SaveCheckpoint(const ModelParams& params, const std::filesystem::path& path) {
  const std::string text = CheckpointToString(params);
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(ErrorCode::kFile, "cannot write checkpoint " + path.string());
  os << text;
  if (!os) Fail(ErrorCode::kFile, "failed writing checkpoint " + path.string());
}

ModelParams LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorCode::kFile, "cannot read checkpoint " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return CheckpointFromString(buf.str());
}

}  // namespace forgeset
