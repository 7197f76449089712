// Copyright 2026 The Cryptonet Authors
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

#include "cryptonet/train.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cryptonet/encode.h"
#include "cryptonet/infer.h"

namespace cryptonet {

namespace {

bool parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    if (first == std::string::npos) return false;
    cell = cell.substr(first, cell.find_last_not_of(" \t\r") - first + 1);
    size_t used = 0;
    try {
      out.push_back(std::stod(cell, &used));
    } catch (const std::exception&) {
      return false;
    }
    if (used != cell.size() || !std::isfinite(out.back())) return false;
  }
  return !out.empty();
}

struct Trace {
  std::vector<std::vector<double>> z;  // pre-activations per layer
  std::vector<std::vector<double>> a;  // a[0] = x, a[l+1] = layer l output
};

double act_value(const Activation& act, double z, ActivationMode mode) {
  return mode == ActivationMode::kPolynomial ? act.eval(z) : act.eval_exact(z);
}

double act_slope(const Activation& act, double z, ActivationMode mode) {
  return mode == ActivationMode::kPolynomial ? act.derivative(z) : act.derivative_exact(z);
}

Trace run(const PolyNetwork& net, const std::vector<double>& x, ActivationMode mode) {
  if (x.size() != net.input_dim) throw ValidationError("sample width does not match the network");
  Trace tr;
  tr.a.push_back(x);
  for (const Layer& layer : net.layers) {
    std::vector<double> z(layer.out_dim()), a(layer.out_dim());
    for (size_t i = 0; i < layer.out_dim(); ++i) {
      z[i] = layer.bias[i];
      for (size_t j = 0; j < layer.in_dim(); ++j) z[i] += layer.weights[i][j] * tr.a.back()[j];
      a[i] = act_value(layer.activation, z[i], mode);
    }
    tr.z.push_back(std::move(z));
    tr.a.push_back(std::move(a));
  }
  return tr;
}

void check_trainable(const PolyNetwork& net, const Dataset& data, ActivationMode mode) {
  if (data.size() == 0) throw ValidationError("training set is empty");
  if (data.output_dim() != net.output_dim()) {
    throw ValidationError("target width does not match the network output");
  }
  if (mode == ActivationMode::kPolynomial) {
    for (const Layer& layer : net.layers) {
      if (!layer.activation.is_polynomial()) {
        throw ValidationError("backpropagation needs polynomial activations");
      }
    }
  }
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, size_t input_dim, size_t output_dim) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Dataset data;
  std::string line;
  std::vector<double> row;
  for (size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!parse_row(line, row)) {
      if (line_no == 1) continue;  // header
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": not numeric");
    }
    Sample s;
    s.x.assign(row.begin(), row.begin() + std::min(row.size(), input_dim));
    if (row.size() == input_dim + output_dim) {
      s.y.assign(row.begin() + input_dim, row.end());
    } else if (row.size() == input_dim + 1 && output_dim > 1) {
      const double label = row.back();
      if (label != std::floor(label) || label < 0 || label >= static_cast<double>(output_dim)) {
        throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                              ": class label out of range");
      }
      s.y.assign(output_dim, 0.0);
      s.y[static_cast<size_t>(label)] = 1.0;
    } else {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(input_dim + output_dim) + " columns");
    }
    data.samples.push_back(std::move(s));
  }
  if (data.size() == 0) throw ValidationError(path.string() + ": no samples");
  return data;
}

void save_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  for (const Sample& s : data.samples) {
    for (size_t i = 0; i < s.x.size(); ++i) out << (i ? "," : "") << s.x[i];
    for (double y : s.y) out << ',' << y;
    out << '\n';
  }
}

Dataset make_blobs(size_t samples, uint64_t seed) {
  Prng rng(seed);
  Dataset data;
  for (size_t k = 0; k < samples; ++k) {
    const size_t label = k % 2;
    const double center = label == 0 ? -1.0 : 1.0;
    Sample s;
    s.x = {rng.normal(center, 0.6), rng.normal(center, 0.6)};
    s.y = {label == 0 ? 1.0 : 0.0, label == 1 ? 1.0 : 0.0};
    data.samples.push_back(std::move(s));
  }
  return data;
}

Dataset demo_train_set() { return make_blobs(200, 11); }

Dataset demo_test_set() { return make_blobs(100, 12); }

PolyNetwork demo_mlp_untrained(uint64_t seed) {
  PolyNetwork net;
  net.input_dim = 2;
  net.input_intervals.assign(2, Interval{-4.0, 4.0});
  Prng rng(seed);
  auto dense = [&](size_t in, size_t out, Activation act) {
    Layer layer;
    layer.weights.assign(out, std::vector<double>(in));
    for (auto& row : layer.weights) {
      for (double& w : row) w = rng.uniform(-0.5, 0.5);
    }
    layer.bias.resize(out);
    for (double& b : layer.bias) b = rng.uniform(-0.5, 0.5);
    layer.activation = act;
    return layer;
  };
  net.layers.push_back(dense(2, 4, Activation::square()));
  net.layers.push_back(dense(4, 2, Activation::identity()));
  return net;
}

PolyNetwork demo_mlp() {
  return train(demo_mlp_untrained(), demo_train_set(), {0.02, 200, ActivationMode::kPolynomial})
      .net;
}

double l2_loss(const PolyNetwork& net, const Dataset& data, ActivationMode mode) {
  check_trainable(net, data, mode);
  double total = 0.0;
  for (const Sample& s : data.samples) {
    const std::vector<double> out = run(net, s.x, mode).a.back();
    for (size_t o = 0; o < out.size(); ++o) total += (out[o] - s.y[o]) * (out[o] - s.y[o]);
  }
  return total / static_cast<double>(data.size());
}

double accuracy(const PolyNetwork& net, const Dataset& data, ActivationMode mode) {
  check_trainable(net, data, mode);
  size_t hits = 0;
  for (const Sample& s : data.samples) {
    const std::vector<double> out = run(net, s.x, mode).a.back();
    hits += argmax(out) == argmax(s.y);
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

Gradient gradient(const PolyNetwork& net, const Dataset& data, ActivationMode mode) {
  check_trainable(net, data, mode);
  const size_t layers = net.layers.size();
  Gradient g;
  g.weights.resize(layers);
  g.bias.resize(layers);
  for (size_t l = 0; l < layers; ++l) {
    const Layer& layer = net.layers[l];
    g.weights[l].assign(layer.out_dim(), std::vector<double>(layer.in_dim(), 0.0));
    g.bias[l].assign(layer.out_dim(), 0.0);
  }
  const double scale = 1.0 / static_cast<double>(data.size());
  for (const Sample& s : data.samples) {
    const Trace tr = run(net, s.x, mode);
    const std::vector<double>& out = tr.a.back();
    std::vector<double> delta(out.size());
    for (size_t o = 0; o < out.size(); ++o) {
      g.loss += (out[o] - s.y[o]) * (out[o] - s.y[o]) * scale;
      delta[o] = 2.0 * (out[o] - s.y[o]) * scale;
    }
    for (size_t l = layers; l-- > 0;) {
      const Layer& layer = net.layers[l];
      for (size_t i = 0; i < layer.out_dim(); ++i) {
        delta[i] *= act_slope(layer.activation, tr.z[l][i], mode);
      }
      std::vector<double> back(layer.in_dim(), 0.0);
      for (size_t i = 0; i < layer.out_dim(); ++i) {
        g.bias[l][i] += delta[i];
        for (size_t j = 0; j < layer.in_dim(); ++j) {
          g.weights[l][i][j] += delta[i] * tr.a[l][j];
          back[j] += layer.weights[i][j] * delta[i];
        }
      }
      delta = std::move(back);
    }
  }
  return g;
}

PolyNetwork backprop_step(const PolyNetwork& net, const Dataset& data, double learning_rate,
                          ActivationMode mode) {
  const Gradient g = gradient(net, data, mode);
  PolyNetwork next = net;
  for (size_t l = 0; l < next.layers.size(); ++l) {
    Layer& layer = next.layers[l];
    for (size_t i = 0; i < layer.out_dim(); ++i) {
      layer.bias[i] -= learning_rate * g.bias[l][i];
      for (size_t j = 0; j < layer.in_dim(); ++j) {
        layer.weights[i][j] -= learning_rate * g.weights[l][i][j];
      }
    }
  }
  return next;
}

TrainResult train(PolyNetwork net, const Dataset& data, const TrainConfig& config) {
  if (!(config.learning_rate > 0.0) || config.epochs < 0) {
    throw ValidationError("learning rate must be positive and epochs non-negative");
  }
  TrainResult r{std::move(net), {}};
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const Gradient g = gradient(r.net, data, config.mode);
    if (!std::isfinite(g.loss) || g.loss > kDivergenceLoss) {
      std::ostringstream msg;
      msg << "training diverged at epoch " << epoch << " (loss " << g.loss
          << "); try a smaller learning rate";
      throw TrainingDiverged(msg.str());
    }
    r.loss_curve.push_back(g.loss);
    for (size_t l = 0; l < r.net.layers.size(); ++l) {
      Layer& layer = r.net.layers[l];
      for (size_t i = 0; i < layer.out_dim(); ++i) {
        layer.bias[i] -= config.learning_rate * g.bias[l][i];
        for (size_t j = 0; j < layer.in_dim(); ++j) {
          layer.weights[i][j] -= config.learning_rate * g.weights[l][i][j];
        }
      }
    }
  }
  return r;
}

LinearStepPlan plan_linear_step(const LinearStepConfig& config, const SchemeParams& params) {
  const size_t d = config.features, batch = config.batch;
  if (d == 0 || batch == 0) throw ValidationError("need at least one feature and one sample");
  for (int s : {config.feature_scale, config.weight_scale, config.rate_scale}) {
    if (s < 0 || s > 30) throw ValidationError("scales must be in [0, 30] bits");
  }
  if (!(config.learning_rate >= 0.0) || !(config.feature_bound > 0.0) ||
      !(config.label_bound > 0.0) || !(config.weight_bound > 0.0)) {
    throw ValidationError("learning rate and bounds must be positive");
  }
  const int sx = config.feature_scale, sw = config.weight_scale, se = config.rate_scale;
  const double rate = 2.0 * config.learning_rate / static_cast<double>(batch);
  const int64_t m = quantize_fixed(rate, se, "learning rate");

  CompileConfig cc;
  cc.input_scale = sx;
  cc.weight_scale = sw;
  cc.coeff_scale = se;
  CircuitBuilder b(params, cc);
  std::vector<int> w(d), x(batch * d), y(batch);
  for (size_t j = 0; j < d; ++j) {
    w[j] = b.input({-config.weight_bound, config.weight_bound}, sw);
  }
  for (size_t k = 0; k < batch * d; ++k) {
    x[k] = b.input({-config.feature_bound, config.feature_bound}, sx);
  }
  for (size_t k = 0; k < batch; ++k) y[k] = b.input({-config.label_bound, config.label_bound}, sx + sw);

  std::vector<int> residual(batch);
  for (size_t k = 0; k < batch; ++k) {
    int acc = -1;
    for (size_t j = 0; j < d; ++j) {
      const int term = b.mul(x[k * d + j], w[j]);
      acc = acc < 0 ? term : b.add(acc, term);
    }
    residual[k] = b.add(acc, b.mul_const(y[k], -1.0, -1, 0));
  }
  std::vector<int> out(d);
  for (size_t j = 0; j < d; ++j) {
    int acc = -1;
    for (size_t k = 0; k < batch; ++k) {
      const int term = b.mul(x[k * d + j], residual[k]);
      acc = acc < 0 ? term : b.add(acc, term);
    }
    const int shift = 2 * sx + se;
    const int kept = b.mul_const(w[j], 1.0, int64_t{1} << shift, shift);
    out[j] = b.add(kept, b.mul_const(acc, -rate, -m, se));
  }
  LinearStepPlan plan{config, m, sw + 2 * sx + se, b.finish(out)};
  const BudgetReport report = validate_budget(plan.circuit, params);
  if (!report.ok()) {
    std::string msg = "gradient step does not fit the parameters";
    for (const std::string& f : report.failures) msg += "; " + f;
    throw ValidationError(msg);
  }
  return plan;
}

namespace {

std::vector<double> flatten(const LinearStepPlan& plan, const LinearStepInputs& in) {
  const size_t d = plan.config.features, batch = plan.config.batch;
  if (in.weights.size() != d || in.features.size() != batch * d || in.labels.size() != batch) {
    throw ValidationError("gradient step inputs do not match the plan");
  }
  std::vector<double> all = in.weights;
  all.insert(all.end(), in.features.begin(), in.features.end());
  all.insert(all.end(), in.labels.begin(), in.labels.end());
  return all;
}

}  // namespace

std::vector<uint64_t> fixed_point_linear_step(const LinearStepPlan& plan,
                                              const LinearStepInputs& in) {
  const size_t d = plan.config.features, batch = plan.config.batch;
  const uint64_t t = plan.circuit.params.t();
  const EncodedInputs enc = encode_inputs(plan.circuit, flatten(plan, in));
  std::vector<i128> v;
  for (uint64_t r : enc.residues) v.push_back(centered_mantissa(r, t));
  const i128* w = v.data();
  const i128* x = w + d;
  const i128* y = x + batch * d;
  std::vector<i128> residual(batch);
  for (size_t k = 0; k < batch; ++k) {
    residual[k] = -y[k];
    for (size_t j = 0; j < d; ++j) residual[k] += x[k * d + j] * w[j];
  }
  const int shift = 2 * plan.config.feature_scale + plan.config.rate_scale;
  std::vector<uint64_t> out;
  for (size_t j = 0; j < d; ++j) {
    i128 g = 0;
    for (size_t k = 0; k < batch; ++k) g += x[k * d + j] * residual[k];
    const i128 updated = w[j] * (static_cast<i128>(1) << shift) - plan.rate_mantissa * g;
    out.push_back(static_cast<uint64_t>(reduce_signed(updated, t)));
  }
  return out;
}

std::vector<Ciphertext> encrypt_linear_step_inputs(const LinearStepPlan& plan,
                                                   const LinearStepInputs& in,
                                                   const SecretKeyBundle& keys, Prng& rng) {
  return encrypt_inputs(plan.circuit, flatten(plan, in), keys, rng);
}

std::vector<Ciphertext> encrypted_gradient_step(const LinearStepPlan& plan,
                                                std::span<const Ciphertext> inputs,
                                                const EvaluationKeys& keys) {
  return encrypted_forward(plan.circuit, inputs, keys);
}

std::vector<double> decode_linear_step(const LinearStepPlan& plan,
                                       std::span<const uint64_t> residues) {
  return decode_outputs(plan.circuit, residues);
}

}  // namespace cryptonet
