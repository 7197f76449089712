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

// Plaintext training of shallow polynomial networks by full-batch gradient
// descent on the L2 loss, and one gradient step of a linear model computed
// over encrypted weights and data.

#ifndef CRYPTONET_TRAIN_H_
#define CRYPTONET_TRAIN_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cryptonet/errors.h"
#include "cryptonet/polynet.h"
#include "cryptonet/prng.h"
#include "cryptonet/she.h"

namespace cryptonet {

class TrainingDiverged : public Error {
 public:
  explicit TrainingDiverged(const std::string& what) : Error(what) {}
};

struct Sample {
  std::vector<double> x;
  std::vector<double> y;
};

struct Dataset {
  std::vector<Sample> samples;

  size_t size() const { return samples.size(); }
  size_t input_dim() const { return samples.empty() ? 0 : samples[0].x.size(); }
  size_t output_dim() const { return samples.empty() ? 0 : samples[0].y.size(); }
};

// One row per sample: input_dim feature columns, then either output_dim
// target columns or a single integer class label that is one-hot encoded.
// A non-numeric first row is treated as a header.
Dataset load_csv(const std::filesystem::path& path, size_t input_dim, size_t output_dim);
void save_csv(const std::filesystem::path& path, const Dataset& data);

// Two Gaussian clusters (stddev 0.6) centered at (-1, -1) and (1, 1), with
// one-hot targets; samples alternate between the classes.
Dataset make_blobs(size_t samples, uint64_t seed);

// The demo task: blobs with 200 training and 100 test samples.
Dataset demo_train_set();
Dataset demo_test_set();
// 2 inputs on [-4, 4], 4 square units, 2 linear outputs; weights drawn from
// Prng(seed).
PolyNetwork demo_mlp_untrained(uint64_t seed = 5);
// demo_mlp_untrained() trained for 200 epochs at rate 0.02.
PolyNetwork demo_mlp();

enum class ActivationMode { kPolynomial, kExact };

// (1/T) * sum over samples of |N(x) - y|^2.
double l2_loss(const PolyNetwork& net, const Dataset& data,
               ActivationMode mode = ActivationMode::kPolynomial);

// Fraction of samples whose output argmax matches the target argmax.
double accuracy(const PolyNetwork& net, const Dataset& data,
                ActivationMode mode = ActivationMode::kPolynomial);

struct Gradient {
  std::vector<std::vector<std::vector<double>>> weights;
  std::vector<std::vector<double>> bias;
  double loss = 0.0;
};

// Gradient of l2_loss. In polynomial mode every activation must be
// polynomial (ValidationError otherwise).
Gradient gradient(const PolyNetwork& net, const Dataset& data,
                  ActivationMode mode = ActivationMode::kPolynomial);

PolyNetwork backprop_step(const PolyNetwork& net, const Dataset& data, double learning_rate,
                          ActivationMode mode = ActivationMode::kPolynomial);

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 200;
  ActivationMode mode = ActivationMode::kPolynomial;
};

struct TrainResult {
  PolyNetwork net;
  // Loss before each epoch's update.
  std::vector<double> loss_curve;
};

// Throws TrainingDiverged once the loss exceeds 1e6 or stops being finite.
TrainResult train(PolyNetwork net, const Dataset& data, const TrainConfig& config);

inline constexpr double kDivergenceLoss = 1e6;

// One step w' = w - eta * (2/B) * X^T (X w - y) over a batch of B samples,
// in fixed point: w at scale s_w, x at s_x, y at s_x + s_w, and the rate
// multiplier round(2 eta / B * 2^s_eta). The result sits at scale
// s_w + 2 s_x + s_eta.
struct LinearStepConfig {
  size_t features = 2;
  size_t batch = 4;
  double learning_rate = 0.1;
  int feature_scale = 4;
  int weight_scale = 4;
  int rate_scale = 4;
  // Inputs are clipped to these magnitudes.
  double feature_bound = 1.0;
  double label_bound = 1.0;
  double weight_bound = 1.0;
};

struct LinearStepPlan {
  LinearStepConfig config;
  int64_t rate_mantissa = 0;
  int output_scale = 0;
  // Inputs: weights, then features row by row, then labels.
  CompiledCircuit circuit;
};

// Validates depth, overflow and noise for the given parameters; throws
// ValidationError before any encrypted work.
LinearStepPlan plan_linear_step(const LinearStepConfig& config, const SchemeParams& params);

struct LinearStepInputs {
  std::vector<double> weights;   // features
  std::vector<double> features;  // batch x features, row-major
  std::vector<double> labels;    // batch
};

// The step in plain integers; residues mod t of the updated weights.
std::vector<uint64_t> fixed_point_linear_step(const LinearStepPlan& plan,
                                              const LinearStepInputs& in);

std::vector<Ciphertext> encrypt_linear_step_inputs(const LinearStepPlan& plan,
                                                   const LinearStepInputs& in,
                                                   const SecretKeyBundle& keys, Prng& rng);

// Evaluates the step on ciphertexts laid out as the plan's circuit inputs.
std::vector<Ciphertext> encrypted_gradient_step(const LinearStepPlan& plan,
                                                std::span<const Ciphertext> inputs,
                                                const EvaluationKeys& keys);

std::vector<double> decode_linear_step(const LinearStepPlan& plan,
                                       std::span<const uint64_t> residues);

}  // namespace cryptonet

#endif  // CRYPTONET_TRAIN_H_
