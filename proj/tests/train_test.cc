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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <fstream>

#include "cryptonet/infer.h"
#include "net_util.h"

namespace cryptonet {
namespace {

// Final accuracy of demo_mlp() on its training set.
constexpr double kDemoTrainAccuracy = 0.995;
// |W_d - W_exact| after training with a degree-d sigmoid fit versus the exact
// sigmoid, d = 3, 5, 9.
constexpr double kTrendDistance[3] = {0.24024314507249797, 0.17065959176783019,
                                      0.067909135213536601};

PolyNetwork linear_neuron(double w, double b) {
  PolyNetwork net;
  net.input_dim = 1;
  net.input_intervals = {{-1, 1}};
  net.layers.push_back({{{w}}, {b}, Activation::identity()});
  return net;
}

Dataset random_dataset(Prng& rng, size_t in, size_t out, size_t n) {
  Dataset d;
  for (size_t k = 0; k < n; ++k) {
    Sample s;
    for (size_t i = 0; i < in; ++i) s.x.push_back(rng.uniform(-1, 1));
    for (size_t o = 0; o < out; ++o) s.y.push_back(rng.uniform(-1, 1));
    d.samples.push_back(std::move(s));
  }
  return d;
}

std::vector<double> flatten(const PolyNetwork& net) {
  std::vector<double> p;
  for (const Layer& l : net.layers) {
    for (const auto& row : l.weights) p.insert(p.end(), row.begin(), row.end());
    p.insert(p.end(), l.bias.begin(), l.bias.end());
  }
  return p;
}

std::vector<double> flatten(const Gradient& g) {
  std::vector<double> p;
  for (size_t l = 0; l < g.weights.size(); ++l) {
    for (const auto& row : g.weights[l]) p.insert(p.end(), row.begin(), row.end());
    p.insert(p.end(), g.bias[l].begin(), g.bias[l].end());
  }
  return p;
}

double& param(PolyNetwork& net, size_t index) {
  for (Layer& l : net.layers) {
    for (auto& row : l.weights) {
      if (index < row.size()) return row[index];
      index -= row.size();
    }
    if (index < l.bias.size()) return l.bias[index];
    index -= l.bias.size();
  }
  throw std::out_of_range("parameter index");
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

TEST(BackpropTest, SingleNeuronHandExample) {
  Dataset d;
  d.samples.push_back({{1.0}, {0.0}});
  const PolyNetwork next = backprop_step(linear_neuron(1.0, 0.0), d, 0.5);
  // w' = 1 - 0.5 * 2 * (1*1 + 0 - 0) * 1 = 0; b' = 0 - 0.5 * 2 * 1 = -1.
  EXPECT_DOUBLE_EQ(next.layers[0].weights[0][0], 0.0);
  EXPECT_DOUBLE_EQ(next.layers[0].bias[0], -1.0);
}

TEST(BackpropTest, PerfectFitIsAFixedPoint) {
  const PolyNetwork net = demo_mlp_untrained();
  Dataset d = demo_train_set();
  for (Sample& s : d.samples) s.y = plain_forward(net, s.x);
  const PolyNetwork next = backprop_step(net, d, 0.1);
  EXPECT_EQ(flatten(next), flatten(net));
  EXPECT_EQ(gradient(net, d).loss, 0.0);
}

TEST(BackpropTest, MatchesCentralFiniteDifferences) {
  Prng rng(31);
  testing::NetShape shape;
  shape.max_degree = 3;
  for (int trial = 0; trial < 100; ++trial) {
    PolyNetwork net = testing::random_network(rng, shape);
    const Dataset d = random_dataset(rng, net.input_dim, net.output_dim(), 4);
    const std::vector<double> analytic = flatten(gradient(net, d));
    std::vector<double> numeric(analytic.size());
    constexpr double kStep = 1e-5;
    for (size_t i = 0; i < analytic.size(); ++i) {
      const double saved = param(net, i);
      param(net, i) = saved + kStep;
      const double up = l2_loss(net, d);
      param(net, i) = saved - kStep;
      const double down = l2_loss(net, d);
      param(net, i) = saved;
      numeric[i] = (up - down) / (2 * kStep);
    }
    double norm = 0.0;
    for (double g : analytic) norm = std::max(norm, std::fabs(g));
    const double rel = distance(analytic, numeric) /
                       std::max(std::sqrt(std::inner_product(analytic.begin(), analytic.end(),
                                                             analytic.begin(), 0.0)),
                                1e-12);
    if (norm > 1e-8) {
      EXPECT_LT(rel, 1e-5) << "trial " << trial;
    }
  }
}

TEST(BackpropTest, NonPolynomialActivationIsRejected) {
  PolyNetwork net = linear_neuron(0.5, 0.0);
  net.layers[0].activation = Activation::exact(ActivationSpec(ActivationKind::kSigmoid));
  Dataset d;
  d.samples.push_back({{1.0}, {0.0}});
  EXPECT_THROW(backprop_step(net, d, 0.1), ValidationError);
  EXPECT_NO_THROW(backprop_step(net, d, 0.1, ActivationMode::kExact));
}

TEST(BackpropTest, ShapeMismatchIsRejected) {
  Dataset d;
  d.samples.push_back({{1.0}, {0.0, 1.0}});
  EXPECT_THROW(gradient(linear_neuron(1.0, 0.0), d), ValidationError);
  EXPECT_THROW(gradient(linear_neuron(1.0, 0.0), Dataset{}), ValidationError);
}

TEST(TrainTest, DemoTaskReachesTargetAccuracy) {
  const PolyNetwork net = demo_mlp();
  const double acc = accuracy(net, demo_train_set());
  EXPECT_GE(acc, 0.95);
  EXPECT_DOUBLE_EQ(acc, kDemoTrainAccuracy);
  EXPECT_GE(accuracy(net, demo_test_set()), 0.95);
}

TEST(TrainTest, IsDeterministic) {
  const TrainConfig cfg{0.02, 20, ActivationMode::kPolynomial};
  const TrainResult a = train(demo_mlp_untrained(), demo_train_set(), cfg);
  const TrainResult b = train(demo_mlp_untrained(), demo_train_set(), cfg);
  EXPECT_EQ(a.loss_curve, b.loss_curve);
  EXPECT_EQ(flatten(a.net), flatten(b.net));
  EXPECT_EQ(a.loss_curve.size(), 20u);
}

TEST(TrainTest, OwnOutputsGiveZeroLoss) {
  const PolyNetwork net = demo_mlp_untrained(8);
  Dataset d = demo_train_set();
  for (Sample& s : d.samples) s.y = plain_forward(net, s.x);
  const TrainResult r = train(net, d, {0.02, 5, ActivationMode::kPolynomial});
  EXPECT_LT(r.loss_curve.front(), 1e-20);
  EXPECT_LT(r.loss_curve.back(), 1e-20);
}

TEST(TrainTest, LinearModelLossIsMonotone) {
  Prng rng(32);
  Dataset d;
  for (int k = 0; k < 50; ++k) {
    const double x = rng.uniform(-1, 1);
    d.samples.push_back({{x}, {0.7 * x - 0.2 + rng.normal(0, 0.1)}});
  }
  const TrainResult r = train(linear_neuron(-0.3, 0.4), d, {0.05, 300, ActivationMode::kPolynomial});
  for (size_t i = 1; i < r.loss_curve.size(); ++i) {
    EXPECT_LE(r.loss_curve[i], r.loss_curve[i - 1]) << "epoch " << i;
  }
  EXPECT_NEAR(r.net.layers[0].weights[0][0], 0.7, 0.1);
}

TEST(TrainTest, DivergenceAdvisesSmallerRate) {
  try {
    train(demo_mlp_untrained(), demo_train_set(), {5.0, 200, ActivationMode::kPolynomial});
    FAIL() << "expected TrainingDiverged";
  } catch (const TrainingDiverged& e) {
    EXPECT_NE(std::string(e.what()).find("smaller learning rate"), std::string::npos);
  }
  EXPECT_THROW(train(demo_mlp_untrained(), demo_train_set(), {0.0, 1, ActivationMode::kPolynomial}),
               ValidationError);
}

// Training with a sigmoid fit approaches training with the sigmoid itself as
// the degree grows.
TEST(TrainTest, ApproximateSigmoidTrainingConvergesWithDegree) {
  const ActivationSpec sig(ActivationKind::kSigmoid);
  PolyNetwork base = demo_mlp_untrained(13);
  base.layers[0].activation = Activation::exact(sig);
  const TrainConfig exact_cfg{0.05, 200, ActivationMode::kExact};
  const std::vector<double> reference = flatten(train(base, demo_train_set(), exact_cfg).net);
  const int degrees[3] = {3, 5, 9};
  double previous = INFINITY;
  for (int i = 0; i < 3; ++i) {
    PolyNetwork net = base;
    net.layers[0].activation = Activation::fitted(sig, chebyshev_fit(sig, degrees[i]));
    const TrainResult r = train(net, demo_train_set(), {0.05, 200, ActivationMode::kPolynomial});
    const double dist = distance(flatten(r.net), reference);
    EXPECT_LT(dist, previous) << "degree " << degrees[i];
    EXPECT_NEAR(dist, kTrendDistance[i], 1e-9) << "degree " << degrees[i];
    previous = dist;
  }
}

TEST(DatasetTest, BlobsAreSeededAndBalanced) {
  const Dataset a = make_blobs(10, 4), b = make_blobs(10, 4);
  ASSERT_EQ(a.size(), 10u);
  for (size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a.samples[k].x, b.samples[k].x);
    EXPECT_EQ(argmax(a.samples[k].y), k % 2);
  }
  EXPECT_NE(make_blobs(10, 5).samples[0].x, a.samples[0].x);
}

TEST(DatasetTest, CsvRoundTripAndLabels) {
  const auto dir = std::filesystem::temp_directory_path() / "cryptonet_train_test";
  std::filesystem::create_directories(dir);
  const Dataset d = make_blobs(6, 1);
  save_csv(dir / "full.csv", d);
  const Dataset back = load_csv(dir / "full.csv", 2, 2);
  ASSERT_EQ(back.size(), d.size());
  for (size_t k = 0; k < d.size(); ++k) {
    EXPECT_EQ(back.samples[k].x, d.samples[k].x);
    EXPECT_EQ(back.samples[k].y, d.samples[k].y);
  }
  {
    std::ofstream out(dir / "labels.csv");
    out << "f0,f1,label\n0.5,-1,1\n-0.25,2,0\n";
  }
  const Dataset labeled = load_csv(dir / "labels.csv", 2, 2);
  ASSERT_EQ(labeled.size(), 2u);
  EXPECT_EQ(labeled.samples[0].y, (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(labeled.samples[1].y, (std::vector<double>{1.0, 0.0}));
  {
    std::ofstream out(dir / "bad.csv");
    out << "0.5,-1,1\n0.5,x,0\n";
  }
  EXPECT_THROW(load_csv(dir / "bad.csv", 2, 2), ValidationError);
  {
    std::ofstream out(dir / "range.csv");
    out << "0.5,-1,2\n";
  }
  EXPECT_THROW(load_csv(dir / "range.csv", 2, 2), ValidationError);
  EXPECT_THROW(load_csv(dir / "missing.csv", 2, 2), IoError);
  std::filesystem::remove_all(dir);
}

// Encrypted linear step.

const SchemeParams& step_params() {
  static const SchemeParams p = SchemeParams::generate(2048, 116, 1 << 20, 2);
  return p;
}

const SecretKeyBundle& step_keys() {
  static const SecretKeyBundle k = [] {
    Prng rng(33);
    return keygen(step_params(), rng);
  }();
  return k;
}

// The fixed-point schedule written out directly from the real inputs.
std::vector<uint64_t> step_oracle(const LinearStepConfig& c, const LinearStepInputs& in,
                                  uint64_t t) {
  auto fix = [](double v, double bound, int s) {
    return static_cast<i128>(std::llround(std::ldexp(std::clamp(v, -bound, bound), s)));
  };
  const int sx = c.feature_scale, sw = c.weight_scale, se = c.rate_scale;
  const i128 m = std::llround(std::ldexp(2.0 * c.learning_rate / c.batch, se));
  std::vector<uint64_t> out;
  for (size_t j = 0; j < c.features; ++j) {
    i128 g = 0;
    for (size_t k = 0; k < c.batch; ++k) {
      i128 r = -fix(in.labels[k], c.label_bound, sx + sw);
      for (size_t i = 0; i < c.features; ++i) {
        r += fix(in.features[k * c.features + i], c.feature_bound, sx) *
             fix(in.weights[i], c.weight_bound, sw);
      }
      g += fix(in.features[k * c.features + j], c.feature_bound, sx) * r;
    }
    const i128 w = fix(in.weights[j], c.weight_bound, sw) * (static_cast<i128>(1) << (2 * sx + se));
    i128 v = (w - m * g) % static_cast<i128>(t);
    if (v < 0) v += t;
    out.push_back(static_cast<uint64_t>(v));
  }
  return out;
}

std::vector<uint64_t> run_encrypted(const LinearStepPlan& plan, const LinearStepInputs& in,
                                    Prng& rng) {
  const auto cts = encrypt_linear_step_inputs(plan, in, step_keys(), rng);
  return decrypt_outputs(encrypted_gradient_step(plan, cts, step_keys().eval_keys), step_keys());
}

TEST(LinearStepTest, HandExampleDecodesToZero) {
  LinearStepConfig c;
  c.features = 1;
  c.batch = 1;
  c.learning_rate = 0.5;
  const LinearStepPlan plan = plan_linear_step(c, step_params());
  const LinearStepInputs in{{1.0}, {1.0}, {0.0}};
  Prng rng(34);
  const std::vector<uint64_t> out = run_encrypted(plan, in, rng);
  EXPECT_EQ(out, fixed_point_linear_step(plan, in));
  EXPECT_EQ(out, step_oracle(c, in, step_params().t()));
  EXPECT_DOUBLE_EQ(decode_linear_step(plan, out)[0], 0.0);
  EXPECT_EQ(plan.output_scale, c.weight_scale + 2 * c.feature_scale + c.rate_scale);
  EXPECT_EQ(plan.circuit.mul_depth, 2);
}

TEST(LinearStepTest, ZeroGradientLeavesWeightsUnchanged) {
  LinearStepConfig c;
  c.features = 2;
  c.batch = 3;
  c.learning_rate = 0.5;
  const LinearStepPlan plan = plan_linear_step(c, step_params());
  // y = x . w exactly on the fixed-point grid.
  const LinearStepInputs in{{0.5, -0.25}, {1.0, 0.5, -0.5, 0.25, 0.0, 1.0}, {0.375, -0.3125, -0.25}};
  Prng rng(35);
  const std::vector<double> w = decode_linear_step(plan, run_encrypted(plan, in, rng));
  EXPECT_DOUBLE_EQ(w[0], 0.5);
  EXPECT_DOUBLE_EQ(w[1], -0.25);
}

TEST(LinearStepTest, RandomBatchesMatchFixedPointStep) {
  Prng rng(36);
  for (int trial = 0; trial < 4; ++trial) {
    LinearStepConfig c;
    c.features = 2;
    c.batch = 4;
    c.learning_rate = rng.uniform(0.05, 1.0);
    const LinearStepPlan plan = plan_linear_step(c, step_params());
    LinearStepInputs in;
    for (int j = 0; j < 2; ++j) in.weights.push_back(rng.uniform(-1, 1));
    for (int j = 0; j < 8; ++j) in.features.push_back(rng.uniform(-1, 1));
    for (int j = 0; j < 4; ++j) in.labels.push_back(rng.uniform(-1, 1));
    const std::vector<uint64_t> expected = step_oracle(c, in, step_params().t());
    EXPECT_EQ(fixed_point_linear_step(plan, in), expected);
    EXPECT_EQ(run_encrypted(plan, in, rng), expected);
  }
}

TEST(LinearStepTest, PlanRejectsParametersThatCannotHoldTheStep) {
  LinearStepConfig c;
  EXPECT_THROW(plan_linear_step(c, SchemeParams::demo()), ValidationError);
  EXPECT_THROW(plan_linear_step(c, SchemeParams::generate(2048, 116, 1 << 12, 2)), ValidationError);
  c.batch = 0;
  EXPECT_THROW(plan_linear_step(c, step_params()), ValidationError);
}

}  // namespace
}  // namespace cryptonet
