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

// Shallow networks with polynomial activations, and their compilation into
// quantized arithmetic circuits over Z_t.
//
// A compiled circuit is a DAG of ciphertext-ciphertext and
// ciphertext-plaintext additions and multiplications. Weights enter as
// plaintext multipliers, so only activations consume multiplicative depth.
// Every wire carries a fixed-point scale, an exact bound on its integer
// mantissa, and a bound on its deviation from the real-valued network.

#ifndef CRYPTONET_POLYNET_H_
#define CRYPTONET_POLYNET_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cryptonet/approx.h"
#include "cryptonet/errors.h"
#include "cryptonet/int_types.h"
#include "cryptonet/she.h"

namespace cryptonet {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};

// Identity, square, or a fitted polynomial standing in for another function.
// A sigmoid/relu/tanh/custom activation without a fit is not polynomial; it
// can be trained in reference mode but not compiled.
struct Activation {
  ActivationKind kind = ActivationKind::kIdentity;
  std::optional<PolyApprox> poly;
  // Kept for non-polynomial kinds so the exact function can be evaluated.
  std::optional<ActivationSpec> spec;

  static Activation identity() { return {}; }
  static Activation square() { return {ActivationKind::kSquare, std::nullopt, std::nullopt}; }
  static Activation fitted(const ActivationSpec& spec, PolyApprox p);
  static Activation exact(const ActivationSpec& spec);

  bool is_polynomial() const;
  // Throws ValidationError("compile approximation first") if not polynomial.
  int degree() const;
  // Monomial coefficients of the polynomial form.
  std::vector<double> coefficients() const;

  // Polynomial value and derivative.
  double eval(double x) const;
  double derivative(double x) const;
  // The function being approximated; equals eval for identity and square.
  double eval_exact(double x) const;
  double derivative_exact(double x) const;
};

struct Layer {
  std::vector<std::vector<double>> weights;  // out x in
  std::vector<double> bias;
  Activation activation;

  size_t in_dim() const { return weights.empty() ? 0 : weights[0].size(); }
  size_t out_dim() const { return weights.size(); }
};

struct PolyNetwork {
  size_t input_dim = 0;
  std::vector<Interval> input_intervals;
  std::vector<Layer> layers;

  size_t output_dim() const { return layers.empty() ? input_dim : layers.back().out_dim(); }
  // Throws ValidationError on shape mismatches or non-finite entries.
  void validate() const;
  // Non-fatal remarks, such as a deep network.
  std::vector<std::string> warnings() const;
};

// Product over layers of max(1, activation degree).
int total_degree(const PolyNetwork& net);
// d^(2l) with d the largest activation degree and l the layer count.
int64_t grad_degree_bound(const PolyNetwork& net);
int64_t grad_degree_bound(int degree, int layers);

enum class OpCode { kInput, kConstant, kAddCC, kMulCC, kAddCP, kMulCP };
std::string_view to_string(OpCode op);
OpCode parse_opcode(std::string_view name);

struct CircuitNode {
  OpCode op = OpCode::kInput;
  int a = -1;
  int b = -1;
  // Input index for kInput; centered plaintext for kConstant, kAddCP, kMulCP.
  int64_t value = 0;
  int scale = 0;
  // Exact bounds on the centered integer carried by this wire.
  i128 lo = 0;
  i128 hi = 0;
  // Bound on |decoded value - value of the polynomial network|.
  double quant_error = 0.0;
  // Bound on |value of the polynomial network| over the input box.
  double magnitude = 0.0;

  bool operator==(const CircuitNode&) const = default;
};

struct CompileConfig {
  int input_scale = 6;
  int weight_scale = 6;
  int coeff_scale = 8;
  // Multiply by trivially encrypted constants instead of plaintexts.
  bool encrypt_constants = false;
  // Raise t (and regenerate q) to the smallest power of two that fits.
  bool auto_raise_t = true;

  bool operator==(const CompileConfig&) const = default;
};

struct CompiledCircuit {
  SchemeParams params;
  CompileConfig config;
  std::vector<Interval> input_intervals;
  std::vector<CircuitNode> nodes;
  std::vector<int> outputs;
  int total_degree = 1;
  int mul_depth = 0;
  // Per output: bound against the polynomial network, and against the
  // network with exact activations (adds propagated approximation error).
  std::vector<double> quant_bound;
  std::vector<double> total_bound;

  size_t num_inputs() const { return input_intervals.size(); }
  // Fixed-point scale of input i.
  int input_scale(size_t i) const;
  int output_scale(size_t i) const { return nodes.at(outputs.at(i)).scale; }
  // Hex SHA-256 of the canonical JSON form of the DAG.
  std::string hash() const;
};

// Symbolic degree and ciphertext-multiplication depth by propagation over
// the DAG (inputs degree 1, constants degree 0).
int dag_degree(const CompiledCircuit& c);
int dag_depth(const CompiledCircuit& c);

struct BudgetReport {
  bool depth_ok = true;
  bool magnitude_ok = true;
  bool noise_ok = true;
  int depth = 0;
  int max_depth = 0;
  // log2(t/2) - log2(largest wire or constant magnitude).
  double magnitude_margin_bits = 0.0;
  int worst_magnitude_node = -1;
  // Smallest modeled noise budget over output wires, in bits.
  double noise_margin_bits = 0.0;
  int worst_noise_node = -1;
  std::vector<std::string> failures;

  bool ok() const { return depth_ok && magnitude_ok && noise_ok; }
};

// Incremental circuit construction with bound tracking. Real constants are
// passed alongside their quantized form so that quantization error can be
// bounded; c_int is c rounded at scale c_scale.
class CircuitBuilder {
 public:
  CircuitBuilder(SchemeParams params, CompileConfig config);

  // Declares the next input, encoded at the given scale.
  int input(const Interval& iv, int scale);
  int mul_const(int x, double c, int64_t c_int, int c_scale);
  // x + c with c_int quantized at the scale of x.
  int add_const(int x, double c, int64_t c_int);
  int add(int x, int y);
  int mul(int x, int y);
  // h^e by repeated squaring, depth ceil(log2 e); cache maps e to its node.
  int power(int h, int e, std::map<int, int>& cache);

  const CircuitNode& node(int id) const { return c_.nodes.at(id); }
  // Real interval of the wire in the network being modeled.
  double lo(int id) const { return rlo_.at(id); }
  double hi(int id) const { return rhi_.at(id); }
  // Bound on |modeled network - network with exact activations|.
  double approx_error(int id) const { return approx_.at(id); }
  void set_approx_error(int id, double a) { approx_.at(id) = a; }

  // Fixes the outputs; total_degree defaults to the propagated DAG degree.
  CompiledCircuit finish(std::vector<int> outputs, std::optional<int> total_degree = {});

 private:
  int push(CircuitNode n, double rlo, double rhi, double approx);

  CompiledCircuit c_;
  std::vector<double> rlo_, rhi_;
  std::vector<double> approx_;
};

// Rounds x * 2^scale; throws ValidationError if it does not fit 62 bits.
int64_t quantize_fixed(double x, int scale, const char* what);

BudgetReport validate_budget(const CompiledCircuit& circuit, const SchemeParams& params);

// Builds the circuit for the given parameters without checking that it fits.
CompiledCircuit lower_network(const PolyNetwork& net, const SchemeParams& params,
                              const CompileConfig& config = {});

// Compiles and validates. Throws ValidationError naming the failing check.
CompiledCircuit compile(const PolyNetwork& net, const SchemeParams& params,
                        const CompileConfig& config = {});

}  // namespace cryptonet

#endif  // CRYPTONET_POLYNET_H_
