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

#include "cryptonet/infer.h"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "cryptonet/encode.h"

namespace cryptonet {

namespace {

template <typename Act>
std::vector<double> forward(const PolyNetwork& net, std::span<const double> x, Act act) {
  if (x.size() != net.input_dim) {
    throw ValidationError("expected " + std::to_string(net.input_dim) + " inputs, got " +
                          std::to_string(x.size()));
  }
  std::vector<double> a(x.begin(), x.end());
  for (const Layer& layer : net.layers) {
    std::vector<double> next(layer.out_dim());
    for (size_t i = 0; i < layer.out_dim(); ++i) {
      double z = layer.bias[i];
      for (size_t j = 0; j < a.size(); ++j) z += layer.weights[i][j] * a[j];
      next[i] = act(layer.activation, z);
    }
    a = std::move(next);
  }
  return a;
}

uint64_t residue(int64_t v, uint64_t t) {
  const int64_t r = v % static_cast<int64_t>(t);
  return static_cast<uint64_t>(r < 0 ? r + static_cast<int64_t>(t) : r);
}

void check_inputs(const CompiledCircuit& c, size_t count) {
  if (count != c.num_inputs()) {
    throw ValidationError("expected " + std::to_string(c.num_inputs()) + " inputs, got " +
                          std::to_string(count));
  }
}

}  // namespace

std::vector<double> plain_forward(const PolyNetwork& net, std::span<const double> x) {
  return forward(net, x, [](const Activation& a, double z) { return a.eval(z); });
}

std::vector<double> exact_forward(const PolyNetwork& net, std::span<const double> x) {
  return forward(net, x, [](const Activation& a, double z) { return a.eval_exact(z); });
}

EncodedInputs encode_inputs(const CompiledCircuit& c, std::span<const double> x) {
  check_inputs(c, x.size());
  EncodedInputs out;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw ValidationError("input " + std::to_string(i) + " is not finite");
    }
    const Interval& iv = c.input_intervals[i];
    const double v = std::clamp(x[i], iv.lo, iv.hi);
    if (v != x[i]) {
      std::ostringstream msg;
      msg << "input " << i << " = " << x[i] << " clipped to [" << iv.lo << ", " << iv.hi << "]";
      out.warnings.push_back(msg.str());
    }
    out.residues.push_back(encode_real(v, c.input_scale(i), c.params.t()).mantissa);
  }
  return out;
}

std::vector<uint64_t> evaluate_circuit(const CompiledCircuit& c,
                                       std::span<const uint64_t> inputs) {
  check_inputs(c, inputs.size());
  const uint64_t t = c.params.t();
  std::vector<uint64_t> v(c.nodes.size());
  for (size_t i = 0; i < c.nodes.size(); ++i) {
    const CircuitNode& n = c.nodes[i];
    switch (n.op) {
      case OpCode::kInput: v[i] = inputs[n.value] % t; break;
      case OpCode::kConstant: v[i] = residue(n.value, t); break;
      case OpCode::kAddCC: v[i] = static_cast<uint64_t>((u128{v[n.a]} + v[n.b]) % t); break;
      case OpCode::kMulCC: v[i] = static_cast<uint64_t>((u128{v[n.a]} * v[n.b]) % t); break;
      case OpCode::kAddCP:
        v[i] = static_cast<uint64_t>((u128{v[n.a]} + residue(n.value, t)) % t);
        break;
      case OpCode::kMulCP:
        v[i] = static_cast<uint64_t>((u128{v[n.a]} * residue(n.value, t)) % t);
        break;
    }
  }
  std::vector<uint64_t> out;
  for (int o : c.outputs) out.push_back(v[o]);
  return out;
}

std::vector<double> decode_outputs(const CompiledCircuit& c, std::span<const uint64_t> residues) {
  if (residues.size() != c.outputs.size()) throw ValidationError("output count mismatch");
  std::vector<double> out;
  for (size_t i = 0; i < residues.size(); ++i) {
    out.push_back(decode_real(FixedPointValue{residues[i], c.output_scale(i)}, c.params.t()));
  }
  return out;
}

QuantizedResult quantized_forward(const CompiledCircuit& c, std::span<const double> x) {
  EncodedInputs in = encode_inputs(c, x);
  QuantizedResult r;
  r.residues = evaluate_circuit(c, in.residues);
  r.values = decode_outputs(c, r.residues);
  r.warnings = std::move(in.warnings);
  return r;
}

std::vector<Ciphertext> encrypt_inputs(const CompiledCircuit& c, std::span<const double> x,
                                       const SecretKeyBundle& keys, Prng& rng,
                                       std::vector<std::string>* warnings) {
  if (keys.params().id() != c.params.id()) throw ParamsMismatch();
  EncodedInputs in = encode_inputs(c, x);
  if (warnings) *warnings = std::move(in.warnings);
  std::vector<Ciphertext> out;
  for (uint64_t r : in.residues) out.push_back(encrypt(Plaintext{r}, keys, rng));
  return out;
}

std::vector<Ciphertext> encrypted_forward(const CompiledCircuit& c,
                                          std::span<const Ciphertext> inputs,
                                          const EvaluationKeys& keys) {
  check_inputs(c, inputs.size());
  const SchemeParams& params = c.params;
  if (keys.params().id() != params.id()) throw ParamsMismatch();
  for (const Ciphertext& ct : inputs) {
    if (ct.params_id() != params.id()) throw ParamsMismatch();
  }
  const uint64_t t = params.t();
  // Release intermediate ciphertexts after their last use.
  std::vector<size_t> last_use(c.nodes.size(), 0);
  for (size_t i = 0; i < c.nodes.size(); ++i) {
    if (c.nodes[i].a >= 0) last_use[c.nodes[i].a] = i;
    if (c.nodes[i].b >= 0) last_use[c.nodes[i].b] = i;
  }
  for (int o : c.outputs) last_use[o] = c.nodes.size();
  std::vector<std::optional<Ciphertext>> v(c.nodes.size());
  for (size_t i = 0; i < c.nodes.size(); ++i) {
    const CircuitNode& n = c.nodes[i];
    switch (n.op) {
      case OpCode::kInput: v[i] = inputs[n.value]; break;
      case OpCode::kConstant: v[i] = encrypt_trivial(Plaintext{residue(n.value, t)}, params); break;
      case OpCode::kAddCC: v[i] = he_add(*v[n.a], *v[n.b]); break;
      case OpCode::kMulCC: v[i] = he_mul(*v[n.a], *v[n.b], keys); break;
      case OpCode::kAddCP:
        v[i] = he_add_plain(*v[n.a], Plaintext{residue(n.value, t)}, params);
        break;
      case OpCode::kMulCP:
        v[i] = he_mul_plain(*v[n.a], Plaintext{residue(n.value, t)}, params);
        break;
    }
    for (int operand : {n.a, n.b}) {
      if (operand >= 0 && last_use[operand] == i) v[operand].reset();
    }
  }
  std::vector<Ciphertext> out;
  for (int o : c.outputs) out.push_back(*v[o]);
  return out;
}

std::vector<uint64_t> decrypt_outputs(std::span<const Ciphertext> outputs,
                                      const SecretKeyBundle& keys) {
  std::vector<uint64_t> out;
  for (const Ciphertext& ct : outputs) out.push_back(decrypt(ct, keys).value);
  return out;
}

size_t argmax(std::span<const double> v) {
  return static_cast<size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace cryptonet
