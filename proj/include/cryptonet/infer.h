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

// Forward passes: real-valued, quantized over Z_t, and encrypted. The
// quantized and encrypted passes evaluate the same circuit, so their outputs
// agree bit for bit whenever the circuit validates.

#ifndef CRYPTONET_INFER_H_
#define CRYPTONET_INFER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cryptonet/polynet.h"
#include "cryptonet/prng.h"
#include "cryptonet/she.h"

namespace cryptonet {

// Real arithmetic with the polynomial activations.
std::vector<double> plain_forward(const PolyNetwork& net, std::span<const double> x);
// Real arithmetic with the functions the polynomials stand in for.
std::vector<double> exact_forward(const PolyNetwork& net, std::span<const double> x);

struct EncodedInputs {
  std::vector<uint64_t> residues;
  std::vector<std::string> warnings;
};

// Fixed-point encoding at the circuit's input scale. Values outside the
// declared input intervals are clipped with a warning; non-finite values
// throw ValidationError.
EncodedInputs encode_inputs(const CompiledCircuit& c, std::span<const double> x);

// Output residues mod t of the circuit evaluated on encoded inputs.
std::vector<uint64_t> evaluate_circuit(const CompiledCircuit& c,
                                       std::span<const uint64_t> inputs);

std::vector<double> decode_outputs(const CompiledCircuit& c, std::span<const uint64_t> residues);

struct QuantizedResult {
  std::vector<uint64_t> residues;
  std::vector<double> values;
  std::vector<std::string> warnings;
};

QuantizedResult quantized_forward(const CompiledCircuit& c, std::span<const double> x);

std::vector<Ciphertext> encrypt_inputs(const CompiledCircuit& c, std::span<const double> x,
                                       const SecretKeyBundle& keys, Prng& rng,
                                       std::vector<std::string>* warnings = nullptr);

// Server-side evaluation; needs only public material. Throws ParamsMismatch
// if the ciphertexts or keys belong to other parameters.
std::vector<Ciphertext> encrypted_forward(const CompiledCircuit& c,
                                          std::span<const Ciphertext> inputs,
                                          const EvaluationKeys& keys);

std::vector<uint64_t> decrypt_outputs(std::span<const Ciphertext> outputs,
                                      const SecretKeyBundle& keys);

size_t argmax(std::span<const double> v);

}  // namespace cryptonet

#endif  // CRYPTONET_INFER_H_
