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

// JSON forms of parameters, networks and compiled circuits. These are the
// human-editable files; keys and ciphertexts use the binary wire format.

#ifndef CRYPTONET_JSON_IO_H_
#define CRYPTONET_JSON_IO_H_

#include <filesystem>

#include "json.hpp"

#include "cryptonet/polynet.h"
#include "cryptonet/prng.h"
#include "cryptonet/she.h"

namespace cryptonet {

// {"n", "q" (decimal string), "t", "noise_stddev", "max_mul_depth",
// "decomp_base", "params_id"}. A form with "log_q" instead of "q" generates
// the modulus. A present params_id must match the recomputed one.
nlohmann::json params_to_json(const SchemeParams& p);
SchemeParams params_from_json(const nlohmann::json& j);

// Layers are {"weights", "bias", "activation"}, {"type": "avg_pool",
// "size": k} (lowered to a dense layer), or, when init_rng is given,
// {"units": k, "activation"} with weights drawn uniformly from [-0.5, 0.5].
// An activation is {"kind", "interval"?, "coeffs"?, "degree"?, "method"?,
// "table"?}: coeffs fix the polynomial, degree alone fits one, neither leaves
// a non-polynomial kind exact.
nlohmann::json network_to_json(const PolyNetwork& net);
PolyNetwork network_from_json(const nlohmann::json& j, Prng* init_rng = nullptr);

nlohmann::json activation_to_json(const Activation& a);
Activation activation_from_json(const nlohmann::json& j);

// Includes the hash; loading recomputes it and rejects a mismatch.
nlohmann::json circuit_to_json(const CompiledCircuit& c);
CompiledCircuit circuit_from_json(const nlohmann::json& j);

// Throws ValidationError on unreadable or malformed files.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace cryptonet

#endif  // CRYPTONET_JSON_IO_H_
