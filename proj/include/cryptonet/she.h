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

// Leveled somewhat-homomorphic encryption over R_q with scalar plaintexts in
// Z_t (a secret-key, scale-invariant RLWE scheme).
//
// A ciphertext (c0, c1) encrypts m when c0 + c1*s = Delta*m + e (mod q) with
// Delta = floor(q/t) and small e. Decryption rounds t/q * (c0 + c1*s).
// Multiplication tensors, scales by t/q and relinearizes with base-w digit
// decomposition of the s^2 component, so the evaluator only ever needs the
// public EvaluationKeys. Parameters here are demonstration-grade; they are
// not chosen for a vetted security level.

#ifndef CRYPTONET_SHE_H_
#define CRYPTONET_SHE_H_

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cryptonet/errors.h"
#include "cryptonet/int_types.h"
#include "cryptonet/prng.h"
#include "cryptonet/ring.h"

namespace cryptonet {

using ParamsId = std::array<uint8_t, 32>;
std::string params_id_hex(const ParamsId& id);

class SchemeParams {
 public:
  static constexpr double kDefaultNoiseStddev = 3.2;
  static constexpr uint64_t kDefaultDecompBase = 256;

  // Validates every invariant, including that max_mul_depth does not exceed
  // the depth the noise model supports. Throws std::invalid_argument.
  SchemeParams(RingParams ring, uint64_t t, double noise_stddev,
               int max_mul_depth, uint64_t decomp_base);

  // Picks the largest prime q below 2^log_q with q = 1 mod lcm(2n, t).
  // Without an explicit depth, the largest supported depth is used.
  static SchemeParams generate(size_t n, int log_q, uint64_t t,
                               std::optional<int> max_mul_depth = std::nullopt,
                               double noise_stddev = kDefaultNoiseStddev,
                               uint64_t decomp_base = kDefaultDecompBase);

  // n = 2048, 54-bit q, t = 2^16, stddev 3.2, base 2^8.
  static SchemeParams demo();

  const RingParams& ring() const { return ring_; }
  size_t n() const { return ring_.n(); }
  u128 q() const { return ring_.q(); }
  uint64_t t() const { return t_; }
  u128 delta() const { return ring_.q() / t_; }
  double noise_stddev() const { return noise_stddev_; }
  int max_mul_depth() const { return max_mul_depth_; }
  uint64_t decomp_base() const { return decomp_base_; }
  int log_decomp_base() const;
  int num_digits() const;
  int supported_depth() const;
  const ParamsId& id() const { return id_; }

  bool operator==(const SchemeParams& other) const { return id_ == other.id_; }

 private:
  RingParams ring_;
  uint64_t t_;
  double noise_stddev_;
  int max_mul_depth_;
  uint64_t decomp_base_;
  ParamsId id_{};
};

// Scalar plaintext; the value is reduced into [0, t) by every operation that
// consumes it.
struct Plaintext {
  uint64_t value = 0;
  bool operator==(const Plaintext&) const = default;
};

class Ciphertext {
 public:
  Ciphertext(std::vector<RingElement> components, int level, ParamsId params_id);

  const std::vector<RingElement>& components() const { return components_; }
  const RingElement& operator[](size_t i) const { return components_[i]; }
  size_t size() const { return components_.size(); }
  int level() const { return level_; }
  const ParamsId& params_id() const { return params_id_; }

  bool operator==(const Ciphertext&) const = default;

 private:
  std::vector<RingElement> components_;
  int level_;
  ParamsId params_id_;
};

// Public relinearization material. Everything a server may hold.
class EvaluationKeys {
 public:
  // (b_i, a_i) with b_i + a_i*s = w^i * s^2 - e_i for each digit i.
  EvaluationKeys(SchemeParams params,
                 std::vector<std::pair<RingElement, RingElement>> relin_keys);

  const SchemeParams& params() const { return params_; }
  const std::vector<std::pair<RingElement, RingElement>>& relin_keys() const {
    return relin_keys_;
  }

  struct Precomputed;
  const Precomputed& precomputed() const { return *precomputed_; }

 private:
  SchemeParams params_;
  std::vector<std::pair<RingElement, RingElement>> relin_keys_;
  std::shared_ptr<const Precomputed> precomputed_;
};

struct SecretKeyBundle;

class SecretKey {
 public:
  const RingElement& poly() const { return s_; }
  const ParamsId& params_id() const { return params_id_; }

 private:
  SecretKey(RingElement s, ParamsId params_id)
      : s_(std::move(s)), params_id_(params_id) {}

  friend struct SecretKeyBundle;
  friend SecretKeyBundle keygen(const SchemeParams& params, Prng& rng);
  friend SecretKeyBundle make_secret_key_bundle(const SchemeParams& params,
                                                std::span<const int8_t> ternary,
                                                EvaluationKeys eval_keys);

  RingElement s_;
  ParamsId params_id_;
};

// Ternary secret key plus the matching evaluation keys. Only the client side
// ever holds one of these.
struct SecretKeyBundle {
  SecretKey secret;
  EvaluationKeys eval_keys;

  const SchemeParams& params() const { return eval_keys.params(); }
};

SecretKeyBundle keygen(const SchemeParams& params, Prng& rng);

// Rebuilds a bundle from stored key material; checks that the ternary key
// matches the parameters and the evaluation keys.
SecretKeyBundle make_secret_key_bundle(const SchemeParams& params,
                                       std::span<const int8_t> ternary,
                                       EvaluationKeys eval_keys);

Ciphertext encrypt(Plaintext m, const SecretKeyBundle& keys, Prng& rng);
Plaintext decrypt(const Ciphertext& ct, const SecretKeyBundle& keys);

// Noiseless, non-hiding encryption of a public constant: (Delta*c, 0).
Ciphertext encrypt_trivial(Plaintext c, const SchemeParams& params);

Ciphertext he_add(const Ciphertext& a, const Ciphertext& b);
Ciphertext he_sub(const Ciphertext& a, const Ciphertext& b);
Ciphertext he_negate(const Ciphertext& a);
Ciphertext he_mul(const Ciphertext& a, const Ciphertext& b, const EvaluationKeys& keys);
Ciphertext he_add_plain(const Ciphertext& a, Plaintext c, const SchemeParams& params);
Ciphertext he_mul_plain(const Ciphertext& a, Plaintext c, const SchemeParams& params);

// Tensor product without relinearization (three components).
Ciphertext he_mul_no_relin(const Ciphertext& a, const Ciphertext& b,
                           const SchemeParams& params);
Ciphertext relinearize(const Ciphertext& a, const EvaluationKeys& keys);

// log2(q / (2 * max |[t * (c0 + c1 s + ...)]_q|)), clamped at 0.
double noise_budget(const Ciphertext& ct, const SecretKeyBundle& keys);

// Multiplicative depth of the power ladder for a degree-d polynomial.
int power_ladder_depth(int degree);

// P(m) = sum_i coeffs[i] m^i mod t. Powers come from repeated squaring so the
// depth cost is ceil(log2 d). Throws DepthExhausted before doing any work.
Ciphertext eval_poly(std::span<const Plaintext> coeffs, const Ciphertext& ct,
                     const EvaluationKeys& keys);

struct Monomial {
  uint64_t coeff = 0;
  std::vector<int> exponents;  // one per variable
};

// Sum of monomials over several ciphertexts; each monomial is a balanced
// product tree, depth ceil(log2(total degree)).
Ciphertext eval_multivariate(std::span<const Monomial> terms,
                             std::span<const Ciphertext> inputs,
                             const EvaluationKeys& keys);

}  // namespace cryptonet

#endif  // CRYPTONET_SHE_H_
