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

// Arithmetic in R_q = Z_q[x]/(x^n + 1).
//
// Coefficients are always kept in canonical form [0, q); the centered form
// (-q/2, q/2] is computed on demand. q is an odd run-time modulus of at most
// kMaxModulusBits bits. Multiplication goes through an exact integer
// convolution (several NTT primes + CRT) and is checked against the
// schoolbook reference in the tests.

#ifndef CRYPTONET_RING_H_
#define CRYPTONET_RING_H_

#include <cstddef>
#include <span>
#include <vector>

#include "cryptonet/int_types.h"
#include "cryptonet/prng.h"

namespace cryptonet {

class RingParams {
 public:
  static constexpr int kMaxModulusBits = 116;
  static constexpr size_t kMaxDimension = size_t{1} << 16;

  // Throws std::invalid_argument unless n is a power of two in
  // [2, kMaxDimension] and q is odd with 1 < q < 2^kMaxModulusBits.
  RingParams(size_t n, u128 q);

  size_t n() const { return n_; }
  u128 q() const { return q_; }
  int log_q() const { return bit_length(q_); }

  bool operator==(const RingParams&) const = default;

 private:
  size_t n_;
  u128 q_;
};

class RingElement {
 public:
  explicit RingElement(const RingParams& params);  // zero element

  // Coefficients must already lie in [0, q).
  RingElement(const RingParams& params, std::vector<u128> coeffs);
  // Arbitrary signed coefficients, reduced mod q.
  static RingElement from_signed(const RingParams& params,
                                 std::span<const i128> coeffs);
  // c * x^k.
  static RingElement monomial(const RingParams& params, size_t k, i128 c = 1);
  static RingElement constant(const RingParams& params, i128 c);

  const RingParams& params() const { return params_; }
  size_t size() const { return coeffs_.size(); }
  u128 operator[](size_t i) const { return coeffs_[i]; }
  std::span<const u128> coeffs() const { return coeffs_; }

  i128 centered(size_t i) const { return cryptonet::centered(coeffs_[i], params_.q()); }
  std::vector<i128> centered() const;
  // Largest centered coefficient magnitude.
  u128 infinity_norm() const;
  bool is_zero() const;

  bool operator==(const RingElement&) const = default;

 private:
  RingParams params_;
  std::vector<u128> coeffs_;
};

RingElement ring_add(const RingElement& a, const RingElement& b);
RingElement ring_sub(const RingElement& a, const RingElement& b);
RingElement ring_neg(const RingElement& a);
RingElement ring_mul(const RingElement& a, const RingElement& b);
// O(n^2) multiply-then-reduce reference.
RingElement ring_mul_schoolbook(const RingElement& a, const RingElement& b);
RingElement ring_scale(const RingElement& a, i128 c);

// Independent uniform coefficients in [0, q).
RingElement sample_uniform(const RingParams& params, Prng& rng);
// Centered binomial noise with k = max(1, round(2 stddev^2)) coin pairs,
// redrawn when |x| > 6 stddev; requires stddev > 0.
RingElement sample_noise(const RingParams& params, double stddev, Prng& rng);
// Uniform ternary coefficients in {-1, 0, 1}.
RingElement sample_ternary(const RingParams& params, Prng& rng);

// Largest |sample| sample_noise can return.
int64_t noise_bound(double stddev);

}  // namespace cryptonet

#endif  // CRYPTONET_RING_H_
