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

// Static noise estimates for the scheme in she.h.
//
// The tracked quantity is the invariant noise v = [t * (c0 + c1 s)]_q, one
// value per ring coefficient. Each estimate carries a random part (per
// coefficient standard deviation) and a deterministic worst-case part; the
// bound used for budgets is kTailFactor * rms + fixed. The model is heuristic
// (independence of coefficients is assumed) but intentionally pessimistic,
// and tests compare it against measured budgets.

#ifndef CRYPTONET_NOISE_MODEL_H_
#define CRYPTONET_NOISE_MODEL_H_

#include <cstddef>
#include <cstdint>

#include "cryptonet/int_types.h"

namespace cryptonet {

struct NoiseEstimate {
  double rms = 0.0;
  double fixed = 0.0;
  // Bound on the centered message magnitude.
  double msg = 0.0;
  // Standard deviation of t*c1/q*s per coefficient; zero for trivial
  // encryptions whose c1 vanishes.
  double mask_rms = 0.0;
  // Highest power of s the random part depends on. Products of noise terms
  // that share powers of s are correlated, which inflates the variance of a
  // coefficient of s^k by roughly k! over the independent estimate.
  int key_degree = 0;
};

class NoiseModel {
 public:
  static constexpr double kTailFactor = 7.0;

  NoiseModel(size_t n, u128 q, uint64_t t, double noise_stddev, uint64_t decomp_base);

  NoiseEstimate fresh() const;
  NoiseEstimate fresh(double msg_bound) const;
  NoiseEstimate trivial(double msg_bound) const;

  NoiseEstimate add(const NoiseEstimate& a, const NoiseEstimate& b) const;
  // c_abs is the centered magnitude of the plaintext operand.
  NoiseEstimate add_plain(const NoiseEstimate& a, double c_abs) const;
  NoiseEstimate mul_plain(const NoiseEstimate& a, double c_abs) const;
  NoiseEstimate mul(const NoiseEstimate& a, const NoiseEstimate& b) const;
  // he_mul(x, x): both cross terms coincide and add coherently.
  NoiseEstimate square(const NoiseEstimate& a) const;
  // Operands whose noise derives from shared ciphertexts: random parts are
  // combined linearly instead of in quadrature.
  NoiseEstimate add_correlated(const NoiseEstimate& a, const NoiseEstimate& b) const;
  NoiseEstimate mul_correlated(const NoiseEstimate& a, const NoiseEstimate& b) const;

  double bound(const NoiseEstimate& e) const;
  // log2(q / (2 * bound)); negative once decryption is no longer guaranteed.
  double budget(const NoiseEstimate& e) const;

  // Number of successive squarings of a fresh ciphertext (full-range
  // message) that keep a positive budget.
  int supported_depth() const;

  // Effective standard deviation of the truncated binomial sampler.
  double effective_stddev() const { return sigma_eff_; }

 private:
  NoiseEstimate product(const NoiseEstimate& a, const NoiseEstimate& b, bool coherent) const;

  double n_;
  double q_;
  double t_;
  double r_t_;
  double sigma_eff_;
  double base_;
  double digits_;
};

}  // namespace cryptonet

#endif  // CRYPTONET_NOISE_MODEL_H_
