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

// Exact negacyclic convolution over the integers. Inputs are reduced modulo a
// handful of 62-bit NTT primes, multiplied pointwise in the NTT domain and
// lifted back with Garner's CRT. The result is exact as long as every output
// coefficient is smaller in magnitude than half the product of the primes.

#ifndef CRYPTONET_SRC_EXACT_CONVOLUTION_H_
#define CRYPTONET_SRC_EXACT_CONVOLUTION_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cryptonet/int_types.h"

namespace cryptonet::internal {

// Forward/inverse negacyclic NTT modulo one prime p < 2^62 with p = 1 mod 2n.
class NttTables {
 public:
  NttTables(uint64_t p, size_t n);

  uint64_t modulus() const { return p_; }
  void forward(uint64_t* a) const;
  void inverse(uint64_t* a) const;

 private:
  uint64_t p_;
  size_t n_;
  std::vector<uint64_t> psi_rev_, psi_rev_shoup_;
  std::vector<uint64_t> psi_inv_rev_, psi_inv_rev_shoup_;
  uint64_t n_inv_, n_inv_shoup_;
};

// Residues of one polynomial modulo each prime, in the NTT domain.
struct NttForm {
  std::vector<std::vector<uint64_t>> residues;
};

class ExactConvolution {
 public:
  static constexpr int kMaxPrimes = 4;

  // Shared, immutable instance able to represent results up to
  // 2^(bound_bits) in magnitude. Throws if more than kMaxPrimes are needed.
  static const ExactConvolution& get(size_t n, int bound_bits);

  size_t n() const { return n_; }
  int num_primes() const { return static_cast<int>(tables_.size()); }

  NttForm forward(std::span<const i128> coeffs) const;
  NttForm forward_small(std::span<const int64_t> coeffs) const;
  NttForm zero() const;
  NttForm multiply(const NttForm& a, const NttForm& b) const;
  void multiply_accumulate(NttForm& acc, const NttForm& a,
                           const NttForm& b) const;
  void add_inplace(NttForm& acc, const NttForm& a) const;

  // Inverse transform plus CRT; values centered in (-P/2, P/2].
  std::vector<i256> inverse(NttForm form) const;
  // Same, reduced into [0, q).
  std::vector<u128> inverse_mod(NttForm form, u128 q) const;

 private:
  ExactConvolution(size_t n, int num_primes);

  std::vector<i256> crt(const NttForm& form) const;

  size_t n_;
  std::vector<NttTables> tables_;
  // inv_[i][j] = p_i^{-1} mod p_j for i < j.
  std::vector<std::vector<uint64_t>> inv_;
  i256 product_;
  i256 half_product_;
};

// Global list of NTT primes, largest first: p = 1 mod 2^17, p < 2^62.
const std::vector<uint64_t>& ntt_primes();

}  // namespace cryptonet::internal

#endif  // CRYPTONET_SRC_EXACT_CONVOLUTION_H_
