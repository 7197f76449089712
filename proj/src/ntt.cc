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

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>

#include "exact_convolution.h"

namespace cryptonet::internal {
namespace {

constexpr int kLogMaxTwoN = 17;  // supports n up to 2^16

inline uint64_t add_mod(uint64_t a, uint64_t b, uint64_t p) {
  uint64_t s = a + b;
  return s >= p ? s - p : s;
}

inline uint64_t sub_mod(uint64_t a, uint64_t b, uint64_t p) {
  return a >= b ? a - b : a + p - b;
}

inline uint64_t mul_mod(uint64_t a, uint64_t b, uint64_t p) {
  return static_cast<uint64_t>((static_cast<u128>(a) * b) % p);
}

inline uint64_t shoup(uint64_t w, uint64_t p) {
  return static_cast<uint64_t>((static_cast<u128>(w) << 64) / p);
}

// a * w mod p with precomputed w' = floor(w 2^64 / p); needs p < 2^63.
inline uint64_t mul_shoup(uint64_t a, uint64_t w, uint64_t w_shoup,
                          uint64_t p) {
  const auto q = static_cast<uint64_t>((static_cast<u128>(a) * w_shoup) >> 64);
  uint64_t r = a * w - q * p;
  return r >= p ? r - p : r;
}

uint64_t pow_mod(uint64_t base, uint64_t exp, uint64_t p) {
  uint64_t result = 1;
  while (exp != 0) {
    if (exp & 1) result = mul_mod(result, base, p);
    base = mul_mod(base, base, p);
    exp >>= 1;
  }
  return result;
}

size_t bit_reverse(size_t x, int bits) {
  size_t r = 0;
  for (int i = 0; i < bits; ++i) {
    r = (r << 1) | (x & 1);
    x >>= 1;
  }
  return r;
}

// Element of multiplicative order exactly 2^kLogMaxTwoN.
uint64_t max_order_root(uint64_t p) {
  const uint64_t cofactor = (p - 1) >> kLogMaxTwoN;
  for (uint64_t x = 2;; ++x) {
    uint64_t r = pow_mod(x, cofactor, p);
    if (pow_mod(r, uint64_t{1} << (kLogMaxTwoN - 1), p) != 1) return r;
  }
}

}  // namespace

const std::vector<uint64_t>& ntt_primes() {
  static const std::vector<uint64_t> primes = [] {
    std::vector<uint64_t> out;
    const uint64_t step = uint64_t{1} << kLogMaxTwoN;
    uint64_t k = ((uint64_t{1} << 62) - 1) / step;
    while (out.size() < ExactConvolution::kMaxPrimes) {
      const uint64_t p = k * step + 1;
      if (is_probable_prime(p)) out.push_back(p);
      --k;
    }
    return out;
  }();
  return primes;
}

NttTables::NttTables(uint64_t p, size_t n) : p_(p), n_(n) {
  int log_n = 0;
  while ((size_t{1} << log_n) < n) ++log_n;
  const uint64_t root = max_order_root(p);
  const uint64_t psi = pow_mod(root, (uint64_t{1} << kLogMaxTwoN) / (2 * n), p);
  const uint64_t psi_inv = pow_mod(psi, p - 2, p);
  psi_rev_.resize(n);
  psi_inv_rev_.resize(n);
  psi_rev_shoup_.resize(n);
  psi_inv_rev_shoup_.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const size_t e = bit_reverse(i, log_n);
    psi_rev_[i] = pow_mod(psi, e, p);
    psi_inv_rev_[i] = pow_mod(psi_inv, e, p);
    psi_rev_shoup_[i] = shoup(psi_rev_[i], p);
    psi_inv_rev_shoup_[i] = shoup(psi_inv_rev_[i], p);
  }
  n_inv_ = pow_mod(n % p, p - 2, p);
  n_inv_shoup_ = shoup(n_inv_, p);
}

void NttTables::forward(uint64_t* a) const {
  size_t t = n_;
  for (size_t m = 1; m < n_; m <<= 1) {
    t >>= 1;
    for (size_t i = 0; i < m; ++i) {
      const size_t j1 = 2 * i * t;
      const uint64_t s = psi_rev_[m + i];
      const uint64_t s_shoup = psi_rev_shoup_[m + i];
      for (size_t j = j1; j < j1 + t; ++j) {
        const uint64_t u = a[j];
        const uint64_t v = mul_shoup(a[j + t], s, s_shoup, p_);
        a[j] = add_mod(u, v, p_);
        a[j + t] = sub_mod(u, v, p_);
      }
    }
  }
}

void NttTables::inverse(uint64_t* a) const {
  size_t t = 1;
  for (size_t m = n_; m > 1; m >>= 1) {
    size_t j1 = 0;
    const size_t h = m >> 1;
    for (size_t i = 0; i < h; ++i) {
      const uint64_t s = psi_inv_rev_[h + i];
      const uint64_t s_shoup = psi_inv_rev_shoup_[h + i];
      for (size_t j = j1; j < j1 + t; ++j) {
        const uint64_t u = a[j];
        const uint64_t v = a[j + t];
        a[j] = add_mod(u, v, p_);
        a[j + t] = mul_shoup(sub_mod(u, v, p_), s, s_shoup, p_);
      }
      j1 += 2 * t;
    }
    t <<= 1;
  }
  for (size_t j = 0; j < n_; ++j) a[j] = mul_shoup(a[j], n_inv_, n_inv_shoup_, p_);
}

ExactConvolution::ExactConvolution(size_t n, int num_primes) : n_(n) {
  const auto& primes = ntt_primes();
  product_ = 1;
  for (int i = 0; i < num_primes; ++i) {
    tables_.emplace_back(primes[i], n);
    product_ *= primes[i];
  }
  half_product_ = product_ / 2;
  inv_.assign(num_primes, std::vector<uint64_t>(num_primes, 0));
  for (int i = 0; i < num_primes; ++i) {
    for (int j = i + 1; j < num_primes; ++j) {
      inv_[i][j] = pow_mod(primes[i] % primes[j], primes[j] - 2, primes[j]);
    }
  }
}

const ExactConvolution& ExactConvolution::get(size_t n, int bound_bits) {
  if (n < 2 || (n & (n - 1)) != 0 || n > (size_t{1} << (kLogMaxTwoN - 1))) {
    throw std::invalid_argument("exact convolution: unsupported ring dimension");
  }
  const auto& primes = ntt_primes();
  int k = 0;
  double bits = 0.0;
  while (bits - 1.0 < bound_bits + 0.5) {
    if (k == kMaxPrimes) {
      throw std::invalid_argument(
          "exact convolution: coefficient bound exceeds CRT capacity");
    }
    bits += std::log2(static_cast<double>(primes[k]));
    ++k;
  }
  static std::mutex mu;
  static std::map<std::pair<size_t, int>, std::unique_ptr<ExactConvolution>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{n, k}];
  if (!slot) slot.reset(new ExactConvolution(n, k));
  return *slot;
}

NttForm ExactConvolution::forward(std::span<const i128> coeffs) const {
  NttForm out;
  out.residues.resize(tables_.size());
  for (size_t j = 0; j < tables_.size(); ++j) {
    const uint64_t p = tables_[j].modulus();
    auto& r = out.residues[j];
    r.resize(n_);
    for (size_t i = 0; i < n_; ++i) {
      i128 v = coeffs[i] % static_cast<i128>(p);
      if (v < 0) v += p;
      r[i] = static_cast<uint64_t>(v);
    }
    tables_[j].forward(r.data());
  }
  return out;
}

NttForm ExactConvolution::forward_small(std::span<const int64_t> coeffs) const {
  NttForm out;
  out.residues.resize(tables_.size());
  for (size_t j = 0; j < tables_.size(); ++j) {
    const auto p = static_cast<int64_t>(tables_[j].modulus());
    auto& r = out.residues[j];
    r.resize(n_);
    for (size_t i = 0; i < n_; ++i) {
      int64_t v = coeffs[i] % p;
      r[i] = static_cast<uint64_t>(v < 0 ? v + p : v);
    }
    tables_[j].forward(r.data());
  }
  return out;
}

NttForm ExactConvolution::zero() const {
  NttForm out;
  out.residues.assign(tables_.size(), std::vector<uint64_t>(n_, 0));
  return out;
}

NttForm ExactConvolution::multiply(const NttForm& a, const NttForm& b) const {
  NttForm out = zero();
  multiply_accumulate(out, a, b);
  return out;
}

void ExactConvolution::multiply_accumulate(NttForm& acc, const NttForm& a,
                                           const NttForm& b) const {
  for (size_t j = 0; j < tables_.size(); ++j) {
    const uint64_t p = tables_[j].modulus();
    auto& r = acc.residues[j];
    const auto& x = a.residues[j];
    const auto& y = b.residues[j];
    for (size_t i = 0; i < n_; ++i) r[i] = add_mod(r[i], mul_mod(x[i], y[i], p), p);
  }
}

void ExactConvolution::add_inplace(NttForm& acc, const NttForm& a) const {
  for (size_t j = 0; j < tables_.size(); ++j) {
    const uint64_t p = tables_[j].modulus();
    for (size_t i = 0; i < n_; ++i) {
      acc.residues[j][i] = add_mod(acc.residues[j][i], a.residues[j][i], p);
    }
  }
}

std::vector<i256> ExactConvolution::crt(const NttForm& form) const {
  const size_t k = tables_.size();
  std::vector<i256> out(n_);
  std::vector<uint64_t> y(k);
  for (size_t i = 0; i < n_; ++i) {
    for (size_t j = 0; j < k; ++j) {
      const uint64_t p = tables_[j].modulus();
      uint64_t v = form.residues[j][i];
      for (size_t l = 0; l < j; ++l) {
        v = mul_mod(sub_mod(v, y[l] % p, p), inv_[l][j], p);
      }
      y[j] = v;
    }
    i256 x = y[k - 1];
    for (size_t l = k - 1; l-- > 0;) {
      x *= tables_[l].modulus();
      x += y[l];
    }
    if (x > half_product_) x -= product_;
    out[i] = std::move(x);
  }
  return out;
}

std::vector<i256> ExactConvolution::inverse(NttForm form) const {
  for (size_t j = 0; j < tables_.size(); ++j) tables_[j].inverse(form.residues[j].data());
  return crt(form);
}

std::vector<u128> ExactConvolution::inverse_mod(NttForm form, u128 q) const {
  auto exact = inverse(std::move(form));
  std::vector<u128> out(n_);
  for (size_t i = 0; i < n_; ++i) out[i] = reduce_signed(exact[i], q);
  return out;
}

}  // namespace cryptonet::internal
