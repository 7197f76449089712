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

#include "cryptonet/ring.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "exact_convolution.h"

namespace cryptonet {
namespace {

void check_same_ring(const RingElement& a, const RingElement& b) {
  if (!(a.params() == b.params())) throw std::invalid_argument("ring mismatch");
}

// Bits needed to hold a negacyclic product of two centered operands.
int product_bound_bits(const RingParams& params) {
  return 2 * params.log_q() + bit_length(params.n()) - 1;
}

}  // namespace

RingParams::RingParams(size_t n, u128 q) : n_(n), q_(q) {
  if (n < 2 || (n & (n - 1)) != 0 || n > kMaxDimension) {
    throw std::invalid_argument("ring dimension must be a power of two in [2, 65536]");
  }
  if (q <= 1 || (q & 1) == 0) {
    throw std::invalid_argument("ring modulus must be odd and greater than 1");
  }
  if (bit_length(q) > kMaxModulusBits) {
    throw std::invalid_argument("ring modulus exceeds 116 bits");
  }
}

RingElement::RingElement(const RingParams& params)
    : params_(params), coeffs_(params.n(), 0) {}

RingElement::RingElement(const RingParams& params, std::vector<u128> coeffs)
    : params_(params), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != params_.n()) {
    throw std::invalid_argument("coefficient count does not match ring dimension");
  }
  for (u128 c : coeffs_) {
    if (c >= params_.q()) throw std::invalid_argument("coefficient not reduced mod q");
  }
}

RingElement RingElement::from_signed(const RingParams& params,
                                     std::span<const i128> coeffs) {
  if (coeffs.size() != params.n()) {
    throw std::invalid_argument("coefficient count does not match ring dimension");
  }
  std::vector<u128> out(params.n());
  for (size_t i = 0; i < out.size(); ++i) out[i] = reduce_signed(coeffs[i], params.q());
  return RingElement(params, std::move(out));
}

RingElement RingElement::monomial(const RingParams& params, size_t k, i128 c) {
  RingElement out(params);
  // x^n = -1
  const bool negate = (k / params.n()) % 2 == 1;
  out.coeffs_[k % params.n()] = reduce_signed(negate ? -c : c, params.q());
  return out;
}

RingElement RingElement::constant(const RingParams& params, i128 c) {
  return monomial(params, 0, c);
}

std::vector<i128> RingElement::centered() const {
  std::vector<i128> out(coeffs_.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = centered(i);
  return out;
}

u128 RingElement::infinity_norm() const {
  u128 m = 0;
  for (size_t i = 0; i < coeffs_.size(); ++i) m = std::max(m, abs_i128(centered(i)));
  return m;
}

bool RingElement::is_zero() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](u128 c) { return c == 0; });
}

RingElement ring_add(const RingElement& a, const RingElement& b) {
  check_same_ring(a, b);
  const u128 q = a.params().q();
  std::vector<u128> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) {
    u128 s = a[i] + b[i];  // q < 2^116, no overflow
    out[i] = s >= q ? s - q : s;
  }
  return RingElement(a.params(), std::move(out));
}

RingElement ring_sub(const RingElement& a, const RingElement& b) {
  check_same_ring(a, b);
  const u128 q = a.params().q();
  std::vector<u128> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a[i] >= b[i] ? a[i] - b[i] : a[i] + q - b[i];
  return RingElement(a.params(), std::move(out));
}

RingElement ring_neg(const RingElement& a) {
  const u128 q = a.params().q();
  std::vector<u128> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a[i] == 0 ? 0 : q - a[i];
  return RingElement(a.params(), std::move(out));
}

RingElement ring_mul(const RingElement& a, const RingElement& b) {
  check_same_ring(a, b);
  const RingParams& params = a.params();
  const auto& conv =
      internal::ExactConvolution::get(params.n(), product_bound_bits(params));
  const auto ca = a.centered();
  const auto cb = b.centered();
  auto prod = conv.multiply(conv.forward(ca), conv.forward(cb));
  return RingElement(params, conv.inverse_mod(std::move(prod), params.q()));
}

RingElement ring_mul_schoolbook(const RingElement& a, const RingElement& b) {
  check_same_ring(a, b);
  const size_t n = a.size();
  const u128 q = a.params().q();
  std::vector<u128> out(n, 0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      const u128 p = mulmod(a[i], b[j], q);
      const size_t k = i + j;
      if (k < n) {
        out[k] = (out[k] + p) % q;
      } else {
        out[k - n] = out[k - n] >= p ? out[k - n] - p : out[k - n] + q - p;
      }
    }
  }
  return RingElement(a.params(), std::move(out));
}

RingElement ring_scale(const RingElement& a, i128 c) {
  const u128 q = a.params().q();
  const u128 cm = reduce_signed(c, q);
  std::vector<u128> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = mulmod(a[i], cm, q);
  return RingElement(a.params(), std::move(out));
}

RingElement sample_uniform(const RingParams& params, Prng& rng) {
  std::vector<u128> out(params.n());
  for (auto& c : out) c = rng.uniform_below_u128(params.q());
  return RingElement(params, std::move(out));
}

int64_t noise_bound(double stddev) {
  const auto k = std::max<int64_t>(1, std::llround(2.0 * stddev * stddev));
  return std::min<int64_t>(k, static_cast<int64_t>(std::floor(6.0 * stddev)));
}

RingElement sample_noise(const RingParams& params, double stddev, Prng& rng) {
  if (!(stddev > 0.0)) throw std::invalid_argument("noise stddev must be positive");
  const auto k = std::max<int64_t>(1, std::llround(2.0 * stddev * stddev));
  const int64_t bound = noise_bound(stddev);
  std::vector<i128> out(params.n());
  for (auto& c : out) {
    int64_t v;
    do {
      v = 0;
      for (int64_t i = 0; i < k; ++i) {
        v += static_cast<int64_t>(rng.next_bit()) - static_cast<int64_t>(rng.next_bit());
      }
    } while (v > bound || v < -bound);
    c = v;
  }
  return RingElement::from_signed(params, out);
}

RingElement sample_ternary(const RingParams& params, Prng& rng) {
  std::vector<i128> out(params.n());
  for (auto& c : out) c = static_cast<i128>(rng.uniform_below(3)) - 1;
  return RingElement::from_signed(params, out);
}

}  // namespace cryptonet
