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

#include "cryptonet/noise_model.h"

#include <algorithm>
#include <cmath>

namespace cryptonet {

NoiseModel::NoiseModel(size_t n, u128 q, uint64_t t, double noise_stddev,
                       uint64_t decomp_base)
    : n_(static_cast<double>(n)),
      q_(to_double(q)),
      t_(static_cast<double>(t)),
      r_t_(static_cast<double>(q % t)),
      base_(static_cast<double>(decomp_base)) {
  // The sampler is binomial with k = round(2 sigma^2) coin pairs, variance k/2.
  const double k = std::max(1.0, std::round(2.0 * noise_stddev * noise_stddev));
  sigma_eff_ = std::sqrt(k / 2.0);
  const int log_base = bit_length(decomp_base) - 1;
  digits_ = std::ceil(static_cast<double>(bit_length(q)) / log_base);
}

NoiseEstimate NoiseModel::fresh() const { return fresh(t_ / 2.0); }

NoiseEstimate NoiseModel::fresh(double msg_bound) const {
  NoiseEstimate e;
  e.rms = t_ * sigma_eff_;
  e.fixed = r_t_ * msg_bound;
  e.msg = msg_bound;
  e.mask_rms = t_ * std::sqrt(n_ / 18.0);
  return e;
}

NoiseEstimate NoiseModel::trivial(double msg_bound) const {
  NoiseEstimate e;
  e.fixed = r_t_ * msg_bound;
  e.msg = msg_bound;
  return e;
}

NoiseEstimate NoiseModel::add(const NoiseEstimate& a, const NoiseEstimate& b) const {
  NoiseEstimate e;
  e.rms = std::hypot(a.rms, b.rms);
  e.fixed = a.fixed + b.fixed;
  e.msg = std::min(a.msg + b.msg, t_ / 2.0);
  e.mask_rms = std::max(a.mask_rms, b.mask_rms);
  e.key_degree = std::max(a.key_degree, b.key_degree);
  return e;
}

NoiseEstimate NoiseModel::add_plain(const NoiseEstimate& a, double c_abs) const {
  NoiseEstimate e = a;
  e.fixed += r_t_ * c_abs;
  e.msg = std::min(a.msg + c_abs, t_ / 2.0);
  return e;
}

NoiseEstimate NoiseModel::mul_plain(const NoiseEstimate& a, double c_abs) const {
  NoiseEstimate e = a;
  e.rms *= c_abs;
  e.fixed *= c_abs;
  e.msg = std::min(a.msg * c_abs, t_ / 2.0);
  return e;
}

NoiseEstimate NoiseModel::product(const NoiseEstimate& a, const NoiseEstimate& b,
                                  bool coherent) const {
  // t*w_a = q*K_a + v_a with K_a = m_a + (mask part). The product noise is
  // K_a v_b + K_b v_a + v_a v_b / q plus rounding and relinearization.
  auto cross = [&](const NoiseEstimate& k, const NoiseEstimate& v) {
    return k.mask_rms * k.mask_rms * (n_ * v.rms * v.rms + v.fixed * v.fixed) *
               (v.key_degree + 1) +
           k.msg * k.msg * v.rms * v.rms;
  };
  double var_cross = cross(a, b) + cross(b, a);
  if (coherent) {
    const double s = std::sqrt(cross(a, b)) + std::sqrt(cross(b, a));
    var_cross = s * s;
  }
  const double var_quad = n_ * a.rms * a.rms * b.rms * b.rms / (q_ * q_);
  // Coefficients of s^2 have variance 8n/9 for ternary s.
  const double var_round =
      t_ * t_ * (1.0 + 2.0 * n_ / 3.0 + 8.0 * n_ * n_ / 9.0) / 12.0;
  const double var_relin =
      t_ * t_ * digits_ * n_ * (base_ * base_ / 3.0) * sigma_eff_ * sigma_eff_;

  NoiseEstimate e;
  e.rms = std::sqrt(var_cross + var_quad + var_round + var_relin);
  e.fixed = a.msg * b.fixed + b.msg * a.fixed + a.fixed * b.fixed / q_;
  e.msg = std::min(a.msg * b.msg, t_ / 2.0);
  e.mask_rms = t_ * std::sqrt(n_ / 18.0);
  e.key_degree = std::max(a.key_degree, b.key_degree) + 1;
  return e;
}

NoiseEstimate NoiseModel::mul(const NoiseEstimate& a, const NoiseEstimate& b) const {
  return product(a, b, false);
}

NoiseEstimate NoiseModel::square(const NoiseEstimate& a) const { return product(a, a, true); }

NoiseEstimate NoiseModel::add_correlated(const NoiseEstimate& a,
                                         const NoiseEstimate& b) const {
  NoiseEstimate e = add(a, b);
  e.rms = a.rms + b.rms;
  return e;
}

NoiseEstimate NoiseModel::mul_correlated(const NoiseEstimate& a,
                                         const NoiseEstimate& b) const {
  return product(a, b, true);
}

double NoiseModel::bound(const NoiseEstimate& e) const {
  return kTailFactor * e.rms + e.fixed;
}

double NoiseModel::budget(const NoiseEstimate& e) const {
  const double b = std::max(bound(e), 1.0);
  return std::log2(q_ / (2.0 * b));
}

int NoiseModel::supported_depth() const {
  NoiseEstimate e = fresh();
  if (budget(e) <= 0.0) return -1;
  int depth = 0;
  while (depth < 64) {
    e = square(e);
    if (budget(e) <= 0.0) break;
    ++depth;
  }
  return depth;
}

}  // namespace cryptonet
