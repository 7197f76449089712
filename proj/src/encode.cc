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

#include "cryptonet/encode.h"

#include <cmath>
#include <stdexcept>

namespace cryptonet {

FixedPointValue encode_real(double x, int scale_log2, uint64_t t) {
  if (t < 2) throw std::invalid_argument("plaintext modulus must be at least 2");
  if (scale_log2 < 0) throw std::invalid_argument("negative scale");
  const double scaled = std::ldexp(x, scale_log2);
  if (!std::isfinite(scaled)) throw PlaintextOverflow("non-finite input");
  if (!(std::fabs(scaled) < static_cast<double>(t) / 2.0)) throw PlaintextOverflow();
  // std::round rounds halfway cases away from zero.
  const auto r = static_cast<int64_t>(std::round(scaled));
  const int64_t ti = static_cast<int64_t>(t);
  const int64_t m = ((r % ti) + ti) % ti;
  return {static_cast<uint64_t>(m), scale_log2};
}

int64_t centered_mantissa(uint64_t mantissa, uint64_t t) {
  const uint64_t m = mantissa % t;
  return m > t / 2 ? static_cast<int64_t>(m) - static_cast<int64_t>(t)
                   : static_cast<int64_t>(m);
}

double decode_real(const FixedPointValue& v, uint64_t t) {
  return std::ldexp(static_cast<double>(centered_mantissa(v.mantissa, t)), -v.scale_log2);
}

int scale_after(ScaleOp op, int s_a, int s_b) {
  if (op == ScaleOp::kAdd) {
    if (s_a != s_b) throw ScaleMismatch();
    return s_a;
  }
  return s_a + s_b;
}

void ScaleTracker::ensure(size_t wire) {
  if (wire >= scales_.size()) scales_.resize(wire + 1, kUnset);
}

void ScaleTracker::set(size_t wire, int scale_log2) {
  if (scale_log2 < 0) throw std::invalid_argument("negative scale");
  ensure(wire);
  scales_[wire] = scale_log2;
}

int ScaleTracker::scale(size_t wire) const {
  if (!has(wire)) throw std::out_of_range("wire has no scale");
  return scales_[wire];
}

int ScaleTracker::apply(ScaleOp op, size_t out, size_t a, size_t b) {
  const int s = scale_after(op, scale(a), scale(b));
  set(out, s);
  return s;
}

int ScaleTracker::apply_plain(ScaleOp op, size_t out, size_t a, int plain_scale) {
  const int s = scale_after(op, scale(a), plain_scale);
  set(out, s);
  return s;
}

}  // namespace cryptonet
