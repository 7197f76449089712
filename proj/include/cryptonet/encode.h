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

// Fixed-point encoding of reals into Z_t. A value is a mantissa in [0, t)
// read in centered form and divided by 2^scale_log2. There is no rescaling
// under encryption: scales add through multiplications and the client divides
// once after decryption.

#ifndef CRYPTONET_ENCODE_H_
#define CRYPTONET_ENCODE_H_

#include <cstdint>
#include <vector>

#include "cryptonet/errors.h"

namespace cryptonet {

struct FixedPointValue {
  uint64_t mantissa = 0;
  int scale_log2 = 0;
  bool operator==(const FixedPointValue&) const = default;
};

// mantissa = round(x * 2^scale_log2) mod t, ties away from zero. Throws
// PlaintextOverflow unless |x| * 2^scale_log2 < t/2.
FixedPointValue encode_real(double x, int scale_log2, uint64_t t);

// centered(mantissa) / 2^scale_log2.
double decode_real(const FixedPointValue& v, uint64_t t);

// Centered representative in (-t/2, t/2].
int64_t centered_mantissa(uint64_t mantissa, uint64_t t);

enum class ScaleOp { kAdd, kMul };

// add requires equal scales (ScaleMismatch otherwise); mul sums them.
int scale_after(ScaleOp op, int s_a, int s_b);

// Per-wire scale bookkeeping for a circuit whose wires are numbered 0..n-1.
class ScaleTracker {
 public:
  ScaleTracker() = default;
  explicit ScaleTracker(size_t wires) : scales_(wires, kUnset) {}

  void set(size_t wire, int scale_log2);
  int scale(size_t wire) const;
  bool has(size_t wire) const { return wire < scales_.size() && scales_[wire] != kUnset; }
  size_t size() const { return scales_.size(); }

  // Records out = a (op) b and returns the resulting scale.
  int apply(ScaleOp op, size_t out, size_t a, size_t b);
  // Records out = a * plaintext at the given scale.
  int apply_plain(ScaleOp op, size_t out, size_t a, int plain_scale);

 private:
  static constexpr int kUnset = -1;
  void ensure(size_t wire);

  std::vector<int> scales_;
};

}  // namespace cryptonet

#endif  // CRYPTONET_ENCODE_H_
