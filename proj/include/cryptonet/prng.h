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

#ifndef CRYPTONET_PRNG_H_
#define CRYPTONET_PRNG_H_

#include <array>
#include <cstddef>
#include <cstdint>

#include "cryptonet/int_types.h"

namespace cryptonet {

// Deterministic random source: a ChaCha20 keystream keyed by SHA-256 of the
// seed. Every randomized operation in the library takes one of these
// explicitly; there is no global generator.
class Prng {
 public:
  explicit Prng(uint64_t seed);

  uint64_t next_u64();
  uint32_t next_u32() { return static_cast<uint32_t>(next_u64()); }
  bool next_bit();

  // Uniform in [0, bound); bound must be nonzero. Rejection sampling, so the
  // result is exactly uniform.
  uint64_t uniform_below(uint64_t bound);
  u128 uniform_below_u128(u128 bound);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double normal(double mean = 0.0, double stddev = 1.0);

 private:
  void refill();

  static constexpr size_t kBufferBytes = 1024;
  std::array<unsigned char, 32> key_{};
  std::array<unsigned char, kBufferBytes> buffer_{};
  size_t offset_ = kBufferBytes;
  uint64_t block_counter_ = 0;
  uint64_t bit_pool_ = 0;
  int bits_left_ = 0;
};

// Fresh seed from the operating system's entropy source.
uint64_t os_random_seed();

// Process-wide libsodium initialization; safe to call repeatedly.
void ensure_sodium();

}  // namespace cryptonet

#endif  // CRYPTONET_PRNG_H_
