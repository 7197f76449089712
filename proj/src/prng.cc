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

#include "cryptonet/prng.h"

#include <sodium.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

namespace cryptonet {

void ensure_sodium() {
  static const int status = sodium_init();
  if (status < 0) throw std::runtime_error("libsodium initialization failed");
}

Prng::Prng(uint64_t seed) {
  ensure_sodium();
  static constexpr char kDomain[] = "cryptonet.prng.v1";
  unsigned char material[sizeof(kDomain) + 8];
  std::memcpy(material, kDomain, sizeof(kDomain));
  for (int i = 0; i < 8; ++i) {
    material[sizeof(kDomain) + i] = static_cast<unsigned char>(seed >> (8 * i));
  }
  crypto_hash_sha256(key_.data(), material, sizeof(material));
}

void Prng::refill() {
  static const std::array<unsigned char, crypto_stream_chacha20_NONCEBYTES>
      kNonce{};
  std::memset(buffer_.data(), 0, buffer_.size());
  crypto_stream_chacha20_xor_ic(buffer_.data(), buffer_.data(), buffer_.size(),
                                kNonce.data(), block_counter_, key_.data());
  block_counter_ += kBufferBytes / 64;
  offset_ = 0;
}

uint64_t Prng::next_u64() {
  if (offset_ + 8 > kBufferBytes) refill();
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<uint64_t>(buffer_[offset_ + i]) << (8 * i);
  }
  offset_ += 8;
  return v;
}

bool Prng::next_bit() {
  if (bits_left_ == 0) {
    bit_pool_ = next_u64();
    bits_left_ = 64;
  }
  bool bit = bit_pool_ & 1;
  bit_pool_ >>= 1;
  --bits_left_;
  return bit;
}

uint64_t Prng::uniform_below(uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below: zero bound");
  // Largest multiple of bound that fits; values at or above it are rejected.
  const uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
  for (;;) {
    uint64_t v = next_u64();
    if (v <= limit) return v % bound;
  }
}

u128 Prng::uniform_below_u128(u128 bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below: zero bound");
  if (bound <= UINT64_MAX) return uniform_below(static_cast<uint64_t>(bound));
  const int bits = bit_length(bound - 1);
  const u128 mask = bits == 128 ? ~u128{0} : ((u128{1} << bits) - 1);
  for (;;) {
    u128 v = (static_cast<u128>(next_u64()) << 64) | next_u64();
    v &= mask;
    if (v < bound) return v;
  }
}

double Prng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Prng::normal(double mean, double stddev) {
  // Box-Muller; one draw per call keeps the stream position predictable.
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
}

uint64_t os_random_seed() {
  ensure_sodium();
  uint64_t seed = 0;
  randombytes_buf(&seed, sizeof(seed));
  return seed;
}

}  // namespace cryptonet
