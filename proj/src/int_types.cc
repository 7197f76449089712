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

#include "cryptonet/int_types.h"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace cryptonet {

int bit_length(u128 x) {
  const auto hi = static_cast<uint64_t>(x >> 64);
  if (hi != 0) return 128 - __builtin_clzll(hi);
  const auto lo = static_cast<uint64_t>(x);
  return lo == 0 ? 0 : 64 - __builtin_clzll(lo);
}

std::string to_string(u128 x) {
  if (x == 0) return "0";
  std::string out;
  while (x != 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(x % 10)));
    x /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::string to_string(i128 x) {
  return x < 0 ? "-" + to_string(abs_i128(x)) : to_string(static_cast<u128>(x));
}

u128 parse_u128(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty integer literal");
  u128 v = 0;
  constexpr u128 kMax = ~u128{0};
  for (char c : text) {
    if (c < '0' || c > '9') {
      throw std::invalid_argument("invalid integer literal: " + std::string(text));
    }
    const auto digit = static_cast<unsigned>(c - '0');
    if (v > (kMax - digit) / 10) {
      throw std::invalid_argument("integer literal exceeds 128 bits");
    }
    v = v * 10 + digit;
  }
  return v;
}

double to_double(u128 x) {
  return static_cast<double>(static_cast<uint64_t>(x >> 64)) * 0x1.0p64 +
         static_cast<double>(static_cast<uint64_t>(x));
}

double to_double(i128 x) {
  return x < 0 ? -to_double(abs_i128(x)) : to_double(static_cast<u128>(x));
}

u128 mulmod(u128 a, u128 b, u128 m) {
  if (m <= UINT64_MAX) return (a * b) % m;
  u256 p = u256(a) * u256(b);
  return static_cast<u128>(p % u256(m));
}

u128 powmod(u128 base, u128 exp, u128 m) {
  u128 result = 1 % m;
  base %= m;
  while (exp != 0) {
    if (exp & 1) result = mulmod(result, base, m);
    base = mulmod(base, base, m);
    exp >>= 1;
  }
  return result;
}

u128 reduce_signed(i128 x, u128 m) {
  if (x >= 0) return static_cast<u128>(x) % m;
  const u128 r = abs_i128(x) % m;
  return r == 0 ? 0 : m - r;
}

u128 reduce_signed(const i256& x, u128 m) {
  i256 r = x % i256(m);  // sign follows the dividend
  if (r < 0) r += i256(m);
  return static_cast<u128>(r);
}

bool is_probable_prime(u128 n) {
  if (n < 2) return false;
  static constexpr std::array<uint64_t, 20> kBases = {
      2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
  for (uint64_t p : kBases) {
    if (n == p) return true;
    if (n % p == 0) return false;
  }
  u128 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (uint64_t a : kBases) {
    u128 x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

}  // namespace cryptonet
