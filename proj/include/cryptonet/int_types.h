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

#ifndef CRYPTONET_INT_TYPES_H_
#define CRYPTONET_INT_TYPES_H_

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace cryptonet {

using u128 = unsigned __int128;
using i128 = __int128;
using i256 = boost::multiprecision::int256_t;
using u256 = boost::multiprecision::uint256_t;

// Number of significant bits; bit_length(0) == 0.
int bit_length(u128 x);

// Decimal conversions. parse_u128 throws std::invalid_argument on anything
// that is not a plain non-negative decimal integer that fits in 128 bits.
std::string to_string(u128 x);
std::string to_string(i128 x);
u128 parse_u128(std::string_view text);

double to_double(u128 x);
double to_double(i128 x);
inline double log2_u128(u128 x) { return x == 0 ? 0.0 : std::log2(to_double(x)); }

// (a * b) mod m for a, b < m.
u128 mulmod(u128 a, u128 b, u128 m);
u128 powmod(u128 base, u128 exp, u128 m);

// Reduces a signed value into [0, m).
u128 reduce_signed(i128 x, u128 m);
u128 reduce_signed(const i256& x, u128 m);

// Maps x in [0, m) to the centered range (-m/2, m/2].
inline i128 centered(u128 x, u128 m) {
  return x > m / 2 ? static_cast<i128>(x) - static_cast<i128>(m)
                   : static_cast<i128>(x);
}

inline u128 abs_i128(i128 x) {
  return x < 0 ? static_cast<u128>(-x) : static_cast<u128>(x);
}

// Probabilistic Miller-Rabin with fixed bases; deterministic below 3.3e24.
bool is_probable_prime(u128 n);

}  // namespace cryptonet

#endif  // CRYPTONET_INT_TYPES_H_
