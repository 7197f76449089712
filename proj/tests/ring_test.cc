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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.h"

namespace cryptonet {
namespace {

RingElement make(const RingParams& p, std::vector<u128> c) {
  return RingElement(p, std::move(c));
}

std::vector<u128> to_vec(const RingElement& e) {
  return {e.coeffs().begin(), e.coeffs().end()};
}

TEST(RingParamsTest, RejectsInvalidParameters) {
  EXPECT_THROW(RingParams(3, 17), std::invalid_argument);
  EXPECT_THROW(RingParams(8, 16), std::invalid_argument);
  EXPECT_THROW(RingParams(8, 1), std::invalid_argument);
  EXPECT_THROW(RingParams(8, (u128{1} << 117) + 1), std::invalid_argument);
  EXPECT_NO_THROW(RingParams(8, 97));
}

TEST(RingAddTest, CoefficientWise) {
  RingParams p(2, 17);
  EXPECT_EQ(ring_add(make(p, {3, 5}), make(p, {15, 14})), make(p, {1, 2}));
}

TEST(RingAddTest, IdentityAndInverse) {
  RingParams p(8, 97);
  Prng rng(1);
  auto a = sample_uniform(p, rng);
  EXPECT_EQ(ring_add(a, RingElement(p)), a);
  std::vector<u128> inv(8);
  for (size_t i = 0; i < 8; ++i) inv[i] = (97 - a[i]) % 97;
  EXPECT_TRUE(ring_add(a, make(p, inv)).is_zero());
}

TEST(RingAddTest, MismatchedRingsThrow) {
  RingParams p(8, 97), r(8, 101);
  try {
    ring_add(RingElement(p), RingElement(r));
    FAIL() << "expected ring mismatch";
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "ring mismatch");
  }
  EXPECT_THROW(ring_mul(RingElement(p), RingElement(r)), std::invalid_argument);
}

TEST(RingMulTest, XSquaredIsMinusOne) {
  RingParams p(2, 17);
  auto x = make(p, {0, 1});
  EXPECT_EQ(ring_mul(x, x), make(p, {16, 0}));
  auto one_plus_x = make(p, {1, 1});
  EXPECT_EQ(ring_mul(one_plus_x, one_plus_x), make(p, {0, 2}));
}

TEST(RingMulTest, MatchesNaiveOracleSmallModulus) {
  RingParams p(8, 97);
  Prng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    auto a = sample_uniform(p, rng);
    auto b = sample_uniform(p, rng);
    auto expected = testing::naive_negacyclic_product(to_vec(a), to_vec(b), 97);
    EXPECT_EQ(to_vec(ring_mul(a, b)), expected);
    EXPECT_EQ(to_vec(ring_mul_schoolbook(a, b)), expected);
  }
}

TEST(RingMulTest, MatchesNaiveOracleWideModulus) {
  // Odd, not NTT-friendly, close to the 116-bit ceiling.
  const u128 q = (u128{1} << 115) - 159;
  for (size_t n : {4u, 16u, 64u}) {
    RingParams p(n, q);
    Prng rng(n);
    for (int trial = 0; trial < 20; ++trial) {
      auto a = sample_uniform(p, rng);
      auto b = sample_uniform(p, rng);
      EXPECT_EQ(to_vec(ring_mul(a, b)),
                testing::naive_negacyclic_product(to_vec(a), to_vec(b), q));
    }
  }
}

TEST(RingMulTest, FastPathMatchesSchoolbookAtSchemeSize) {
  RingParams p(2048, (u128{1} << 100) + 3);
  Prng rng(11);
  auto a = sample_uniform(p, rng);
  auto b = sample_uniform(p, rng);
  EXPECT_EQ(ring_mul(a, b), ring_mul_schoolbook(a, b));
}

TEST(RingMulTest, FastPathMatchesSchoolbookProperty) {
  Prng rng(2024);
  for (size_t n : {4u, 8u, 16u}) {
    for (u128 q : {u128{97}, u128{12289}, (u128{1} << 54) - 33}) {
      RingParams p(n, q);
      for (int trial = 0; trial < 1000; ++trial) {
        auto a = sample_uniform(p, rng);
        auto b = sample_uniform(p, rng);
        ASSERT_EQ(ring_mul(a, b), ring_mul_schoolbook(a, b));
      }
    }
  }
}

TEST(RingMulTest, XToTheNActsAsMinusOne) {
  for (size_t n : {2u, 4u, 8u, 16u, 1024u}) {
    for (u128 q : {u128{17}, u128{97}, (u128{1} << 60) + 33}) {
      RingParams p(n, q);
      auto prod = ring_mul(RingElement::monomial(p, n - 1), RingElement::monomial(p, 1));
      EXPECT_EQ(prod, RingElement::constant(p, -1));
    }
  }
}

TEST(RingLawsTest, CommutativeAssociativeDistributive) {
  Prng rng(99);
  for (auto [n, q] : {std::pair<size_t, u128>{8, 97},
                      {16, (u128{1} << 80) + 13},
                      {32, (u128{1} << 54) - 33}}) {
    RingParams p(n, q);
    for (int trial = 0; trial < 100; ++trial) {
      auto a = sample_uniform(p, rng);
      auto b = sample_uniform(p, rng);
      auto c = sample_uniform(p, rng);
      ASSERT_EQ(ring_add(a, b), ring_add(b, a));
      ASSERT_EQ(ring_mul(a, b), ring_mul(b, a));
      ASSERT_EQ(ring_add(ring_add(a, b), c), ring_add(a, ring_add(b, c)));
      ASSERT_EQ(ring_mul(ring_mul(a, b), c), ring_mul(a, ring_mul(b, c)));
      ASSERT_EQ(ring_mul(a, ring_add(b, c)), ring_add(ring_mul(a, b), ring_mul(a, c)));
    }
  }
}

TEST(RingScaleTest, SpecialScalars) {
  RingParams p(8, 97);
  Prng rng(3);
  auto a = sample_uniform(p, rng);
  EXPECT_EQ(ring_scale(a, 1), a);
  EXPECT_TRUE(ring_scale(a, 0).is_zero());
  EXPECT_TRUE(ring_scale(a, 97).is_zero());
  EXPECT_EQ(ring_scale(a, -1), ring_neg(a));
  for (size_t i = 0; i < 8; ++i) EXPECT_EQ(ring_scale(a, 5)[i], (5 * a[i]) % 97);
}

TEST(SampleUniformTest, DeterministicAndInRange) {
  RingParams p(64, 12289);
  Prng r1(5), r2(5), r3(6);
  auto a = sample_uniform(p, r1);
  EXPECT_EQ(a, sample_uniform(p, r2));
  EXPECT_NE(a, sample_uniform(p, r3));
  for (u128 c : a.coeffs()) EXPECT_LT(c, u128{12289});
}

TEST(SampleUniformTest, MeanNearCenter) {
  // 10^4 elements of 16 coefficients: the standard error of the mean is
  // q/sqrt(12 * 160000) ~ 0.00072 q, so a 1% band on (q-1)/2 is ~7 s.e.
  const u128 q = 1000003;
  RingParams p(16, q);
  Prng rng(17);
  double sum = 0;
  size_t count = 0;
  for (int s = 0; s < 10000; ++s) {
    const auto e = sample_uniform(p, rng);
    for (u128 c : e.coeffs()) {
      sum += to_double(c);
      ++count;
    }
  }
  const double mean = sum / count;
  const double center = (to_double(q) - 1) / 2;
  EXPECT_NEAR(mean, center, 0.01 * center);
}

TEST(SampleNoiseTest, DeterministicBoundedCentered) {
  const double sigma = 3.2;
  RingParams p(1024, (u128{1} << 54) - 33);
  Prng r1(8), r2(8);
  EXPECT_EQ(sample_noise(p, sigma, r1), sample_noise(p, sigma, r2));

  Prng rng(21);
  double sum = 0, sum_sq = 0;
  size_t count = 0;
  while (count < 100000) {
    auto e = sample_noise(p, sigma, rng);
    for (size_t i = 0; i < e.size(); ++i) {
      const double v = to_double(e.centered(i));
      ASSERT_LE(std::abs(v), 6 * sigma);
      sum += v;
      sum_sq += v * v;
      ++count;
    }
  }
  const double mean = sum / count;
  const double var = sum_sq / count - mean * mean;
  EXPECT_LT(std::abs(mean), 3 * sigma / std::sqrt(static_cast<double>(count)));
  // k = round(2 sigma^2) = 20 coin pairs gives variance 10.
  EXPECT_NEAR(var, 10.0, 0.2);
}

TEST(SampleNoiseTest, RejectsNonPositiveStddev) {
  RingParams p(8, 97);
  Prng rng(1);
  EXPECT_THROW(sample_noise(p, 0.0, rng), std::invalid_argument);
}

TEST(SampleTernaryTest, CoefficientsAreTernary) {
  RingParams p(256, 12289);
  Prng rng(4);
  auto s = sample_ternary(p, rng);
  for (size_t i = 0; i < s.size(); ++i) {
    EXPECT_GE(s.centered(i), -1);
    EXPECT_LE(s.centered(i), 1);
  }
}

}  // namespace
}  // namespace cryptonet
