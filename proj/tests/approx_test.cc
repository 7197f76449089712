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

#include "cryptonet/approx.h"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cryptonet/encode.h"
#include "cryptonet/errors.h"
#include "cryptonet/prng.h"

namespace cryptonet {
namespace {

// Barycentric evaluation of the interpolant through the first-kind Chebyshev
// nodes; no monomial conversion involved.
double barycentric(const ActivationSpec& f, int degree, double x) {
  const int n = degree + 1;
  const double mid = (f.a() + f.b()) / 2, half = (f.b() - f.a()) / 2;
  double num = 0.0, den = 0.0;
  for (int k = 0; k < n; ++k) {
    const double theta = std::numbers::pi * (2 * k + 1) / (2.0 * n);
    const double xk = mid + half * std::cos(theta);
    const double w = (k % 2 == 0 ? 1.0 : -1.0) * std::sin(theta);
    if (x == xk) return f(xk);
    num += w / (x - xk) * f(xk);
    den += w / (x - xk);
  }
  return num / den;
}

double oracle_sup_error(const ActivationSpec& f, int degree, int points) {
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = i == points - 1 ? f.b() : f.a() + (f.b() - f.a()) * i / (points - 1.0);
    worst = std::max(worst, std::fabs(f(x) - barycentric(f, degree, x)));
  }
  return worst;
}

TEST(ActivationSpecTest, DefaultsAndValidation) {
  EXPECT_EQ(ActivationSpec(ActivationKind::kSigmoid).a(), -8.0);
  EXPECT_EQ(ActivationSpec(ActivationKind::kTanh).b(), 8.0);
  EXPECT_EQ(ActivationSpec(ActivationKind::kRelu).a(), -1.0);
  EXPECT_THROW(ActivationSpec(ActivationKind::kRelu, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(ActivationSpec(ActivationKind::kRelu, 0.0, INFINITY), std::invalid_argument);
  EXPECT_THROW(ActivationSpec(ActivationKind::kCustom, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(ActivationSpec::tabulated(0.0, 1.0, {1.0}), std::invalid_argument);
  EXPECT_EQ(parse_activation_kind("tanh"), ActivationKind::kTanh);
  EXPECT_THROW(parse_activation_kind("maxpool"), std::invalid_argument);
}

TEST(ActivationSpecTest, Evaluation) {
  EXPECT_DOUBLE_EQ(ActivationSpec(ActivationKind::kSigmoid)(0.0), 0.5);
  EXPECT_DOUBLE_EQ(ActivationSpec(ActivationKind::kRelu)(-0.5), 0.0);
  EXPECT_DOUBLE_EQ(ActivationSpec(ActivationKind::kRelu)(0.5), 0.5);
  EXPECT_DOUBLE_EQ(ActivationSpec(ActivationKind::kSquare)(-3.0), 9.0);
  const auto tab = ActivationSpec::tabulated(0.0, 2.0, {0.0, 1.0, 4.0});
  EXPECT_DOUBLE_EQ(tab(0.5), 0.5);
  EXPECT_DOUBLE_EQ(tab(1.5), 2.5);
  EXPECT_DOUBLE_EQ(tab(2.0), 4.0);
  EXPECT_DOUBLE_EQ(tab(-1.0), 0.0);
}

TEST(ChebyshevFitTest, ReproducesSquare) {
  const auto p = chebyshev_fit(ActivationSpec(ActivationKind::kSquare), 2);
  ASSERT_EQ(p.coeffs.size(), 3u);
  EXPECT_NEAR(p.coeffs[0], 0.0, 1e-12);
  EXPECT_NEAR(p.coeffs[1], 0.0, 1e-12);
  EXPECT_NEAR(p.coeffs[2], 1.0, 1e-12);
  EXPECT_LE(p.sup_error, 1e-12);
  EXPECT_EQ(p.degree, 2);
}

TEST(ChebyshevFitTest, ReproducesConstants) {
  for (int d : {0, 1, 4, 9}) {
    const auto p = chebyshev_fit(ActivationSpec::tabulated(-2.0, 3.0, {0.75, 0.75, 0.75}), d);
    ASSERT_EQ(p.coeffs.size(), static_cast<size_t>(d + 1));
    EXPECT_NEAR(p.coeffs[0], 0.75, 1e-12);
    for (int i = 1; i <= d; ++i) EXPECT_NEAR(p.coeffs[i], 0.0, 1e-12);
    EXPECT_LE(p.sup_error, 1e-12);
  }
}

TEST(ChebyshevFitTest, ExactOnPolynomialsUpToDegree) {
  for (auto [lo, hi] : {std::pair{-1.0, 1.0}, {0.5, 3.0}, {-4.0, -1.0}}) {
    for (int d = 2; d <= 10; ++d) {
      EXPECT_LE(chebyshev_fit(ActivationSpec(ActivationKind::kSquare, lo, hi), d).sup_error, 1e-10);
      EXPECT_LE(chebyshev_fit(ActivationSpec(ActivationKind::kIdentity, lo, hi), d).sup_error, 1e-10);
    }
    // A piecewise-linear table with one segment is a line.
    EXPECT_LE(chebyshev_fit(ActivationSpec::tabulated(lo, hi, {1.0, -2.0}), 1).sup_error, 1e-10);
  }
}

TEST(ChebyshevFitTest, MatchesBarycentricOracle) {
  Prng rng(5);
  for (auto kind : {ActivationKind::kSigmoid, ActivationKind::kTanh, ActivationKind::kRelu}) {
    const ActivationSpec f(kind);
    for (int d : {3, 6, 9}) {
      const auto p = chebyshev_fit(f, d);
      for (int i = 0; i < 200; ++i) {
        const double x = rng.uniform(f.a(), f.b());
        ASSERT_NEAR(p(x), barycentric(f, d, x), 1e-9);
      }
    }
  }
}

// Computed with the barycentric oracle on a 1e5-point grid, then frozen.
constexpr double kSigmoid44Degree3 = 0.035481928349725196;
constexpr double kSigmoid44Degree9 = 0.00046931287117730341;

TEST(SupErrorTest, SigmoidFixtures) {
  const ActivationSpec f(ActivationKind::kSigmoid, -4.0, 4.0);
  const double e3 = chebyshev_fit(f, 3).sup_error;
  const double e9 = chebyshev_fit(f, 9).sup_error;
  EXPECT_NEAR(e3, oracle_sup_error(f, 3, kDefaultGridPoints), 1e-12);
  EXPECT_NEAR(e9, oracle_sup_error(f, 9, kDefaultGridPoints), 1e-12);
  EXPECT_NEAR(e3, kSigmoid44Degree3, 1e-12);
  EXPECT_NEAR(e9, kSigmoid44Degree9, 1e-12);
  EXPECT_LT(e9, e3);
}

TEST(SupErrorTest, GridRequirementsAndRefinement) {
  const ActivationSpec f(ActivationKind::kTanh);
  const auto p = chebyshev_fit(f, 7);
  EXPECT_THROW(sup_error_estimate(p, f, 999), std::invalid_argument);
  // 2N-1 uniform points contain the N-point grid.
  for (int n : {1001, 4001, 25001}) {
    EXPECT_GE(sup_error_estimate(p, f, 2 * n - 1), sup_error_estimate(p, f, n) - 1e-15);
  }
  EXPECT_LE(sup_error_estimate(chebyshev_fit(ActivationSpec(ActivationKind::kIdentity), 1),
                               ActivationSpec(ActivationKind::kIdentity), 1000),
            1e-15);
}

TEST(MinimaxFitTest, NeverWorseThanChebyshev) {
  for (auto kind : {ActivationKind::kSigmoid, ActivationKind::kTanh, ActivationKind::kRelu}) {
    const ActivationSpec f(kind);
    for (int d = 1; d <= 16; ++d) {
      const auto m = minimax_fit(f, d);
      EXPECT_LE(m.sup_error, chebyshev_fit(f, d).sup_error);
      EXPECT_EQ(m.coeffs.size(), static_cast<size_t>(d + 1));
      EXPECT_NEAR(sup_error_estimate(m, f, kDefaultGridPoints), m.sup_error, 1e-15);
    }
  }
}

class WitnessTest : public ::testing::TestWithParam<ActivationKind> {};

TEST_P(WitnessTest, EveryToleranceReachedByDegreeSixteen) {
  const ActivationSpec f(GetParam());
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto p = fit_within(f, eps, 16);
    ASSERT_TRUE(p.has_value()) << to_string(GetParam()) << " eps " << eps;
    EXPECT_LT(p->sup_error, eps);
    EXPECT_LE(p->degree, 16);
    // Re-certify independently of the fitting routine.
    EXPECT_LT(sup_error_estimate(*p, f, kDefaultGridPoints), eps);
  }
}

INSTANTIATE_TEST_SUITE_P(BuiltIns, WitnessTest,
                         ::testing::Values(ActivationKind::kSigmoid, ActivationKind::kTanh,
                                           ActivationKind::kRelu, ActivationKind::kSquare,
                                           ActivationKind::kIdentity),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(QuantizeApproxTest, Examples) {
  const auto id = chebyshev_fit(ActivationSpec(ActivationKind::kIdentity), 1);
  const auto q = quantize_approx(id, 8, 65536);
  ASSERT_EQ(q.coeffs.size(), 2u);
  EXPECT_EQ(q.coeffs[0], 0);
  EXPECT_EQ(q.coeffs[1], 256);

  PolyApprox zero{{0.0, 0.0, 0.0}, 2, -1.0, 1.0, 0.0};
  const auto qz = quantize_approx(zero, 10, 65536);
  for (auto c : qz.coeffs) EXPECT_EQ(c, 0);
  for (auto r : qz.residues) EXPECT_EQ(r, 0u);

  PolyApprox neg{{-0.5, 2.0}, 1, -1.0, 1.0, 0.0};
  const auto qn = quantize_approx(neg, 4, 65536);
  EXPECT_EQ(qn.coeffs[0], -8);
  EXPECT_EQ(qn.residues[0], 65536u - 8);
}

TEST(QuantizeApproxTest, Overflow) {
  PolyApprox big{{1000.0}, 0, -1.0, 1.0, 0.0};
  EXPECT_THROW(quantize_approx(big, 8, 65536), PlaintextOverflow);
}

TEST(QuantizeApproxTest, ScalePlanMatchesScaleAfter) {
  const auto p = chebyshev_fit(ActivationSpec(ActivationKind::kSigmoid, -4.0, 4.0), 3);
  const auto q = quantize_approx(p, 10, uint64_t{1} << 40, 6);
  for (int i = 0; i <= 3; ++i) {
    int s = 10;
    for (int k = 0; k < i; ++k) s = scale_after(ScaleOp::kMul, s, 6);
    EXPECT_EQ(q.term_scale[i], s);
    EXPECT_EQ(scale_after(ScaleOp::kMul, s, q.shift[i]), q.aligned_scale);
  }
  EXPECT_EQ(q.aligned_scale, 28);
}

TEST(QuantizeApproxTest, ErrorWithinAnalyticBound) {
  for (auto kind : {ActivationKind::kSigmoid, ActivationKind::kTanh, ActivationKind::kRelu}) {
    const ActivationSpec f(kind);
    for (int d : {3, 7, 12}) {
      const auto p = chebyshev_fit(f, d);
      for (int s : {6, 12, 20}) {
        const auto q = quantize_approx(p, s, uint64_t{1} << 60);
        for (int i = 0; i < 100; ++i) {
          const double x = f.a() + (f.b() - f.a()) * i / 99.0;
          double bound = 0.0;
          for (int k = 0; k <= d; ++k) bound += std::pow(std::fabs(x), k) * std::ldexp(1.0, -s - 1);
          // Direct evaluation of both polynomials, term by term.
          double diff = 0.0;
          for (int k = 0; k <= d; ++k) {
            diff += (std::ldexp(static_cast<double>(q.coeffs[k]), -s) - p.coeffs[k]) *
                    std::pow(x, k);
          }
          ASSERT_LE(std::fabs(diff), bound * (1 + 1e-12));
          ASSERT_NEAR(q.evaluate_real(x) - p(x), diff, 1e-9 * (1 + bound));
        }
      }
    }
  }
}

TEST(ApproximationTableTest, RowsPerDegree) {
  const auto rows = approximation_table(ActivationSpec(ActivationKind::kSigmoid, -4.0, 4.0), 9);
  ASSERT_EQ(rows.size(), 10u);
  EXPECT_NEAR(rows[3].chebyshev_error, kSigmoid44Degree3, 1e-12);
  for (const auto& r : rows) EXPECT_LE(r.minimax_error, r.chebyshev_error);
}

}  // namespace
}  // namespace cryptonet
