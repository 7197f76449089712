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

// Polynomial stand-ins for activation functions on a compact interval, with
// a sup-norm error measured on a dense grid.

#ifndef CRYPTONET_APPROX_H_
#define CRYPTONET_APPROX_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cryptonet {

enum class ActivationKind { kSigmoid, kRelu, kTanh, kSquare, kIdentity, kCustom };

std::string_view to_string(ActivationKind kind);
// Throws std::invalid_argument on unknown names.
ActivationKind parse_activation_kind(std::string_view name);

class ActivationSpec {
 public:
  // Built-in activation on [a, b]. Throws unless a < b and both are finite.
  ActivationSpec(ActivationKind kind, double a, double b);
  // Built-in activation on its default interval: sigmoid and tanh [-8, 8],
  // everything else [-1, 1].
  explicit ActivationSpec(ActivationKind kind);
  // Piecewise-linear interpolation of values sampled uniformly over [a, b],
  // both endpoints included (at least two samples).
  static ActivationSpec tabulated(double a, double b, std::vector<double> values);

  ActivationKind kind() const { return kind_; }
  double a() const { return a_; }
  double b() const { return b_; }
  const std::vector<double>& table() const { return table_; }

  double operator()(double x) const;

 private:
  ActivationKind kind_;
  double a_, b_;
  std::vector<double> table_;
};

struct PolyApprox {
  std::vector<double> coeffs;  // c_0 .. c_d, monomial basis
  int degree = 0;
  double a = -1.0, b = 1.0;
  double sup_error = 0.0;

  double operator()(double x) const;
};

inline constexpr int kDefaultGridPoints = 100000;

// Interpolates f at the d+1 Chebyshev nodes of [a, b].
PolyApprox chebyshev_fit(const ActivationSpec& f, int degree,
                         int grid_points = kDefaultGridPoints);

// Remez exchange started from the Chebyshev interpolant. Returns whichever of
// the two has the smaller measured error.
PolyApprox minimax_fit(const ActivationSpec& f, int degree,
                       int grid_points = kDefaultGridPoints);

// max |f(x) - p(x)| over grid_points uniform points including both ends of
// the function's interval. grid_points must be at least 1000.
double sup_error_estimate(const PolyApprox& p, const ActivationSpec& f, int grid_points);

// Lowest degree d <= max_degree whose fit certifies sup_error < epsilon.
// Chebyshev interpolation is tried first at each degree, then Remez.
std::optional<PolyApprox> fit_within(const ActivationSpec& f, double epsilon,
                                     int max_degree = 16,
                                     int grid_points = kDefaultGridPoints);

struct QuantizedPoly {
  std::vector<int64_t> coeffs;  // round(c_i * 2^coeff_scale), centered
  std::vector<uint64_t> residues;  // the same, reduced into [0, t)
  int coeff_scale_log2 = 0;
  int input_scale_log2 = 0;
  // Term i, c_i x^i with x at input scale s, sits at coeff_scale + i*s; it is
  // multiplied by 2^(shift[i]) to reach aligned_scale = coeff_scale + d*s.
  std::vector<int> term_scale;
  std::vector<int> shift;
  int aligned_scale = 0;

  // Sum of q_i/2^coeff_scale * x^i in floating point.
  double evaluate_real(double x) const;
};

// Throws PlaintextOverflow if a scaled coefficient does not fit centered Z_t.
QuantizedPoly quantize_approx(const PolyApprox& p, int coeff_scale_log2, uint64_t t,
                              int input_scale_log2 = 0);

struct ApproxReportRow {
  int degree;
  double chebyshev_error;
  double minimax_error;
};

std::vector<ApproxReportRow> approximation_table(const ActivationSpec& f, int max_degree,
                                                 int grid_points = kDefaultGridPoints);

}  // namespace cryptonet

#endif  // CRYPTONET_APPROX_H_
