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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "cryptonet/encode.h"
#include "cryptonet/errors.h"

namespace cryptonet {
namespace {

using Poly = std::vector<long double>;

// Monomial coefficients in u of sum_j a_j T_j(u).
Poly chebyshev_to_monomial(const std::vector<double>& a) {
  const size_t n = a.size();
  Poly out(n, 0.0L);
  Poly t_prev(n, 0.0L), t_cur(n, 0.0L);
  t_prev[0] = 1.0L;
  if (n > 0) out[0] += a[0];
  if (n > 1) {
    t_cur[1] = 1.0L;
    out[1] += a[1];
  }
  for (size_t j = 2; j < n; ++j) {
    Poly t_next(n, 0.0L);
    for (size_t k = 0; k + 1 < n; ++k) t_next[k + 1] += 2.0L * t_cur[k];
    for (size_t k = 0; k < n; ++k) t_next[k] -= t_prev[k];
    for (size_t k = 0; k < n; ++k) out[k] += a[j] * t_next[k];
    t_prev = std::move(t_cur);
    t_cur = std::move(t_next);
  }
  return out;
}

// Substitutes u = (x - mid) / half into a polynomial in u.
std::vector<double> to_x_basis(const Poly& in_u, double a, double b) {
  const long double mid = (static_cast<long double>(a) + b) / 2;
  const long double half = (static_cast<long double>(b) - a) / 2;
  const size_t n = in_u.size();
  Poly out(n, 0.0L);
  // (x - mid)^k expanded with binomial coefficients.
  Poly power(n, 0.0L);
  power[0] = 1.0L;
  long double scale = 1.0L;
  for (size_t k = 0; k < n; ++k) {
    for (size_t i = 0; i <= k; ++i) out[i] += in_u[k] * power[i] / scale;
    Poly next(n, 0.0L);
    for (size_t i = 0; i <= k && i + 1 < n; ++i) {
      next[i + 1] += power[i];
      next[i] -= mid * power[i];
    }
    power = std::move(next);
    scale *= half;
  }
  return {out.begin(), out.end()};
}

double clenshaw(const std::vector<double>& a, double u) {
  double b1 = 0.0, b2 = 0.0;
  for (size_t j = a.size(); j-- > 1;) {
    const double b0 = 2.0 * u * b1 - b2 + a[j];
    b2 = b1;
    b1 = b0;
  }
  return u * b1 - b2 + (a.empty() ? 0.0 : a[0]);
}

PolyApprox finish(const std::vector<double>& cheb, const ActivationSpec& f, int degree,
                  int grid_points) {
  PolyApprox p;
  p.coeffs = to_x_basis(chebyshev_to_monomial(cheb), f.a(), f.b());
  p.degree = degree;
  p.a = f.a();
  p.b = f.b();
  p.sup_error = sup_error_estimate(p, f, grid_points);
  return p;
}

std::vector<double> chebyshev_coefficients(const ActivationSpec& f, int degree) {
  const int n = degree + 1;
  const double mid = (f.a() + f.b()) / 2, half = (f.b() - f.a()) / 2;
  std::vector<double> values(n), coeffs(n, 0.0);
  for (int k = 0; k < n; ++k) {
    values[k] = f(mid + half * std::cos(std::numbers::pi * (k + 0.5) / n));
  }
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += values[k] * std::cos(std::numbers::pi * j * (k + 0.5) / n);
    coeffs[j] = (j == 0 ? 1.0 : 2.0) * s / n;
  }
  return coeffs;
}

void check_degree(int degree) {
  if (degree < 0) throw std::invalid_argument("degree must be non-negative");
  if (degree > 64) throw std::invalid_argument("degree must be at most 64");
}

}  // namespace

std::string_view to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::kSigmoid: return "sigmoid";
    case ActivationKind::kRelu: return "relu";
    case ActivationKind::kTanh: return "tanh";
    case ActivationKind::kSquare: return "square";
    case ActivationKind::kIdentity: return "identity";
    case ActivationKind::kCustom: return "custom";
  }
  return "unknown";
}

ActivationKind parse_activation_kind(std::string_view name) {
  for (auto k : {ActivationKind::kSigmoid, ActivationKind::kRelu, ActivationKind::kTanh,
                 ActivationKind::kSquare, ActivationKind::kIdentity, ActivationKind::kCustom}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown activation: " + std::string(name));
}

ActivationSpec::ActivationSpec(ActivationKind kind, double a, double b)
    : kind_(kind), a_(a), b_(b) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
    throw std::invalid_argument("activation interval must be finite with a < b");
  }
  if (kind == ActivationKind::kCustom) {
    throw std::invalid_argument("custom activations need a table");
  }
}

ActivationSpec::ActivationSpec(ActivationKind kind)
    : ActivationSpec(kind,
                     kind == ActivationKind::kSigmoid || kind == ActivationKind::kTanh ? -8.0 : -1.0,
                     kind == ActivationKind::kSigmoid || kind == ActivationKind::kTanh ? 8.0 : 1.0) {}

ActivationSpec ActivationSpec::tabulated(double a, double b, std::vector<double> values) {
  if (values.size() < 2) throw std::invalid_argument("table needs at least two samples");
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("table values must be finite");
  }
  ActivationSpec spec(ActivationKind::kIdentity, a, b);
  spec.kind_ = ActivationKind::kCustom;
  spec.table_ = std::move(values);
  return spec;
}

double ActivationSpec::operator()(double x) const {
  switch (kind_) {
    case ActivationKind::kSigmoid: return 1.0 / (1.0 + std::exp(-x));
    case ActivationKind::kRelu: return x > 0.0 ? x : 0.0;
    case ActivationKind::kTanh: return std::tanh(x);
    case ActivationKind::kSquare: return x * x;
    case ActivationKind::kIdentity: return x;
    case ActivationKind::kCustom: {
      const double pos = std::clamp((x - a_) / (b_ - a_), 0.0, 1.0) * (table_.size() - 1);
      const size_t i = std::min(static_cast<size_t>(pos), table_.size() - 2);
      const double frac = pos - static_cast<double>(i);
      return table_[i] + frac * (table_[i + 1] - table_[i]);
    }
  }
  return 0.0;
}

double PolyApprox::operator()(double x) const {
  double acc = 0.0;
  for (size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
  return acc;
}

double sup_error_estimate(const PolyApprox& p, const ActivationSpec& f, int grid_points) {
  if (grid_points < 1000) throw std::invalid_argument("grid needs at least 1000 points");
  double worst = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    const double x = i == grid_points - 1
                         ? f.b()
                         : f.a() + (f.b() - f.a()) * static_cast<double>(i) / (grid_points - 1);
    worst = std::max(worst, std::fabs(f(x) - p(x)));
  }
  return worst;
}

PolyApprox chebyshev_fit(const ActivationSpec& f, int degree, int grid_points) {
  check_degree(degree);
  return finish(chebyshev_coefficients(f, degree), f, degree, grid_points);
}

namespace {

// Remez exchange at exactly this degree; returns the best iterate, or the
// Chebyshev interpolant if no iterate beats it.
PolyApprox remez(const ActivationSpec& f, int degree, int grid_points) {
  PolyApprox best = chebyshev_fit(f, degree, grid_points);
  const int m = degree + 2;
  const double mid = (f.a() + f.b()) / 2, half = (f.b() - f.a()) / 2;
  auto fu = [&](double u) { return f(mid + half * u); };

  std::vector<double> ref(m);
  for (int i = 0; i < m; ++i) ref[i] = -std::cos(std::numbers::pi * i / (m - 1));

  constexpr int kScan = 20000;
  std::vector<double> grid(kScan);
  for (int i = 0; i < kScan; ++i) grid[i] = -1.0 + 2.0 * i / (kScan - 1);

  for (int iter = 0; iter < 60; ++iter) {
    Eigen::MatrixXd A(m, m);
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) {
      double t_prev = 1.0, t_cur = ref[i];
      for (int j = 0; j <= degree; ++j) {
        if (j == 0) {
          A(i, j) = 1.0;
        } else if (j == 1) {
          A(i, j) = ref[i];
        } else {
          const double t_next = 2.0 * ref[i] * t_cur - t_prev;
          t_prev = t_cur;
          t_cur = t_next;
          A(i, j) = t_cur;
        }
      }
      A(i, m - 1) = i % 2 == 0 ? 1.0 : -1.0;
      rhs(i) = fu(ref[i]);
    }
    const Eigen::VectorXd sol = A.colPivHouseholderQr().solve(rhs);
    std::vector<double> cheb(sol.data(), sol.data() + degree + 1);
    const double level = std::fabs(sol(m - 1));

    auto err = [&](double u) { return fu(u) - clenshaw(cheb, u); };
    // One extremum per run of constant sign.
    std::vector<double> ext;
    std::vector<double> ext_err;
    double run_best = 0.0, run_u = grid[0];
    int run_sign = 0;
    for (double u : grid) {
      const double e = err(u);
      const int sign = e > 0 ? 1 : (e < 0 ? -1 : run_sign);
      if (sign != run_sign && run_sign != 0) {
        ext.push_back(run_u);
        ext_err.push_back(run_best);
        run_best = 0.0;
      }
      run_sign = sign;
      if (std::fabs(e) >= std::fabs(run_best)) {
        run_best = e;
        run_u = u;
      }
    }
    ext.push_back(run_u);
    ext_err.push_back(run_best);
    while (static_cast<int>(ext.size()) > m) {
      if (std::fabs(ext_err.front()) < std::fabs(ext_err.back())) {
        ext.erase(ext.begin());
        ext_err.erase(ext_err.begin());
      } else {
        ext.pop_back();
        ext_err.pop_back();
      }
    }

    PolyApprox candidate = finish(cheb, f, degree, grid_points);
    if (candidate.sup_error < best.sup_error) best = candidate;
    if (static_cast<int>(ext.size()) < m) break;
    double max_err = 0.0;
    for (double e : ext_err) max_err = std::max(max_err, std::fabs(e));
    ref = ext;
    if (max_err - level <= 1e-9 * std::max(max_err, 1e-300)) break;
  }
  return best;
}

}  // namespace

PolyApprox minimax_fit(const ActivationSpec& f, int degree, int grid_points) {
  check_degree(degree);
  PolyApprox best = remez(f, degree, grid_points);
  // For odd or even f the alternation set at degree d can degenerate; the
  // degree d-1 solution is also a degree d candidate.
  if (degree > 0) {
    PolyApprox lower = remez(f, degree - 1, grid_points);
    if (lower.sup_error < best.sup_error) {
      lower.coeffs.push_back(0.0);
      lower.degree = degree;
      best = std::move(lower);
    }
  }
  return best;
}

std::optional<PolyApprox> fit_within(const ActivationSpec& f, double epsilon, int max_degree,
                                     int grid_points) {
  for (int d = 0; d <= max_degree; ++d) {
    auto p = chebyshev_fit(f, d, grid_points);
    if (p.sup_error < epsilon) return p;
    p = minimax_fit(f, d, grid_points);
    if (p.sup_error < epsilon) return p;
  }
  return std::nullopt;
}

double QuantizedPoly::evaluate_real(double x) const {
  double acc = 0.0;
  for (size_t i = coeffs.size(); i-- > 0;) {
    acc = acc * x + std::ldexp(static_cast<double>(coeffs[i]), -coeff_scale_log2);
  }
  return acc;
}

QuantizedPoly quantize_approx(const PolyApprox& p, int coeff_scale_log2, uint64_t t,
                              int input_scale_log2) {
  if (input_scale_log2 < 0) throw std::invalid_argument("negative input scale");
  QuantizedPoly out;
  out.coeff_scale_log2 = coeff_scale_log2;
  out.input_scale_log2 = input_scale_log2;
  const int d = static_cast<int>(p.coeffs.size()) - 1;
  out.aligned_scale = coeff_scale_log2 + std::max(d, 0) * input_scale_log2;
  for (int i = 0; i <= d; ++i) {
    const auto fp = encode_real(p.coeffs[i], coeff_scale_log2, t);
    out.residues.push_back(fp.mantissa);
    out.coeffs.push_back(centered_mantissa(fp.mantissa, t));
    out.term_scale.push_back(coeff_scale_log2 + i * input_scale_log2);
    out.shift.push_back((d - i) * input_scale_log2);
  }
  return out;
}

std::vector<ApproxReportRow> approximation_table(const ActivationSpec& f, int max_degree,
                                                 int grid_points) {
  std::vector<ApproxReportRow> rows;
  for (int d = 0; d <= max_degree; ++d) {
    rows.push_back({d, chebyshev_fit(f, d, grid_points).sup_error,
                    minimax_fit(f, d, grid_points).sup_error});
  }
  return rows;
}

}  // namespace cryptonet
