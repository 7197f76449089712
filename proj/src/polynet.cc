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

#include "cryptonet/polynet.h"

#include <sodium.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "cryptonet/noise_model.h"

namespace cryptonet {

namespace {

constexpr i128 kSaturate = static_cast<i128>(1) << 126;

i128 clamp_sat(i128 x) { return std::clamp(x, -kSaturate, kSaturate); }

i128 sat_mul(i128 a, i128 b) {
  i128 r;
  if (__builtin_mul_overflow(a, b, &r)) return (a < 0) != (b < 0) ? -kSaturate : kSaturate;
  return clamp_sat(r);
}

i128 sat_add(i128 a, i128 b) { return clamp_sat(a + b); }  // |a|,|b| <= 2^126

i128 sat_pow(i128 x, int e) {
  i128 r = 1;
  for (int i = 0; i < e; ++i) r = sat_mul(r, x);
  return r;
}

template <typename T>
std::pair<T, T> mul_interval(T al, T ah, T bl, T bh, T (*mul)(T, T)) {
  const T p[4] = {mul(al, bl), mul(al, bh), mul(ah, bl), mul(ah, bh)};
  return {*std::min_element(p, p + 4), *std::max_element(p, p + 4)};
}

double dmul(double a, double b) { return a * b; }

// Range of x^e for x in [lo, hi].
template <typename T, typename Pow>
std::pair<T, T> pow_interval(T lo, T hi, int e, Pow pow) {
  if (e % 2 == 1 || lo >= 0) return {pow(lo, e), pow(hi, e)};
  if (hi <= 0) return {pow(hi, e), pow(lo, e)};
  return {T(0), std::max(pow(lo, e), pow(hi, e))};
}

i128 abs_max(i128 lo, i128 hi) { return std::max(lo < 0 ? -lo : lo, hi < 0 ? -hi : hi); }

}  // namespace

int64_t quantize_fixed(double x, int scale, const char* what) {
  const double v = std::round(std::ldexp(x, scale));
  if (!std::isfinite(v) || std::fabs(v) >= 0x1p62) {
    throw ValidationError(std::string(what) + " does not fit 62 bits at scale 2^" +
                          std::to_string(scale));
  }
  return static_cast<int64_t>(v);
}

namespace {

void check_finite(double x, const std::string& what) {
  if (!std::isfinite(x)) throw ValidationError(what + " is not finite");
}

std::vector<int> compile_activation(CircuitBuilder& b, const Activation& act,
                                    const std::vector<int>& h, const CompileConfig& config,
                                    size_t layer_index) {
  std::vector<int> out;
  out.reserve(h.size());
  if (act.kind == ActivationKind::kIdentity && !act.poly) return h;
  if (act.kind == ActivationKind::kSquare && !act.poly) {
    for (int x : h) {
      const int y = b.mul(x, x);
      const double m = b.node(x).magnitude, a = b.approx_error(x);
      b.set_approx_error(y, a * (2.0 * m + a));
      out.push_back(y);
    }
    return out;
  }
  if (!act.poly) throw ValidationError("compile approximation first");
  const PolyApprox& p = *act.poly;
  const int d = p.degree;
  if (d < 1 || static_cast<int>(p.coeffs.size()) != d + 1) {
    throw ValidationError("activation polynomial must have degree >= 1");
  }
  std::vector<int64_t> qc(d + 1);
  for (int i = 0; i <= d; ++i) {
    check_finite(p.coeffs[i], "activation coefficient");
    qc[i] = quantize_fixed(p.coeffs[i], config.coeff_scale, "activation coefficient");
  }
  const double radius = std::max(std::fabs(p.a), std::fabs(p.b));
  for (size_t u = 0; u < h.size(); ++u) {
    const int x = h[u];
    constexpr double kSlack = 1e-9;
    if (b.lo(x) < p.a - kSlack || b.hi(x) > p.b + kSlack) {
      std::ostringstream msg;
      msg << "layer " << layer_index << " unit " << u << ": pre-activation range ["
          << b.lo(x) << ", " << b.hi(x) << "] exceeds the approximation interval [" << p.a
          << ", " << p.b << "]";
      throw ValidationError(msg.str());
    }
    const int s_h = b.node(x).scale;
    std::map<int, int> powers;
    int acc = -1;
    for (int i = 1; i <= d; ++i) {
      if (qc[i] == 0 && i != d) continue;  // the leading term is always emitted
      const int shift = (d - i) * s_h;
      if (shift >= 62 || std::fabs(std::ldexp(static_cast<double>(qc[i]), shift)) >= 0x1p62) {
        throw ValidationError("aligned activation coefficient does not fit 62 bits");
      }
      const int term = b.mul_const(b.power(x, i, powers), p.coeffs[i], qc[i] << shift,
                                   config.coeff_scale + shift);
      acc = acc < 0 ? term : b.add(acc, term);
    }
    const int s_out = config.coeff_scale + d * s_h;
    if (d * s_h >= 62 || std::fabs(std::ldexp(static_cast<double>(qc[0]), d * s_h)) >= 0x1p62) {
      throw ValidationError("aligned activation coefficient does not fit 62 bits");
    }
    (void)s_out;
    const int y = b.add_const(acc, p.coeffs[0], qc[0] << (d * s_h));
    // |f(z) - p(x)| <= sup_error + L |z - x| with L bounding |p'| near the interval.
    const double r = std::max(radius, b.node(x).magnitude + b.approx_error(x));
    double lip = 0.0;
    for (int i = 1; i <= d; ++i) lip += i * std::fabs(p.coeffs[i]) * std::pow(r, i - 1);
    b.set_approx_error(y, p.sup_error + lip * b.approx_error(x));
    out.push_back(y);
  }
  return out;
}

void validate_config(const CompileConfig& c) {
  for (int s : {c.input_scale, c.weight_scale, c.coeff_scale}) {
    if (s < 0 || s > 40) throw ValidationError("scales must be in [0, 40] bits");
  }
}

CompiledCircuit build(const PolyNetwork& net, const SchemeParams& params,
                      const CompileConfig& config) {
  CircuitBuilder b(params, config);
  std::vector<int> wires;
  for (size_t i = 0; i < net.input_dim; ++i) {
    wires.push_back(b.input(net.input_intervals[i], config.input_scale));
  }
  for (size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& layer = net.layers[l];
    std::vector<int> h;
    for (size_t i = 0; i < layer.out_dim(); ++i) {
      int acc = -1;
      for (size_t j = 0; j < layer.in_dim(); ++j) {
        const double w = layer.weights[i][j];
        const int term = b.mul_const(wires[j], w, quantize_fixed(w, config.weight_scale, "weight"),
                                     config.weight_scale);
        acc = acc < 0 ? term : b.add(acc, term);
      }
      const int scale = b.node(acc).scale;
      h.push_back(b.add_const(acc, layer.bias[i], quantize_fixed(layer.bias[i], scale, "bias")));
    }
    wires = compile_activation(b, layer.activation, h, config, l);
  }
  return b.finish(wires, total_degree(net));
}

i128 max_magnitude(const CompiledCircuit& c, int* where) {
  i128 best = 0;
  *where = -1;
  for (size_t i = 0; i < c.nodes.size(); ++i) {
    const CircuitNode& n = c.nodes[i];
    i128 m = abs_max(n.lo, n.hi);
    if (n.op == OpCode::kAddCP || n.op == OpCode::kMulCP || n.op == OpCode::kConstant) {
      m = std::max(m, abs_max(n.value, n.value));
    }
    if (m > best || *where < 0) {
      best = m;
      *where = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace

Activation Activation::fitted(const ActivationSpec& spec, PolyApprox p) {
  return {spec.kind(), std::move(p), spec};
}

Activation Activation::exact(const ActivationSpec& spec) {
  return {spec.kind(), std::nullopt, spec};
}

bool Activation::is_polynomial() const {
  return poly.has_value() || kind == ActivationKind::kIdentity ||
         kind == ActivationKind::kSquare;
}

int Activation::degree() const {
  if (poly) return poly->degree;
  if (kind == ActivationKind::kIdentity) return 1;
  if (kind == ActivationKind::kSquare) return 2;
  throw ValidationError("compile approximation first");
}

std::vector<double> Activation::coefficients() const {
  if (poly) return poly->coeffs;
  if (kind == ActivationKind::kIdentity) return {0.0, 1.0};
  if (kind == ActivationKind::kSquare) return {0.0, 0.0, 1.0};
  throw ValidationError("compile approximation first");
}

double Activation::eval(double x) const {
  if (poly) return (*poly)(x);
  if (kind == ActivationKind::kIdentity) return x;
  if (kind == ActivationKind::kSquare) return x * x;
  throw ValidationError("compile approximation first");
}

double Activation::derivative(double x) const {
  const std::vector<double> c = coefficients();
  double r = 0.0;
  for (size_t i = c.size(); i-- > 1;) r = r * x + static_cast<double>(i) * c[i];
  return r;
}

double Activation::eval_exact(double x) const {
  if (spec) return (*spec)(x);
  return eval(x);
}

double Activation::derivative_exact(double x) const {
  if (!spec) return derivative(x);
  switch (spec->kind()) {
    case ActivationKind::kSigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 - s);
    }
    case ActivationKind::kTanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::kRelu:
      return x > 0.0 ? 1.0 : 0.0;
    case ActivationKind::kSquare:
      return 2.0 * x;
    case ActivationKind::kIdentity:
      return 1.0;
    case ActivationKind::kCustom: {
      const double h = 1e-6 * (spec->b() - spec->a());
      return ((*spec)(x + h) - (*spec)(x - h)) / (2.0 * h);
    }
  }
  return 0.0;
}

void PolyNetwork::validate() const {
  if (input_dim == 0) throw ValidationError("network needs at least one input");
  if (input_intervals.size() != input_dim) {
    throw ValidationError("expected one input interval per input");
  }
  for (const Interval& iv : input_intervals) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.lo < iv.hi)) {
      throw ValidationError("input intervals must be finite with lo < hi");
    }
  }
  size_t dim = input_dim;
  for (size_t l = 0; l < layers.size(); ++l) {
    const Layer& layer = layers[l];
    const std::string where = "layer " + std::to_string(l);
    if (layer.out_dim() == 0) throw ValidationError(where + " has no units");
    if (layer.bias.size() != layer.out_dim()) throw ValidationError(where + ": bias size");
    for (const auto& row : layer.weights) {
      if (row.size() != dim) {
        throw ValidationError(where + ": expected " + std::to_string(dim) + " inputs per unit");
      }
      for (double w : row) check_finite(w, where + " weight");
    }
    for (double v : layer.bias) check_finite(v, where + " bias");
    if (layer.activation.poly) {
      for (double v : layer.activation.poly->coeffs) check_finite(v, where + " coefficient");
    }
    dim = layer.out_dim();
  }
}

std::vector<std::string> PolyNetwork::warnings() const {
  std::vector<std::string> w;
  if (layers.size() > 3) {
    w.push_back("network has " + std::to_string(layers.size()) +
                " layers; each activation layer multiplies the degree");
  }
  return w;
}

int total_degree(const PolyNetwork& net) {
  int64_t d = 1;
  for (const Layer& layer : net.layers) {
    d *= std::max(1, layer.activation.degree());
    if (d > (int64_t{1} << 30)) throw ValidationError("network degree is too large");
  }
  return static_cast<int>(d);
}

int64_t grad_degree_bound(int degree, int layers) {
  if (degree < 1 || layers < 0) throw std::invalid_argument("degree >= 1, layers >= 0");
  int64_t r = 1;
  for (int i = 0; i < 2 * layers; ++i) {
    if (r > (int64_t{1} << 40)) throw std::overflow_error("gradient degree bound overflows");
    r *= degree;
  }
  return r;
}

int64_t grad_degree_bound(const PolyNetwork& net) {
  int d = 1;
  for (const Layer& layer : net.layers) d = std::max(d, layer.activation.degree());
  return grad_degree_bound(d, static_cast<int>(net.layers.size()));
}

std::string_view to_string(OpCode op) {
  switch (op) {
    case OpCode::kInput: return "input";
    case OpCode::kConstant: return "const";
    case OpCode::kAddCC: return "add_cc";
    case OpCode::kMulCC: return "mul_cc";
    case OpCode::kAddCP: return "add_cp";
    case OpCode::kMulCP: return "mul_cp";
  }
  return "?";
}

OpCode parse_opcode(std::string_view name) {
  for (OpCode op : {OpCode::kInput, OpCode::kConstant, OpCode::kAddCC, OpCode::kMulCC,
                    OpCode::kAddCP, OpCode::kMulCP}) {
    if (to_string(op) == name) return op;
  }
  throw ValidationError("unknown circuit op: " + std::string(name));
}

CircuitBuilder::CircuitBuilder(SchemeParams params, CompileConfig config)
    : c_{std::move(params), config, {}, {}, {}, 1, 0, {}, {}} {}

int CircuitBuilder::input(const Interval& iv, int scale) {
  CircuitNode n;
  n.op = OpCode::kInput;
  n.value = static_cast<int64_t>(c_.input_intervals.size());
  n.scale = scale;
  n.lo = quantize_fixed(iv.lo, scale, "input bound");
  n.hi = quantize_fixed(iv.hi, scale, "input bound");
  n.quant_error = std::ldexp(0.5, -scale);
  c_.input_intervals.push_back(iv);
  return push(n, iv.lo, iv.hi, 0.0);
}

int CircuitBuilder::mul_const(int x, double c, int64_t c_int, int c_scale) {
  const CircuitNode nx = c_.nodes.at(x);
  const double c_hat = std::ldexp(static_cast<double>(c_int), -c_scale);
  CircuitNode n;
  n.scale = nx.scale + c_scale;
  std::tie(n.lo, n.hi) = mul_interval<i128>(nx.lo, nx.hi, c_int, c_int, sat_mul);
  n.quant_error = std::fabs(c_hat) * nx.quant_error + std::fabs(c_hat - c) * nx.magnitude;
  auto [rlo, rhi] = mul_interval<double>(rlo_[x], rhi_[x], c, c, dmul);
  const double approx = std::fabs(c) * approx_[x];
  n.a = x;
  if (c_.config.encrypt_constants) {
    CircuitNode k;
    k.op = OpCode::kConstant;
    k.value = c_int;
    k.scale = c_scale;
    k.lo = k.hi = c_int;
    k.quant_error = std::fabs(c_hat - c);
    n.b = push(k, c, c, 0.0);
    n.op = OpCode::kMulCC;
  } else {
    n.op = OpCode::kMulCP;
    n.value = c_int;
  }
  return push(n, rlo, rhi, approx);
}

int CircuitBuilder::add_const(int x, double c, int64_t c_int) {
  const CircuitNode nx = c_.nodes.at(x);
  const double c_hat = std::ldexp(static_cast<double>(c_int), -nx.scale);
  CircuitNode n;
  n.op = OpCode::kAddCP;
  n.a = x;
  n.value = c_int;
  n.scale = nx.scale;
  n.lo = sat_add(nx.lo, c_int);
  n.hi = sat_add(nx.hi, c_int);
  n.quant_error = nx.quant_error + std::fabs(c_hat - c);
  return push(n, rlo_[x] + c, rhi_[x] + c, approx_[x]);
}

int CircuitBuilder::add(int x, int y) {
  const CircuitNode nx = c_.nodes.at(x);
  const CircuitNode ny = c_.nodes.at(y);
  if (nx.scale != ny.scale) throw ScaleMismatch();
  CircuitNode n;
  n.op = OpCode::kAddCC;
  n.a = x;
  n.b = y;
  n.scale = nx.scale;
  n.lo = sat_add(nx.lo, ny.lo);
  n.hi = sat_add(nx.hi, ny.hi);
  n.quant_error = nx.quant_error + ny.quant_error;
  return push(n, rlo_[x] + rlo_[y], rhi_[x] + rhi_[y], approx_[x] + approx_[y]);
}

int CircuitBuilder::mul(int x, int y) {
  const CircuitNode nx = c_.nodes.at(x);
  const CircuitNode ny = c_.nodes.at(y);
  CircuitNode n;
  n.op = OpCode::kMulCC;
  n.a = x;
  n.b = y;
  n.scale = nx.scale + ny.scale;
  std::tie(n.lo, n.hi) = mul_interval<i128>(nx.lo, nx.hi, ny.lo, ny.hi, sat_mul);
  n.quant_error =
      (nx.magnitude + nx.quant_error) * ny.quant_error + ny.magnitude * nx.quant_error;
  auto [rlo, rhi] = mul_interval<double>(rlo_[x], rhi_[x], rlo_[y], rhi_[y], dmul);
  return push(n, rlo, rhi, 0.0);
}

int CircuitBuilder::power(int h, int e, std::map<int, int>& cache) {
  if (e == 1) return h;
  if (auto it = cache.find(e); it != cache.end()) return it->second;
  int high = 1;
  while (high * 2 < e) high *= 2;
  const int lhs = power(h, high, cache);
  const int rhs = power(h, e - high, cache);
  const int id = mul(lhs, rhs);
  // Bounds of the power itself rather than of the product of intervals.
  CircuitNode& n = c_.nodes[id];
  const CircuitNode& nh = c_.nodes[h];
  std::tie(n.lo, n.hi) = pow_interval<i128>(nh.lo, nh.hi, e, sat_pow);
  std::tie(rlo_[id], rhi_[id]) =
      pow_interval<double>(rlo_[h], rhi_[h], e, [](double x, int k) { return std::pow(x, k); });
  n.magnitude = std::max(std::fabs(rlo_[id]), std::fabs(rhi_[id]));
  cache.emplace(e, id);
  return id;
}

int CircuitBuilder::push(CircuitNode n, double rlo, double rhi, double approx) {
  n.magnitude = std::max(std::fabs(rlo), std::fabs(rhi));
  c_.nodes.push_back(n);
  rlo_.push_back(rlo);
  rhi_.push_back(rhi);
  approx_.push_back(approx);
  return static_cast<int>(c_.nodes.size()) - 1;
}

CompiledCircuit CircuitBuilder::finish(std::vector<int> outputs,
                                       std::optional<int> total_degree) {
  CompiledCircuit c = c_;
  c.outputs = std::move(outputs);
  for (int o : c.outputs) {
    c.quant_bound.push_back(c.nodes.at(o).quant_error);
    c.total_bound.push_back(c.nodes[o].quant_error + approx_[o]);
  }
  c.mul_depth = dag_depth(c);
  c.total_degree = dag_degree(c);
  if (total_degree && *total_degree != c.total_degree) {
    throw std::logic_error("circuit degree disagrees with the network degree");
  }
  return c;
}

int CompiledCircuit::input_scale(size_t i) const {
  for (const CircuitNode& n : nodes) {
    if (n.op == OpCode::kInput && static_cast<size_t>(n.value) == i) return n.scale;
  }
  throw std::out_of_range("no such circuit input");
}

std::string CompiledCircuit::hash() const {
  std::ostringstream s;
  s << "cryptonet.circuit.v1|" << params_id_hex(params.id()) << '|' << config.input_scale
    << ',' << config.weight_scale << ',' << config.coeff_scale << ','
    << config.encrypt_constants << '|';
  for (const Interval& iv : input_intervals) s << iv.lo << ',' << iv.hi << ';';
  s << '|';
  for (const CircuitNode& n : nodes) {
    s << to_string(n.op) << ',' << n.a << ',' << n.b << ',' << n.value << ',' << n.scale << ';';
  }
  s << '|';
  for (int o : outputs) s << o << ';';
  const std::string text = s.str();
  unsigned char digest[crypto_hash_sha256_BYTES];
  crypto_hash_sha256(digest, reinterpret_cast<const unsigned char*>(text.data()), text.size());
  ParamsId id;
  std::copy(digest, digest + id.size(), id.begin());
  return params_id_hex(id);
}

int dag_degree(const CompiledCircuit& c) {
  std::vector<int> deg(c.nodes.size());
  for (size_t i = 0; i < c.nodes.size(); ++i) {
    const CircuitNode& n = c.nodes[i];
    switch (n.op) {
      case OpCode::kInput: deg[i] = 1; break;
      case OpCode::kConstant: deg[i] = 0; break;
      case OpCode::kAddCC: deg[i] = std::max(deg[n.a], deg[n.b]); break;
      case OpCode::kMulCC: deg[i] = deg[n.a] + deg[n.b]; break;
      case OpCode::kAddCP:
      case OpCode::kMulCP: deg[i] = deg[n.a]; break;
    }
  }
  int d = 0;
  for (int o : c.outputs) d = std::max(d, deg[o]);
  return c.outputs.empty() ? 1 : d;
}

int dag_depth(const CompiledCircuit& c) {
  std::vector<int> depth(c.nodes.size());
  int d = 0;
  for (size_t i = 0; i < c.nodes.size(); ++i) {
    const CircuitNode& n = c.nodes[i];
    switch (n.op) {
      case OpCode::kInput:
      case OpCode::kConstant: depth[i] = 0; break;
      case OpCode::kAddCC: depth[i] = std::max(depth[n.a], depth[n.b]); break;
      case OpCode::kMulCC: depth[i] = std::max(depth[n.a], depth[n.b]) + 1; break;
      case OpCode::kAddCP:
      case OpCode::kMulCP: depth[i] = depth[n.a]; break;
    }
    d = std::max(d, depth[i]);
  }
  return d;
}

BudgetReport validate_budget(const CompiledCircuit& c, const SchemeParams& params) {
  BudgetReport r;
  r.depth = dag_depth(c);
  r.max_depth = params.max_mul_depth();
  r.depth_ok = r.depth <= r.max_depth;
  if (!r.depth_ok) {
    r.failures.push_back("depth: circuit needs " + std::to_string(r.depth) +
                         " multiplicative levels, parameters allow " +
                         std::to_string(r.max_depth));
  }

  const double half_t_bits = std::log2(static_cast<double>(params.t())) - 1.0;
  const i128 widest = max_magnitude(c, &r.worst_magnitude_node);
  r.magnitude_margin_bits =
      widest == 0 ? half_t_bits : half_t_bits - std::log2(to_double(widest));
  r.magnitude_ok = 2 * widest < static_cast<i128>(params.t());
  if (!r.magnitude_ok) {
    r.failures.push_back("overflow: node " + std::to_string(r.worst_magnitude_node) +
                         " reaches magnitude " + to_string(widest) + " but t/2 = " +
                         std::to_string(params.t() / 2));
  }

  const NoiseModel model(params.n(), params.q(), params.t(), params.noise_stddev(),
                         params.decomp_base());
  const size_t words = (c.num_inputs() + 63) / 64;
  std::vector<std::vector<uint64_t>> deps(c.nodes.size(), std::vector<uint64_t>(words));
  auto disjoint = [&](int a, int b) {
    for (size_t w = 0; w < words; ++w) {
      if (deps[a][w] & deps[b][w]) return false;
    }
    return true;
  };
  std::vector<NoiseEstimate> noise(c.nodes.size());
  r.noise_margin_bits = model.budget(NoiseEstimate{});
  for (size_t i = 0; i < c.nodes.size(); ++i) {
    const CircuitNode& n = c.nodes[i];
    const double msg = to_double(abs_max(n.lo, n.hi));
    const double cabs = std::fabs(static_cast<double>(n.value));
    NoiseEstimate& e = noise[i];
    switch (n.op) {
      case OpCode::kInput:
        e = model.fresh(msg);
        deps[i][n.value / 64] |= uint64_t{1} << (n.value % 64);
        break;
      case OpCode::kConstant: e = model.trivial(msg); break;
      case OpCode::kAddCC:
        e = disjoint(n.a, n.b) ? model.add(noise[n.a], noise[n.b])
                               : model.add_correlated(noise[n.a], noise[n.b]);
        break;
      case OpCode::kMulCC:
        if (n.a == n.b) {
          e = model.square(noise[n.a]);
        } else {
          e = disjoint(n.a, n.b) ? model.mul(noise[n.a], noise[n.b])
                                 : model.mul_correlated(noise[n.a], noise[n.b]);
        }
        break;
      case OpCode::kAddCP: e = model.add_plain(noise[n.a], cabs); break;
      case OpCode::kMulCP: e = model.mul_plain(noise[n.a], cabs); break;
    }
    if (n.op != OpCode::kInput && n.op != OpCode::kConstant) {
      deps[i] = deps[n.a];
      if (n.b >= 0) {
        for (size_t w = 0; w < words; ++w) deps[i][w] |= deps[n.b][w];
      }
    }
    e.msg = std::min(e.msg, std::max(msg, 1.0));
    const double budget = model.budget(e);
    if (budget < r.noise_margin_bits || r.worst_noise_node < 0) {
      r.noise_margin_bits = budget;
      r.worst_noise_node = static_cast<int>(i);
    }
  }
  r.noise_ok = r.noise_margin_bits > 0.0;
  if (!r.noise_ok) {
    std::ostringstream msg;
    msg << "noise: node " << r.worst_noise_node << " has an estimated budget of "
        << r.noise_margin_bits << " bits";
    r.failures.push_back(msg.str());
  }
  return r;
}

CompiledCircuit lower_network(const PolyNetwork& net, const SchemeParams& params,
                              const CompileConfig& config) {
  net.validate();
  validate_config(config);
  return build(net, params, config);
}

CompiledCircuit compile(const PolyNetwork& net, const SchemeParams& params,
                        const CompileConfig& config) {
  CompiledCircuit c = lower_network(net, params, config);
  BudgetReport report = validate_budget(c, params);
  if (!report.magnitude_ok && config.auto_raise_t) {
    int where;
    const int bits = bit_length(static_cast<u128>(max_magnitude(c, &where))) + 1;
    if (bits > 62) {
      throw ValidationError("overflow: circuit needs a plaintext modulus above 2^62");
    }
    try {
      c.params = SchemeParams::generate(params.n(), bit_length(params.q()), uint64_t{1} << bits,
                                        params.max_mul_depth(), params.noise_stddev(),
                                        params.decomp_base());
    } catch (const std::invalid_argument& e) {
      throw ValidationError("raising t to 2^" + std::to_string(bits) + " failed: " + e.what());
    }
    report = validate_budget(c, c.params);
  }
  if (!report.ok()) {
    std::string msg = "circuit does not fit the parameters";
    for (const std::string& f : report.failures) msg += "; " + f;
    throw ValidationError(msg);
  }
  return c;
}

}  // namespace cryptonet
