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

#include "cryptonet/json_io.h"

#include <cmath>
#include <fstream>
#include <sstream>

namespace cryptonet {

using nlohmann::json;

namespace {

constexpr const char* kNetworkFormat = "cryptonet.network.v1";
constexpr const char* kCircuitFormat = "cryptonet.circuit.v1";

template <typename T>
T get(const json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("missing field \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("field \"") + key + "\": " + e.what());
  }
}

i128 parse_i128(const std::string& s) {
  if (s.empty()) throw ValidationError("empty integer");
  const bool neg = s[0] == '-';
  const u128 mag = parse_u128(std::string_view(s).substr(neg ? 1 : 0));
  return neg ? -static_cast<i128>(mag) : static_cast<i128>(mag);
}

Interval interval_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ValidationError("interval must be [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Layer avg_pool_layer(size_t in_dim, size_t size) {
  if (size == 0 || in_dim % size != 0) {
    throw ValidationError("avg_pool size must divide the layer input width");
  }
  Layer layer;
  layer.weights.assign(in_dim / size, std::vector<double>(in_dim, 0.0));
  layer.bias.assign(in_dim / size, 0.0);
  for (size_t o = 0; o < in_dim / size; ++o) {
    for (size_t k = 0; k < size; ++k) layer.weights[o][o * size + k] = 1.0 / size;
  }
  return layer;
}

}  // namespace

json params_to_json(const SchemeParams& p) {
  return {{"n", p.n()},
          {"q", to_string(p.q())},
          {"t", p.t()},
          {"noise_stddev", p.noise_stddev()},
          {"max_mul_depth", p.max_mul_depth()},
          {"decomp_base", p.decomp_base()},
          {"params_id", params_id_hex(p.id())}};
}

SchemeParams params_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("params must be a JSON object");
  const auto n = get<size_t>(j, "n");
  const auto t = get<uint64_t>(j, "t");
  const double stddev = j.value("noise_stddev", SchemeParams::kDefaultNoiseStddev);
  const uint64_t base = j.value("decomp_base", SchemeParams::kDefaultDecompBase);
  try {
    if (!j.contains("q")) {
      std::optional<int> depth;
      if (j.contains("max_mul_depth")) depth = get<int>(j, "max_mul_depth");
      return SchemeParams::generate(n, get<int>(j, "log_q"), t, depth, stddev, base);
    }
    SchemeParams p(RingParams(n, parse_u128(get<std::string>(j, "q"))), t, stddev,
                   get<int>(j, "max_mul_depth"), base);
    if (j.contains("params_id") && get<std::string>(j, "params_id") != params_id_hex(p.id())) {
      throw ValidationError("params_id does not match the parameters");
    }
    return p;
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("invalid parameters: ") + e.what());
  }
}

json activation_to_json(const Activation& a) {
  json j = {{"kind", std::string(to_string(a.kind))}};
  if (a.spec) {
    j["interval"] = {a.spec->a(), a.spec->b()};
    if (a.kind == ActivationKind::kCustom) j["table"] = a.spec->table();
  }
  if (a.poly) {
    j["interval"] = {a.poly->a, a.poly->b};
    j["degree"] = a.poly->degree;
    j["coeffs"] = a.poly->coeffs;
    j["sup_error"] = a.poly->sup_error;
  }
  return j;
}

Activation activation_from_json(const json& j) {
  const ActivationKind kind = [&] {
    try {
      return parse_activation_kind(get<std::string>(j, "kind"));
    } catch (const std::invalid_argument& e) {
      throw ValidationError(e.what());
    }
  }();
  Activation act;
  act.kind = kind;
  try {
    if (kind == ActivationKind::kCustom) {
      if (!j.contains("table") || !j.contains("interval")) {
        if (!j.contains("coeffs")) throw ValidationError("custom activation needs a table");
      } else {
        const Interval iv = interval_from(j["interval"]);
        act.spec = ActivationSpec::tabulated(iv.lo, iv.hi, get<std::vector<double>>(j, "table"));
      }
    } else if (kind != ActivationKind::kIdentity && kind != ActivationKind::kSquare) {
      act.spec = j.contains("interval")
                     ? ActivationSpec(kind, interval_from(j["interval"]).lo,
                                      interval_from(j["interval"]).hi)
                     : ActivationSpec(kind);
    }
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  if (j.contains("coeffs")) {
    PolyApprox p;
    p.coeffs = get<std::vector<double>>(j, "coeffs");
    if (p.coeffs.size() < 2) throw ValidationError("activation polynomial needs degree >= 1");
    p.degree = static_cast<int>(p.coeffs.size()) - 1;
    const Interval iv = j.contains("interval") ? interval_from(j["interval"]) : Interval{-1, 1};
    p.a = iv.lo;
    p.b = iv.hi;
    if (j.contains("sup_error")) {
      p.sup_error = get<double>(j, "sup_error");
    } else if (act.spec) {
      p.sup_error = sup_error_estimate(p, *act.spec, kDefaultGridPoints);
    }
    act.poly = std::move(p);
  } else if (j.contains("degree")) {
    if (!act.spec) throw ValidationError("degree given for an activation with nothing to fit");
    const int degree = get<int>(j, "degree");
    if (degree < 1 || degree > 64) throw ValidationError("activation degree must be in [1, 64]");
    const std::string method = j.value("method", "chebyshev");
    if (method == "chebyshev") {
      act.poly = chebyshev_fit(*act.spec, degree);
    } else if (method == "minimax") {
      act.poly = minimax_fit(*act.spec, degree);
    } else {
      throw ValidationError("unknown fit method: " + method);
    }
  }
  return act;
}

json network_to_json(const PolyNetwork& net) {
  json j = {{"format", kNetworkFormat}, {"input_dim", net.input_dim}};
  j["input_intervals"] = json::array();
  for (const Interval& iv : net.input_intervals) j["input_intervals"].push_back({iv.lo, iv.hi});
  j["layers"] = json::array();
  for (const Layer& layer : net.layers) {
    j["layers"].push_back({{"weights", layer.weights},
                           {"bias", layer.bias},
                           {"activation", activation_to_json(layer.activation)}});
  }
  return j;
}

PolyNetwork network_from_json(const json& j, Prng* init_rng) {
  if (!j.is_object()) throw ValidationError("network must be a JSON object");
  if (j.contains("format") && j["format"] != kNetworkFormat) {
    throw ValidationError("unsupported network format");
  }
  PolyNetwork net;
  net.input_dim = get<size_t>(j, "input_dim");
  if (j.contains("input_intervals")) {
    for (const json& iv : j["input_intervals"]) net.input_intervals.push_back(interval_from(iv));
  } else {
    net.input_intervals.assign(net.input_dim, Interval{-1.0, 1.0});
  }
  size_t dim = net.input_dim;
  for (const json& lj : get<json>(j, "layers")) {
    const std::string type = lj.value("type", "dense");
    Layer layer;
    if (type == "max_pool") {
      throw ValidationError("max pooling has no polynomial form; use avg_pool");
    } else if (type == "avg_pool") {
      layer = avg_pool_layer(dim, get<size_t>(lj, "size"));
    } else if (type != "dense") {
      throw ValidationError("unknown layer type: " + type);
    } else if (lj.contains("weights")) {
      layer.weights = get<std::vector<std::vector<double>>>(lj, "weights");
      layer.bias = lj.contains("bias") ? get<std::vector<double>>(lj, "bias")
                                       : std::vector<double>(layer.weights.size(), 0.0);
    } else {
      if (!init_rng) throw ValidationError("layer without weights");
      const auto units = get<size_t>(lj, "units");
      layer.weights.assign(units, std::vector<double>(dim));
      layer.bias.assign(units, 0.0);
      for (auto& row : layer.weights) {
        for (double& w : row) w = init_rng->uniform(-0.5, 0.5);
      }
      for (double& b : layer.bias) b = init_rng->uniform(-0.5, 0.5);
    }
    if (lj.contains("activation")) layer.activation = activation_from_json(lj["activation"]);
    dim = layer.out_dim();
    net.layers.push_back(std::move(layer));
  }
  net.validate();
  return net;
}

json circuit_to_json(const CompiledCircuit& c) {
  json j = {{"format", kCircuitFormat}, {"params", params_to_json(c.params)}};
  j["config"] = {{"input_scale", c.config.input_scale},
                 {"weight_scale", c.config.weight_scale},
                 {"coeff_scale", c.config.coeff_scale},
                 {"encrypt_constants", c.config.encrypt_constants},
                 {"auto_raise_t", c.config.auto_raise_t}};
  j["input_intervals"] = json::array();
  for (const Interval& iv : c.input_intervals) j["input_intervals"].push_back({iv.lo, iv.hi});
  j["nodes"] = json::array();
  for (const CircuitNode& n : c.nodes) {
    json nj = {{"op", std::string(to_string(n.op))}, {"scale", n.scale}};
    if (n.a >= 0) nj["a"] = n.a;
    if (n.b >= 0) nj["b"] = n.b;
    if (n.op == OpCode::kInput) {
      nj["index"] = n.value;
    } else if (n.op != OpCode::kAddCC && n.op != OpCode::kMulCC) {
      nj["value"] = n.value;
    }
    nj["lo"] = to_string(n.lo);
    nj["hi"] = to_string(n.hi);
    nj["quant_error"] = n.quant_error;
    nj["magnitude"] = n.magnitude;
    j["nodes"].push_back(std::move(nj));
  }
  j["outputs"] = c.outputs;
  std::vector<int> scales;
  for (size_t i = 0; i < c.outputs.size(); ++i) scales.push_back(c.output_scale(i));
  j["output_scales"] = scales;
  j["total_degree"] = c.total_degree;
  j["mul_depth"] = c.mul_depth;
  j["quant_bound"] = c.quant_bound;
  j["total_bound"] = c.total_bound;
  j["hash"] = c.hash();
  return j;
}

CompiledCircuit circuit_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != kCircuitFormat) {
    throw ValidationError("not a compiled circuit");
  }
  const json& cj = get<json>(j, "config");
  CompileConfig config;
  config.input_scale = get<int>(cj, "input_scale");
  config.weight_scale = get<int>(cj, "weight_scale");
  config.coeff_scale = get<int>(cj, "coeff_scale");
  config.encrypt_constants = get<bool>(cj, "encrypt_constants");
  config.auto_raise_t = cj.value("auto_raise_t", true);
  CompiledCircuit c{params_from_json(get<json>(j, "params")), config, {}, {}, {}, 1, 0, {}, {}};
  for (const json& iv : get<json>(j, "input_intervals")) {
    c.input_intervals.push_back(interval_from(iv));
  }
  for (const json& nj : get<json>(j, "nodes")) {
    const int id = static_cast<int>(c.nodes.size());
    CircuitNode n;
    n.op = parse_opcode(get<std::string>(nj, "op"));
    n.scale = get<int>(nj, "scale");
    n.a = nj.value("a", -1);
    n.b = nj.value("b", -1);
    const bool binary = n.op == OpCode::kAddCC || n.op == OpCode::kMulCC;
    const bool unary = n.op == OpCode::kAddCP || n.op == OpCode::kMulCP;
    if ((binary || unary) && (n.a < 0 || n.a >= id)) throw ValidationError("bad operand");
    if (binary != (n.b >= 0) || n.b >= id) throw ValidationError("bad operand");
    if (n.op == OpCode::kInput) {
      n.value = get<int64_t>(nj, "index");
      if (n.value < 0 || static_cast<size_t>(n.value) >= c.input_intervals.size()) {
        throw ValidationError("input index out of range");
      }
    } else if (!binary) {
      n.value = get<int64_t>(nj, "value");
    }
    n.lo = parse_i128(get<std::string>(nj, "lo"));
    n.hi = parse_i128(get<std::string>(nj, "hi"));
    n.quant_error = get<double>(nj, "quant_error");
    n.magnitude = get<double>(nj, "magnitude");
    c.nodes.push_back(n);
  }
  c.outputs = get<std::vector<int>>(j, "outputs");
  for (int o : c.outputs) {
    if (o < 0 || static_cast<size_t>(o) >= c.nodes.size()) throw ValidationError("bad output");
  }
  c.total_degree = get<int>(j, "total_degree");
  c.mul_depth = get<int>(j, "mul_depth");
  c.quant_bound = get<std::vector<double>>(j, "quant_bound");
  c.total_bound = get<std::vector<double>>(j, "total_bound");
  if (get<std::string>(j, "hash") != c.hash()) throw ValidationError("circuit hash mismatch");
  if (c.mul_depth != dag_depth(c) || c.total_degree != dag_degree(c)) {
    throw ValidationError("circuit degree or depth does not match its nodes");
  }
  return c;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace cryptonet
