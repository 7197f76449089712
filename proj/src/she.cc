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

#include "cryptonet/she.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include <sodium.h>

#include "cryptonet/noise_model.h"
#include "exact_convolution.h"

namespace cryptonet {

struct EvaluationKeys::Precomputed {
  const internal::ExactConvolution* conv = nullptr;
  std::vector<internal::NttForm> b;
  std::vector<internal::NttForm> a;
};

namespace {

int tensor_bound_bits(const RingParams& ring) {
  return 2 * ring.log_q() + bit_length(ring.n()) + 1;
}

int relin_bound_bits(const RingParams& ring, int log_base, int digits) {
  return log_base + ring.log_q() + bit_length(ring.n()) + bit_length(digits);
}

void append_le(std::vector<uint8_t>& out, u128 v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

ParamsId hash_params(size_t n, u128 q, uint64_t t, double stddev, int depth,
                     uint64_t base) {
  static constexpr char kDomain[] = "cryptonet.params.v1";
  std::vector<uint8_t> buf(kDomain, kDomain + sizeof(kDomain) - 1);
  append_le(buf, n, 8);
  append_le(buf, q, 16);
  append_le(buf, t, 8);
  append_le(buf, std::bit_cast<uint64_t>(stddev), 8);
  append_le(buf, static_cast<uint32_t>(depth), 4);
  append_le(buf, base, 8);
  ensure_sodium();
  ParamsId id;
  crypto_hash_sha256(id.data(), buf.data(), buf.size());
  return id;
}

i128 centered_plain(Plaintext m, uint64_t t) {
  return centered(static_cast<u128>(m.value % t), static_cast<u128>(t));
}

void check_ct_params(const Ciphertext& ct, const SchemeParams& params) {
  if (ct.params_id() != params.id()) throw ParamsMismatch("ciphertext");
  if (!(ct[0].params() == params.ring())) throw ParamsMismatch("ring");
}

void check_pair(const Ciphertext& a, const Ciphertext& b) {
  if (a.params_id() != b.params_id()) throw ParamsMismatch();
  if (a.size() != 2 || b.size() != 2) {
    throw std::invalid_argument("expected relinearized ciphertexts");
  }
}

// Coefficient 0 of a * s for ternary s, in O(n).
u128 constant_term_times_ternary(const RingElement& a, const std::vector<int8_t>& s) {
  const size_t n = a.size();
  const u128 q = a.params().q();
  u128 acc = 0;
  // (a*s)_0 = a_0 s_0 - sum_{j>0} a_j s_{n-j}
  auto add = [&](u128 v) { acc = acc + v >= q ? acc + v - q : acc + v; };
  auto sub = [&](u128 v) { acc = acc >= v ? acc - v : acc + q - v; };
  for (size_t j = 0; j < n; ++j) {
    const int8_t sv = j == 0 ? s[0] : static_cast<int8_t>(-s[n - j]);
    if (sv == 1) add(a[j]);
    if (sv == -1) sub(a[j]);
  }
  return acc;
}

std::vector<int8_t> ternary_of(const RingElement& s) {
  std::vector<int8_t> out(s.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = static_cast<int8_t>(s.centered(i));
  return out;
}

// round(t * x / q) mod q for an exact integer x.
u128 scale_round(const i256& x, uint64_t t, u128 q) {
  const i256 qq(q);
  i256 a = x / qq;
  i256 r = x - a * qq;
  if (r < 0) {
    r += qq;
    a -= 1;
  }
  const u256 num = u256(2) * u256(t) * u256(r) + u256(q);
  const u128 frac = static_cast<u128>(num / (u256(2) * u256(q)));
  const u128 ta = mulmod(reduce_signed(a, q), t % q, q);
  const u128 s = ta + frac % q;
  return s >= q ? s - q : s;
}

}  // namespace

std::string params_id_hex(const ParamsId& id) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (uint8_t b : id) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 15]);
  }
  return out;
}

SchemeParams::SchemeParams(RingParams ring, uint64_t t, double noise_stddev,
                           int max_mul_depth, uint64_t decomp_base)
    : ring_(ring),
      t_(t),
      noise_stddev_(noise_stddev),
      max_mul_depth_(max_mul_depth),
      decomp_base_(decomp_base) {
  if (t < 2) throw std::invalid_argument("plaintext modulus must be at least 2");
  if (t > (uint64_t{1} << 62)) throw std::invalid_argument("plaintext modulus exceeds 2^62");
  if (u128{t} >= ring.q()) throw std::invalid_argument("plaintext modulus must be below q");
  if (!(noise_stddev > 0.0) || !std::isfinite(noise_stddev)) {
    throw std::invalid_argument("noise stddev must be positive");
  }
  if (decomp_base < 2 || !std::has_single_bit(decomp_base) || decomp_base > (uint64_t{1} << 32)) {
    throw std::invalid_argument("decomposition base must be a power of two in [2, 2^32]");
  }
  if (max_mul_depth < 0) throw std::invalid_argument("max_mul_depth must be non-negative");
  try {
    internal::ExactConvolution::get(ring.n(), tensor_bound_bits(ring));
  } catch (const std::exception&) {
    throw std::invalid_argument("q too large for the ring dimension");
  }
  const int supported = supported_depth();
  if (supported < 0) {
    throw std::invalid_argument("parameters leave no noise budget for fresh ciphertexts");
  }
  if (max_mul_depth > supported) {
    throw std::invalid_argument("max_mul_depth " + std::to_string(max_mul_depth) +
                                " exceeds the supported depth " + std::to_string(supported));
  }
  id_ = hash_params(ring.n(), ring.q(), t, noise_stddev, max_mul_depth, decomp_base);
}

SchemeParams SchemeParams::generate(size_t n, int log_q, uint64_t t,
                                    std::optional<int> max_mul_depth,
                                    double noise_stddev, uint64_t decomp_base) {
  if (log_q < 2 || log_q > RingParams::kMaxModulusBits) {
    throw std::invalid_argument("log_q must be in [2, 116]");
  }
  if (n < 2 || !std::has_single_bit(n)) {
    throw std::invalid_argument("ring dimension must be a power of two");
  }
  if (t < 2) throw std::invalid_argument("plaintext modulus must be at least 2");
  const u128 step = std::lcm(static_cast<u128>(2 * n), static_cast<u128>(t));
  const u128 limit = u128{1} << log_q;
  if (step >= limit) throw std::invalid_argument("log_q too small for lcm(2n, t)");
  u128 k = (limit - 2) / step;
  for (; k > 0; --k) {
    const u128 q = k * step + 1;
    if (is_probable_prime(q)) {
      RingParams ring(n, q);
      if (max_mul_depth) return SchemeParams(ring, t, noise_stddev, *max_mul_depth, decomp_base);
      const int depth = NoiseModel(n, q, t, noise_stddev, decomp_base).supported_depth();
      return SchemeParams(ring, t, noise_stddev, std::max(depth, 0), decomp_base);
    }
  }
  throw std::invalid_argument("no prime q = 1 mod lcm(2n, t) below 2^log_q");
}

SchemeParams SchemeParams::demo() { return generate(2048, 54, 65536); }

int SchemeParams::log_decomp_base() const { return bit_length(decomp_base_) - 1; }

int SchemeParams::num_digits() const {
  const int lw = log_decomp_base();
  return (ring_.log_q() + lw - 1) / lw;
}

int SchemeParams::supported_depth() const {
  return NoiseModel(ring_.n(), ring_.q(), t_, noise_stddev_, decomp_base_).supported_depth();
}

Ciphertext::Ciphertext(std::vector<RingElement> components, int level, ParamsId params_id)
    : components_(std::move(components)), level_(level), params_id_(params_id) {
  if (components_.size() < 2) throw std::invalid_argument("ciphertext needs two components");
  for (const auto& c : components_) {
    if (!(c.params() == components_[0].params())) throw std::invalid_argument("ring mismatch");
  }
  if (level_ < 0) throw std::invalid_argument("negative ciphertext level");
}

EvaluationKeys::EvaluationKeys(SchemeParams params,
                               std::vector<std::pair<RingElement, RingElement>> relin_keys)
    : params_(std::move(params)), relin_keys_(std::move(relin_keys)) {
  if (relin_keys_.size() != static_cast<size_t>(params_.num_digits())) {
    throw std::invalid_argument("relinearization key count does not match digit count");
  }
  auto pre = std::make_shared<Precomputed>();
  pre->conv = &internal::ExactConvolution::get(
      params_.n(), relin_bound_bits(params_.ring(), params_.log_decomp_base(),
                                    params_.num_digits()));
  for (const auto& [b, a] : relin_keys_) {
    if (!(b.params() == params_.ring()) || !(a.params() == params_.ring())) {
      throw ParamsMismatch("relinearization key");
    }
    pre->b.push_back(pre->conv->forward(b.centered()));
    pre->a.push_back(pre->conv->forward(a.centered()));
  }
  precomputed_ = std::move(pre);
}

SecretKeyBundle keygen(const SchemeParams& params, Prng& rng) {
  const RingParams& ring = params.ring();
  RingElement s = sample_ternary(ring, rng);
  const RingElement s2 = ring_mul(s, s);
  std::vector<std::pair<RingElement, RingElement>> rlk;
  u128 power = 1;
  for (int i = 0; i < params.num_digits(); ++i) {
    RingElement a = sample_uniform(ring, rng);
    RingElement e = sample_noise(ring, params.noise_stddev(), rng);
    RingElement b = ring_sub(ring_scale(s2, static_cast<i128>(power)),
                             ring_add(ring_mul(a, s), e));
    rlk.emplace_back(std::move(b), std::move(a));
    power = mulmod(power, params.decomp_base() % ring.q(), ring.q());
  }
  return SecretKeyBundle{SecretKey(std::move(s), params.id()),
                         EvaluationKeys(params, std::move(rlk))};
}

SecretKeyBundle make_secret_key_bundle(const SchemeParams& params,
                                       std::span<const int8_t> ternary,
                                       EvaluationKeys eval_keys) {
  if (eval_keys.params().id() != params.id()) throw ParamsMismatch("evaluation keys");
  if (ternary.size() != params.n()) throw std::invalid_argument("secret key length mismatch");
  std::vector<i128> coeffs(ternary.size());
  for (size_t i = 0; i < coeffs.size(); ++i) {
    if (ternary[i] < -1 || ternary[i] > 1) {
      throw std::invalid_argument("secret key coefficients must be ternary");
    }
    coeffs[i] = ternary[i];
  }
  return SecretKeyBundle{
      SecretKey(RingElement::from_signed(params.ring(), coeffs), params.id()),
      std::move(eval_keys)};
}

Ciphertext encrypt(Plaintext m, const SecretKeyBundle& keys, Prng& rng) {
  const SchemeParams& params = keys.params();
  const RingParams& ring = params.ring();
  RingElement a = sample_uniform(ring, rng);
  RingElement e = sample_noise(ring, params.noise_stddev(), rng);
  const i128 scaled = static_cast<i128>(params.delta()) * centered_plain(m, params.t());
  RingElement c0 = ring_add(ring_sub(e, ring_mul(a, keys.secret.poly())),
                            RingElement::constant(ring, scaled));
  return Ciphertext({std::move(c0), std::move(a)}, 0, params.id());
}

Ciphertext encrypt_trivial(Plaintext c, const SchemeParams& params) {
  const i128 scaled = static_cast<i128>(params.delta()) * centered_plain(c, params.t());
  return Ciphertext({RingElement::constant(params.ring(), scaled), RingElement(params.ring())},
                    0, params.id());
}

Plaintext decrypt(const Ciphertext& ct, const SecretKeyBundle& keys) {
  const SchemeParams& params = keys.params();
  check_ct_params(ct, params);
  if (ct.size() > 3) throw std::invalid_argument("oversized ciphertext");
  const u128 q = params.q();
  const auto s = ternary_of(keys.secret.poly());
  u128 w = (ct[0][0] + constant_term_times_ternary(ct[1], s)) % q;
  if (ct.size() == 3) {
    const RingElement s2 = ring_mul(keys.secret.poly(), keys.secret.poly());
    w = (w + ring_mul(ct[2], s2)[0]) % q;
  }
  const u256 num = u256(2) * u256(params.t()) * u256(w) + u256(q);
  const u256 k = num / (u256(2) * u256(q));
  return Plaintext{static_cast<uint64_t>(k % u256(params.t()))};
}

double noise_budget(const Ciphertext& ct, const SecretKeyBundle& keys) {
  const SchemeParams& params = keys.params();
  check_ct_params(ct, params);
  if (ct.size() > 3) throw std::invalid_argument("oversized ciphertext");
  const RingElement& s = keys.secret.poly();
  RingElement w = ring_add(ct[0], ring_mul(ct[1], s));
  if (ct.size() == 3) w = ring_add(w, ring_mul(ct[2], ring_mul(s, s)));
  const RingElement v = ring_scale(w, static_cast<i128>(params.t()));
  const u128 norm = std::max<u128>(v.infinity_norm(), 1);
  const double budget = log2_u128(params.q()) - 1.0 - log2_u128(norm);
  return std::max(budget, 0.0);
}

Ciphertext he_add(const Ciphertext& a, const Ciphertext& b) {
  if (a.params_id() != b.params_id()) throw ParamsMismatch();
  const size_t k = std::max(a.size(), b.size());
  std::vector<RingElement> out;
  for (size_t i = 0; i < k; ++i) {
    if (i < a.size() && i < b.size()) {
      out.push_back(ring_add(a[i], b[i]));
    } else {
      out.push_back(i < a.size() ? a[i] : b[i]);
    }
  }
  return Ciphertext(std::move(out), std::max(a.level(), b.level()), a.params_id());
}

Ciphertext he_negate(const Ciphertext& a) {
  std::vector<RingElement> out;
  for (const auto& c : a.components()) out.push_back(ring_neg(c));
  return Ciphertext(std::move(out), a.level(), a.params_id());
}

Ciphertext he_sub(const Ciphertext& a, const Ciphertext& b) { return he_add(a, he_negate(b)); }

Ciphertext he_add_plain(const Ciphertext& a, Plaintext c, const SchemeParams& params) {
  check_ct_params(a, params);
  const i128 scaled = static_cast<i128>(params.delta()) * centered_plain(c, params.t());
  std::vector<RingElement> out = a.components();
  out[0] = ring_add(out[0], RingElement::constant(params.ring(), scaled));
  return Ciphertext(std::move(out), a.level(), a.params_id());
}

Ciphertext he_mul_plain(const Ciphertext& a, Plaintext c, const SchemeParams& params) {
  check_ct_params(a, params);
  const i128 cc = centered_plain(c, params.t());
  std::vector<RingElement> out;
  for (const auto& comp : a.components()) out.push_back(ring_scale(comp, cc));
  return Ciphertext(std::move(out), a.level(), a.params_id());
}

Ciphertext he_mul_no_relin(const Ciphertext& a, const Ciphertext& b,
                           const SchemeParams& params) {
  check_pair(a, b);
  check_ct_params(a, params);
  const int level = std::max(a.level(), b.level()) + 1;
  if (level > params.max_mul_depth()) throw DepthExhausted();
  const RingParams& ring = params.ring();
  const auto& conv = internal::ExactConvolution::get(ring.n(), tensor_bound_bits(ring));
  const auto a0 = conv.forward(a[0].centered());
  const auto a1 = conv.forward(a[1].centered());
  const auto b0 = conv.forward(b[0].centered());
  const auto b1 = conv.forward(b[1].centered());
  auto x0 = conv.multiply(a0, b0);
  auto x1 = conv.multiply(a0, b1);
  conv.multiply_accumulate(x1, a1, b0);
  auto x2 = conv.multiply(a1, b1);

  std::vector<RingElement> out;
  for (auto* x : {&x0, &x1, &x2}) {
    const auto exact = conv.inverse(std::move(*x));
    std::vector<u128> coeffs(exact.size());
    for (size_t i = 0; i < coeffs.size(); ++i) {
      coeffs[i] = scale_round(exact[i], params.t(), ring.q());
    }
    out.emplace_back(ring, std::move(coeffs));
  }
  return Ciphertext(std::move(out), level, a.params_id());
}

Ciphertext relinearize(const Ciphertext& a, const EvaluationKeys& keys) {
  const SchemeParams& params = keys.params();
  check_ct_params(a, params);
  if (a.size() == 2) return a;
  if (a.size() != 3) throw std::invalid_argument("oversized ciphertext");
  const auto& pre = keys.precomputed();
  const auto& conv = *pre.conv;
  const int lw = params.log_decomp_base();
  const u128 mask = (u128{1} << lw) - 1;
  const size_t n = params.n();

  auto acc0 = conv.zero();
  auto acc1 = conv.zero();
  std::vector<int64_t> digit(n);
  for (int i = 0; i < params.num_digits(); ++i) {
    for (size_t j = 0; j < n; ++j) digit[j] = static_cast<int64_t>((a[2][j] >> (i * lw)) & mask);
    const auto d = conv.forward_small(digit);
    conv.multiply_accumulate(acc0, d, pre.b[i]);
    conv.multiply_accumulate(acc1, d, pre.a[i]);
  }
  const RingParams& ring = params.ring();
  RingElement c0 = ring_add(a[0], RingElement(ring, conv.inverse_mod(std::move(acc0), ring.q())));
  RingElement c1 = ring_add(a[1], RingElement(ring, conv.inverse_mod(std::move(acc1), ring.q())));
  return Ciphertext({std::move(c0), std::move(c1)}, a.level(), a.params_id());
}

Ciphertext he_mul(const Ciphertext& a, const Ciphertext& b, const EvaluationKeys& keys) {
  return relinearize(he_mul_no_relin(a, b, keys.params()), keys);
}

int power_ladder_depth(int degree) {
  if (degree <= 1) return 0;
  return bit_length(static_cast<u128>(degree - 1));
}

namespace {

class PowerLadder {
 public:
  PowerLadder(const Ciphertext& x, const EvaluationKeys& keys) : keys_(keys) {
    powers_.emplace(1, x);
  }

  const Ciphertext& get(int j) {
    auto it = powers_.find(j);
    if (it != powers_.end()) return it->second;
    const int hi = std::bit_floor(static_cast<unsigned>(j));
    Ciphertext value = hi == j ? he_mul(get(j / 2), get(j / 2), keys_)
                               : he_mul(get(hi), get(j - hi), keys_);
    return powers_.emplace(j, std::move(value)).first->second;
  }

 private:
  const EvaluationKeys& keys_;
  std::map<int, Ciphertext> powers_;
};

}  // namespace

Ciphertext eval_poly(std::span<const Plaintext> coeffs, const Ciphertext& ct,
                     const EvaluationKeys& keys) {
  const SchemeParams& params = keys.params();
  check_ct_params(ct, params);
  const uint64_t t = params.t();
  int degree = static_cast<int>(coeffs.size()) - 1;
  while (degree > 0 && coeffs[degree].value % t == 0) --degree;
  const int depth = power_ladder_depth(degree);
  if (ct.level() + depth > params.max_mul_depth()) {
    throw DepthExhausted("polynomial of degree " + std::to_string(degree) + " needs depth " +
                         std::to_string(depth));
  }
  PowerLadder ladder(ct, keys);
  std::optional<Ciphertext> acc;
  for (int j = 1; j <= degree; ++j) {
    if (coeffs[j].value % t == 0) continue;
    Ciphertext term = he_mul_plain(ladder.get(j), coeffs[j], params);
    acc = acc ? he_add(*acc, term) : std::move(term);
  }
  if (!acc) acc = he_mul_plain(ct, Plaintext{0}, params);
  const Plaintext c0 = coeffs.empty() ? Plaintext{0} : coeffs[0];
  return he_add_plain(*acc, c0, params);
}

namespace {

Ciphertext product_tree(std::vector<Ciphertext> factors, const EvaluationKeys& keys) {
  while (factors.size() > 1) {
    std::vector<Ciphertext> next;
    for (size_t i = 0; i + 1 < factors.size(); i += 2) {
      next.push_back(he_mul(factors[i], factors[i + 1], keys));
    }
    if (factors.size() % 2 == 1) next.push_back(std::move(factors.back()));
    factors = std::move(next);
  }
  return std::move(factors.front());
}

}  // namespace

Ciphertext eval_multivariate(std::span<const Monomial> terms,
                             std::span<const Ciphertext> inputs,
                             const EvaluationKeys& keys) {
  const SchemeParams& params = keys.params();
  if (inputs.empty()) throw std::invalid_argument("no inputs");
  for (const auto& in : inputs) check_ct_params(in, params);
  const uint64_t t = params.t();

  // Depth check up front so no work is done on failure.
  for (const auto& m : terms) {
    if (m.exponents.size() != inputs.size()) {
      throw std::invalid_argument("monomial arity does not match input count");
    }
    int total = 0, level = 0;
    for (size_t v = 0; v < inputs.size(); ++v) {
      if (m.exponents[v] < 0) throw std::invalid_argument("negative exponent");
      total += m.exponents[v];
      if (m.exponents[v] > 0) level = std::max(level, inputs[v].level());
    }
    if (m.coeff % t == 0 || total == 0) continue;
    if (level + power_ladder_depth(total) > params.max_mul_depth()) {
      throw DepthExhausted("monomial of total degree " + std::to_string(total));
    }
  }

  std::optional<Ciphertext> acc;
  u128 constant = 0;
  for (const auto& m : terms) {
    if (m.coeff % t == 0) continue;
    std::vector<Ciphertext> factors;
    for (size_t v = 0; v < inputs.size(); ++v) {
      for (int e = 0; e < m.exponents[v]; ++e) factors.push_back(inputs[v]);
    }
    if (factors.empty()) {
      constant = (constant + m.coeff % t) % t;
      continue;
    }
    Ciphertext term = he_mul_plain(product_tree(std::move(factors), keys),
                                   Plaintext{m.coeff % t}, params);
    acc = acc ? he_add(*acc, term) : std::move(term);
  }
  if (!acc) acc = he_mul_plain(inputs[0], Plaintext{0}, params);
  return he_add_plain(*acc, Plaintext{static_cast<uint64_t>(constant)}, params);
}

}  // namespace cryptonet
