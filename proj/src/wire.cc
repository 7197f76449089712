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

#include "cryptonet/wire.h"

#include <fcntl.h>
#include <sodium.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <fstream>

#include "cryptonet/prng.h"

namespace cryptonet {

namespace {

constexpr uint8_t kMagic[4] = {'C', 'N', 'E', 'T'};
constexpr size_t kCiphertextHeader = 36;

class Writer {
 public:
  explicit Writer(std::vector<uint8_t>& out) : out_(out) {}
  void u8(uint8_t v) { out_.push_back(v); }
  void le(u128 v, size_t width) {
    for (size_t i = 0; i < width; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void bytes(std::span<const uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

 private:
  std::vector<uint8_t>& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> in) : in_(in) {}
  std::span<const uint8_t> bytes(size_t n) {
    if (n > in_.size() - pos_) {
      throw WireFormatError(WireErrorCode::kTruncated, "need " + std::to_string(n) + " bytes");
    }
    auto r = in_.subspan(pos_, n);
    pos_ += n;
    return r;
  }
  u128 le(size_t width) {
    const auto b = bytes(width);
    u128 v = 0;
    for (size_t i = width; i-- > 0;) v = (v << 8) | b[i];
    return v;
  }
  size_t remaining() const { return in_.size() - pos_; }
  void expect_end() const {
    if (remaining() != 0) {
      throw WireFormatError(WireErrorCode::kTrailingBytes,
                            std::to_string(remaining()) + " unexpected bytes");
    }
  }

 private:
  std::span<const uint8_t> in_;
  size_t pos_ = 0;
};

void write_element(Writer& w, const RingElement& e, size_t width) {
  for (u128 c : e.coeffs()) w.le(c, width);
}

RingElement read_element(Reader& r, const SchemeParams& params) {
  const size_t width = coefficient_width(params);
  std::vector<u128> coeffs(params.n());
  for (u128& c : coeffs) {
    c = r.le(width);
    if (c >= params.q()) throw WireFormatError(WireErrorCode::kBadValue, "coefficient >= q");
  }
  return RingElement(params.ring(), std::move(coeffs));
}

void write_ciphertext(Writer& w, const Ciphertext& ct, const SchemeParams& params) {
  if (ct.params_id() != params.id()) throw ParamsMismatch();
  w.bytes(ct.params_id());
  w.le(static_cast<u128>(ct.level()), 2);
  w.le(ct.size(), 2);
  const size_t width = coefficient_width(params);
  for (const RingElement& e : ct.components()) write_element(w, e, width);
}

Ciphertext read_ciphertext(Reader& r, const SchemeParams& params,
                           std::optional<int> expected_level) {
  const auto id = r.bytes(32);
  if (!std::equal(id.begin(), id.end(), params.id().begin())) {
    throw WireFormatError(WireErrorCode::kParamsMismatch, "ciphertext params_id");
  }
  const int level = static_cast<int>(r.le(2));
  const size_t count = static_cast<size_t>(r.le(2));
  if (count < 2 || count > 3) {
    throw WireFormatError(WireErrorCode::kBadValue, "component count " + std::to_string(count));
  }
  if (level > params.max_mul_depth()) {
    throw WireFormatError(WireErrorCode::kBadValue, "level " + std::to_string(level));
  }
  if (expected_level && level != *expected_level) {
    throw WireFormatError(WireErrorCode::kLevelMismatch, "level " + std::to_string(level));
  }
  std::vector<RingElement> comps;
  for (size_t i = 0; i < count; ++i) comps.push_back(read_element(r, params));
  return Ciphertext(std::move(comps), level, params.id());
}

void write_batch(Writer& w, std::span<const Ciphertext> cts, const SchemeParams& params) {
  w.le(cts.size(), 4);
  for (const Ciphertext& ct : cts) write_ciphertext(w, ct, params);
}

std::vector<Ciphertext> read_batch(Reader& r, const SchemeParams& params,
                                   std::optional<int> expected_level) {
  const size_t count = static_cast<size_t>(r.le(4));
  // Each ciphertext takes at least its header; reject counts the data cannot hold.
  if (count > r.remaining() / kCiphertextHeader) {
    throw WireFormatError(WireErrorCode::kTruncated, "ciphertext count " + std::to_string(count));
  }
  std::vector<Ciphertext> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) out.push_back(read_ciphertext(r, params, expected_level));
  return out;
}

void write_evaluation_keys(Writer& w, const EvaluationKeys& keys) {
  const SchemeParams& params = keys.params();
  w.bytes(params.id());
  w.le(keys.relin_keys().size(), 2);
  const size_t width = coefficient_width(params);
  for (const auto& [b, a] : keys.relin_keys()) {
    write_element(w, b, width);
    write_element(w, a, width);
  }
}

EvaluationKeys read_evaluation_keys(Reader& r, const SchemeParams& params) {
  const auto id = r.bytes(32);
  if (!std::equal(id.begin(), id.end(), params.id().begin())) {
    throw WireFormatError(WireErrorCode::kParamsMismatch, "evaluation keys params_id");
  }
  const size_t digits = static_cast<size_t>(r.le(2));
  if (digits != static_cast<size_t>(params.num_digits())) {
    throw WireFormatError(WireErrorCode::kBadValue, "relinearization key count");
  }
  std::vector<std::pair<RingElement, RingElement>> relin;
  for (size_t i = 0; i < digits; ++i) {
    RingElement b = read_element(r, params);
    RingElement a = read_element(r, params);
    relin.emplace_back(std::move(b), std::move(a));
  }
  return EvaluationKeys(params, std::move(relin));
}

Envelope expect_envelope(std::span<const uint8_t> bytes, MessageType type) {
  Envelope env = decode_envelope(bytes);
  if (env.type != type) {
    throw WireFormatError(WireErrorCode::kUnexpectedType, "message type");
  }
  return env;
}

std::vector<uint8_t> sealed_envelope(MessageType type, std::vector<uint8_t> payload) {
  seal_payload(payload);
  return encode_envelope(type, payload);
}

}  // namespace

std::string_view to_string(WireErrorCode code) {
  switch (code) {
    case WireErrorCode::kTruncated: return "truncated";
    case WireErrorCode::kTrailingBytes: return "trailing bytes";
    case WireErrorCode::kParamsMismatch: return "params mismatch";
    case WireErrorCode::kBadMagic: return "bad magic";
    case WireErrorCode::kBadVersion: return "unsupported version";
    case WireErrorCode::kUnknownType: return "unknown message type";
    case WireErrorCode::kUnexpectedType: return "unexpected message type";
    case WireErrorCode::kTooLarge: return "payload too large";
    case WireErrorCode::kBadValue: return "invalid field";
    case WireErrorCode::kLevelMismatch: return "level mismatch";
    case WireErrorCode::kChecksum: return "checksum mismatch";
  }
  return "?";
}

WireFormatError::WireFormatError(WireErrorCode code, const std::string& detail)
    : Error(std::string(to_string(code)) + ": " + detail), code_(code) {}

std::vector<uint8_t> encode_envelope(MessageType type, std::span<const uint8_t> payload) {
  std::vector<uint8_t> out;
  out.reserve(kEnvelopeHeaderSize + payload.size());
  Writer w(out);
  for (uint8_t b : kMagic) w.u8(b);
  w.u8(kWireVersion);
  w.u8(static_cast<uint8_t>(type));
  w.le(payload.size(), 8);
  w.bytes(payload);
  return out;
}

EnvelopeHeader decode_envelope_header(std::span<const uint8_t> header) {
  Reader r(header);
  const auto magic = r.bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kMagic)) {
    throw WireFormatError(WireErrorCode::kBadMagic, "expected CNET");
  }
  if (r.bytes(1)[0] != kWireVersion) throw WireFormatError(WireErrorCode::kBadVersion, "version");
  const uint8_t type = r.bytes(1)[0];
  switch (static_cast<MessageType>(type)) {
    case MessageType::kInferenceRequest:
    case MessageType::kInferenceResponse:
    case MessageType::kSecretKeys:
    case MessageType::kEvaluationKeys:
    case MessageType::kCiphertexts:
    case MessageType::kError:
      break;
    default:
      throw WireFormatError(WireErrorCode::kUnknownType, "type " + std::to_string(type));
  }
  const uint64_t size = static_cast<uint64_t>(r.le(8));
  if (size > kMaxPayloadSize) throw WireFormatError(WireErrorCode::kTooLarge, "payload size");
  return {static_cast<MessageType>(type), size};
}

Envelope decode_envelope(std::span<const uint8_t> bytes) {
  if (bytes.size() < kEnvelopeHeaderSize) {
    throw WireFormatError(WireErrorCode::kTruncated, "envelope header");
  }
  const EnvelopeHeader h = decode_envelope_header(bytes.first(kEnvelopeHeaderSize));
  const auto rest = bytes.subspan(kEnvelopeHeaderSize);
  if (rest.size() < h.payload_size) throw WireFormatError(WireErrorCode::kTruncated, "payload");
  if (rest.size() > h.payload_size) {
    throw WireFormatError(WireErrorCode::kTrailingBytes, "after payload");
  }
  return {h.type, std::vector<uint8_t>(rest.begin(), rest.end())};
}

void seal_payload(std::vector<uint8_t>& payload) {
  ensure_sodium();
  uint8_t digest[kDigestSize];
  crypto_hash_sha256(digest, payload.data(), payload.size());
  payload.insert(payload.end(), digest, digest + kDigestSize);
}

std::span<const uint8_t> open_payload(std::span<const uint8_t> payload) {
  if (payload.size() < kDigestSize) throw WireFormatError(WireErrorCode::kTruncated, "digest");
  ensure_sodium();
  const auto body = payload.first(payload.size() - kDigestSize);
  uint8_t digest[kDigestSize];
  crypto_hash_sha256(digest, body.data(), body.size());
  if (sodium_memcmp(digest, payload.data() + body.size(), kDigestSize) != 0) {
    throw WireFormatError(WireErrorCode::kChecksum, "payload digest");
  }
  return body;
}

size_t coefficient_width(const SchemeParams& params) {
  return params.q() >> 64 == 0 ? 8 : 16;
}

size_t ciphertext_size(const SchemeParams& params, size_t components) {
  return kCiphertextHeader + components * params.n() * coefficient_width(params);
}

std::vector<uint8_t> serialize_ciphertext(const Ciphertext& ct, const SchemeParams& params) {
  std::vector<uint8_t> out;
  out.reserve(ciphertext_size(params, ct.size()));
  Writer w(out);
  write_ciphertext(w, ct, params);
  return out;
}

Ciphertext deserialize_ciphertext(std::span<const uint8_t> bytes, const SchemeParams& params,
                                  std::optional<int> expected_level) {
  Reader r(bytes);
  Ciphertext ct = read_ciphertext(r, params, expected_level);
  r.expect_end();
  return ct;
}

std::vector<uint8_t> serialize_ciphertexts(std::span<const Ciphertext> cts,
                                           const SchemeParams& params) {
  std::vector<uint8_t> out;
  Writer w(out);
  write_batch(w, cts, params);
  return out;
}

std::vector<Ciphertext> deserialize_ciphertexts(std::span<const uint8_t> bytes,
                                                const SchemeParams& params,
                                                std::optional<int> expected_level) {
  Reader r(bytes);
  std::vector<Ciphertext> out = read_batch(r, params, expected_level);
  r.expect_end();
  return out;
}

std::vector<uint8_t> encode_ciphertext_file(std::span<const Ciphertext> cts,
                                            const SchemeParams& params) {
  return sealed_envelope(MessageType::kCiphertexts, serialize_ciphertexts(cts, params));
}

std::vector<Ciphertext> decode_ciphertext_file(std::span<const uint8_t> bytes,
                                               const SchemeParams& params) {
  const Envelope env = expect_envelope(bytes, MessageType::kCiphertexts);
  return deserialize_ciphertexts(open_payload(env.payload), params);
}

std::vector<uint8_t> encode_evaluation_keys(const EvaluationKeys& keys) {
  std::vector<uint8_t> payload;
  Writer w(payload);
  write_evaluation_keys(w, keys);
  return sealed_envelope(MessageType::kEvaluationKeys, std::move(payload));
}

EvaluationKeys decode_evaluation_keys(std::span<const uint8_t> bytes, const SchemeParams& params) {
  const Envelope env = expect_envelope(bytes, MessageType::kEvaluationKeys);
  Reader r(open_payload(env.payload));
  EvaluationKeys keys = read_evaluation_keys(r, params);
  r.expect_end();
  return keys;
}

std::vector<uint8_t> encode_secret_keys(const SecretKeyBundle& keys) {
  const SchemeParams& params = keys.params();
  std::vector<uint8_t> payload;
  Writer w(payload);
  w.bytes(params.id());
  const RingElement& s = keys.secret.poly();
  for (size_t i = 0; i < s.size(); ++i) w.u8(static_cast<uint8_t>(static_cast<int8_t>(s.centered(i))));
  write_evaluation_keys(w, keys.eval_keys);
  return sealed_envelope(MessageType::kSecretKeys, std::move(payload));
}

SecretKeyBundle decode_secret_keys(std::span<const uint8_t> bytes, const SchemeParams& params) {
  const Envelope env = expect_envelope(bytes, MessageType::kSecretKeys);
  Reader r(open_payload(env.payload));
  const auto id = r.bytes(32);
  if (!std::equal(id.begin(), id.end(), params.id().begin())) {
    throw WireFormatError(WireErrorCode::kParamsMismatch, "secret key params_id");
  }
  std::vector<int8_t> ternary(params.n());
  for (int8_t& v : ternary) {
    v = static_cast<int8_t>(r.bytes(1)[0]);
    if (v < -1 || v > 1) throw WireFormatError(WireErrorCode::kBadValue, "secret key coefficient");
  }
  EvaluationKeys eval = read_evaluation_keys(r, params);
  r.expect_end();
  try {
    return make_secret_key_bundle(params, ternary, std::move(eval));
  } catch (const std::invalid_argument& e) {
    throw WireFormatError(WireErrorCode::kBadValue, e.what());
  }
}

std::vector<uint8_t> encode_request(const std::string& model_id, std::span<const Ciphertext> inputs,
                                    const SchemeParams& params) {
  if (model_id.size() > 0xFFFF) throw ValidationError("model id too long");
  std::vector<uint8_t> payload;
  Writer w(payload);
  w.le(model_id.size(), 2);
  w.bytes(std::span(reinterpret_cast<const uint8_t*>(model_id.data()), model_id.size()));
  write_batch(w, inputs, params);
  return sealed_envelope(MessageType::kInferenceRequest, std::move(payload));
}

RequestView split_request(std::span<const uint8_t> payload) {
  Reader r(open_payload(payload));
  const size_t len = static_cast<size_t>(r.le(2));
  const auto id = r.bytes(len);
  RequestView v;
  v.model_id.assign(id.begin(), id.end());
  v.ciphertexts = r.bytes(r.remaining());
  return v;
}

std::vector<uint8_t> encode_response(std::span<const Ciphertext> outputs,
                                     const SchemeParams& params) {
  return sealed_envelope(MessageType::kInferenceResponse, serialize_ciphertexts(outputs, params));
}

std::vector<Ciphertext> decode_response_payload(std::span<const uint8_t> payload,
                                                const SchemeParams& params) {
  return deserialize_ciphertexts(open_payload(payload), params);
}

std::vector<uint8_t> encode_error(ProtocolErrorCode code, const std::string& message) {
  std::vector<uint8_t> payload;
  Writer w(payload);
  w.le(static_cast<uint16_t>(code), 2);
  w.le(message.size(), 4);
  w.bytes(std::span(reinterpret_cast<const uint8_t*>(message.data()), message.size()));
  return sealed_envelope(MessageType::kError, std::move(payload));
}

ErrorResponse decode_error_payload(std::span<const uint8_t> payload) {
  Reader r(open_payload(payload));
  ErrorResponse e;
  e.code = static_cast<uint16_t>(r.le(2));
  const size_t len = static_cast<size_t>(r.le(4));
  const auto msg = r.bytes(len);
  e.message.assign(msg.begin(), msg.end());
  r.expect_end();
  return e;
}

std::vector<uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, std::span<const uint8_t> bytes,
                bool private_file) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC,
                        private_file ? 0600 : 0644);
  if (fd < 0) throw IoError("cannot write " + path.string());
  if (private_file) ::fchmod(fd, 0600);
  size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::write(fd, bytes.data() + done, bytes.size() - done);
    if (n <= 0) {
      ::close(fd);
      throw IoError("cannot write " + path.string());
    }
    done += static_cast<size_t>(n);
  }
  if (::close(fd) != 0) throw IoError("cannot write " + path.string());
}

}  // namespace cryptonet
