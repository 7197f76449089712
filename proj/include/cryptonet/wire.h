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

// Binary formats: ciphertexts, key files and the request/response messages.
//
// Every message travels in an envelope:
//   "CNET" | version 0x01 | type (1 byte) | payload length (u64 LE) | payload
// Payloads end with a SHA-256 digest of the bytes before it, so accidental
// corruption anywhere in a message is rejected instead of decoding to a
// different ciphertext. The digest is not authentication.
//
// A ciphertext is params_id (32 bytes) | level (u16 LE) | component count
// (u16 LE) | coefficients, component-major, u64 LE when q < 2^64 and u128 LE
// otherwise.

#ifndef CRYPTONET_WIRE_H_
#define CRYPTONET_WIRE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cryptonet/errors.h"
#include "cryptonet/she.h"

namespace cryptonet {

enum class WireErrorCode {
  kTruncated = 1,
  kTrailingBytes,
  kParamsMismatch,
  kBadMagic,
  kBadVersion,
  kUnknownType,
  kUnexpectedType,
  kTooLarge,
  kBadValue,
  kLevelMismatch,
  kChecksum,
};

std::string_view to_string(WireErrorCode code);

class WireFormatError : public Error {
 public:
  WireFormatError(WireErrorCode code, const std::string& detail);
  WireErrorCode code() const { return code_; }

 private:
  WireErrorCode code_;
};

enum class MessageType : uint8_t {
  kInferenceRequest = 0x10,
  kInferenceResponse = 0x11,
  kSecretKeys = 0x20,
  kEvaluationKeys = 0x21,
  kCiphertexts = 0x22,
  kError = 0x7F,
};

inline constexpr uint8_t kWireVersion = 0x01;
inline constexpr size_t kEnvelopeHeaderSize = 14;
inline constexpr uint64_t kMaxPayloadSize = uint64_t{1} << 30;
inline constexpr size_t kDigestSize = 32;

struct EnvelopeHeader {
  MessageType type;
  uint64_t payload_size;
};

std::vector<uint8_t> encode_envelope(MessageType type, std::span<const uint8_t> payload);
EnvelopeHeader decode_envelope_header(std::span<const uint8_t> header);

struct Envelope {
  MessageType type;
  std::vector<uint8_t> payload;
};

// The whole buffer must be exactly one envelope.
Envelope decode_envelope(std::span<const uint8_t> bytes);

// Appends / checks and strips the trailing digest.
void seal_payload(std::vector<uint8_t>& payload);
std::span<const uint8_t> open_payload(std::span<const uint8_t> payload);

size_t coefficient_width(const SchemeParams& params);
size_t ciphertext_size(const SchemeParams& params, size_t components);

std::vector<uint8_t> serialize_ciphertext(const Ciphertext& ct, const SchemeParams& params);
// Rejects truncation, trailing bytes, foreign params_id, out-of-range
// coefficients, levels above the parameters' depth, and (when given) any
// level other than expected_level.
Ciphertext deserialize_ciphertext(std::span<const uint8_t> bytes, const SchemeParams& params,
                                  std::optional<int> expected_level = std::nullopt);

// u32 count followed by the ciphertexts.
std::vector<uint8_t> serialize_ciphertexts(std::span<const Ciphertext> cts,
                                           const SchemeParams& params);
std::vector<Ciphertext> deserialize_ciphertexts(std::span<const uint8_t> bytes,
                                                const SchemeParams& params,
                                                std::optional<int> expected_level = std::nullopt);

// Enveloped, sealed files.
std::vector<uint8_t> encode_ciphertext_file(std::span<const Ciphertext> cts,
                                            const SchemeParams& params);
std::vector<Ciphertext> decode_ciphertext_file(std::span<const uint8_t> bytes,
                                               const SchemeParams& params);
std::vector<uint8_t> encode_evaluation_keys(const EvaluationKeys& keys);
EvaluationKeys decode_evaluation_keys(std::span<const uint8_t> bytes, const SchemeParams& params);
std::vector<uint8_t> encode_secret_keys(const SecretKeyBundle& keys);
SecretKeyBundle decode_secret_keys(std::span<const uint8_t> bytes, const SchemeParams& params);

struct InferenceRequest {
  std::string model_id;
  std::vector<Ciphertext> inputs;
};

// Payload: u16 id length | id bytes | ciphertext batch | digest.
std::vector<uint8_t> encode_request(const std::string& model_id, std::span<const Ciphertext> inputs,
                                    const SchemeParams& params);

// First stage of request decoding: the digest is checked and the model id
// split off, so the caller can pick parameters before parsing ciphertexts.
struct RequestView {
  std::string model_id;
  std::span<const uint8_t> ciphertexts;
};
RequestView split_request(std::span<const uint8_t> payload);

std::vector<uint8_t> encode_response(std::span<const Ciphertext> outputs,
                                     const SchemeParams& params);
std::vector<Ciphertext> decode_response_payload(std::span<const uint8_t> payload,
                                                const SchemeParams& params);

// Protocol error codes carried by ErrorResponse.
enum class ProtocolErrorCode : uint16_t {
  kUnknownModel = 1,
  kParamsMismatch = 2,
  kMalformed = 3,
};

struct ErrorResponse {
  uint16_t code = 0;
  std::string message;
};

std::vector<uint8_t> encode_error(ProtocolErrorCode code, const std::string& message);
ErrorResponse decode_error_payload(std::span<const uint8_t> payload);

std::vector<uint8_t> read_file(const std::filesystem::path& path);
// private_file restricts permissions to the owner (0600).
void write_file(const std::filesystem::path& path, std::span<const uint8_t> bytes,
                bool private_file = false);

}  // namespace cryptonet

#endif  // CRYPTONET_WIRE_H_
