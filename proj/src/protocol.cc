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

#include "cryptonet/protocol.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <charconv>
#include <cstring>

#include "cryptonet/infer.h"
#include "cryptonet/json_io.h"

namespace cryptonet {

namespace {

constexpr size_t kReadChunk = size_t{1} << 16;

// Reads up to n bytes, stopping early on EOF, error or timeout.
size_t read_upto(int fd, uint8_t* buf, size_t n, int timeout_ms) {
  size_t done = 0;
  while (done < n) {
    pollfd p{fd, POLLIN, 0};
    const int r = ::poll(&p, 1, timeout_ms);
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) break;
    const ssize_t got = ::recv(fd, buf + done, n - done, 0);
    if (got < 0 && errno == EINTR) continue;
    if (got <= 0) break;
    done += static_cast<size_t>(got);
  }
  return done;
}

bool write_all(int fd, std::span<const uint8_t> bytes) {
  size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::send(fd, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    done += static_cast<size_t>(n);
  }
  return true;
}

// Reads one envelope. Returns false with the reason when the stream ends
// early or the header is invalid; an empty reason means a clean EOF before
// any byte arrived.
bool read_envelope(int fd, int timeout_ms, std::vector<uint8_t>& out, std::string& reason) {
  out.assign(kEnvelopeHeaderSize, 0);
  const size_t got = read_upto(fd, out.data(), kEnvelopeHeaderSize, timeout_ms);
  if (got < kEnvelopeHeaderSize) {
    reason = got == 0 ? "" : "truncated envelope header";
    return false;
  }
  EnvelopeHeader h;
  try {
    h = decode_envelope_header(out);
  } catch (const WireFormatError& e) {
    reason = e.what();
    return false;
  }
  // Grow as data arrives so a lying length field cannot force a large
  // allocation up front.
  uint64_t remaining = h.payload_size;
  while (remaining > 0) {
    const size_t chunk = static_cast<size_t>(std::min<uint64_t>(remaining, kReadChunk));
    const size_t old = out.size();
    out.resize(old + chunk);
    const size_t n = read_upto(fd, out.data() + old, chunk, timeout_ms);
    if (n < chunk) {
      reason = "truncated payload";
      return false;
    }
    remaining -= chunk;
  }
  return true;
}

enum class StreamEnd { kEof, kMoreData, kTimeout };

StreamEnd wait_for_eof(int fd, int timeout_ms) {
  uint8_t byte;
  for (;;) {
    pollfd p{fd, POLLIN, 0};
    const int r = ::poll(&p, 1, timeout_ms);
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) return StreamEnd::kTimeout;
    const ssize_t got = ::recv(fd, &byte, 1, 0);
    if (got < 0 && errno == EINTR) continue;
    return got > 0 ? StreamEnd::kMoreData : StreamEnd::kEof;
  }
}

// Sends the error, then reads and discards what the client is still sending
// so that closing does not reset the connection before the error arrives.
void send_and_linger(int fd, std::span<const uint8_t> response) {
  constexpr int kLingerMs = 2000;
  constexpr size_t kMaxDrain = size_t{1} << 28;
  write_all(fd, response);
  ::shutdown(fd, SHUT_WR);
  uint8_t buf[kReadChunk];
  size_t drained = 0;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(kLingerMs);
  while (drained < kMaxDrain) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now()).count();
    if (left <= 0) break;
    const size_t n = read_upto(fd, buf, sizeof(buf), static_cast<int>(left));
    if (n == 0) break;
    drained += n;
  }
}

struct Handled {
  std::vector<uint8_t> response;
  bool malformed = false;
};

Handled malformed(const std::string& why) {
  return {encode_error(ProtocolErrorCode::kMalformed, why), true};
}

Handled handle(const ModelRegistry& registry, std::span<const uint8_t> request) {
  Envelope env;
  RequestView view;
  try {
    env = decode_envelope(request);
    if (env.type != MessageType::kInferenceRequest) return malformed("expected an inference request");
    view = split_request(env.payload);
  } catch (const WireFormatError& e) {
    return malformed(e.what());
  }
  const ModelEntry* model = registry.find(view.model_id);
  if (model == nullptr) {
    return {encode_error(ProtocolErrorCode::kUnknownModel, "unknown model: " + view.model_id)};
  }
  const CompiledCircuit& c = model->circuit;
  std::vector<Ciphertext> inputs;
  try {
    // Inputs must be fresh encryptions.
    inputs = deserialize_ciphertexts(view.ciphertexts, c.params, 0);
  } catch (const WireFormatError& e) {
    if (e.code() == WireErrorCode::kParamsMismatch) {
      return {encode_error(ProtocolErrorCode::kParamsMismatch, e.what())};
    }
    return malformed(e.what());
  }
  if (inputs.size() != c.num_inputs()) {
    return malformed("expected " + std::to_string(c.num_inputs()) + " ciphertexts, got " +
                     std::to_string(inputs.size()));
  }
  for (const Ciphertext& ct : inputs) {
    if (ct.size() != 2) return malformed("input ciphertexts must have two components");
  }
  try {
    const std::vector<Ciphertext> out = encrypted_forward(c, inputs, model->eval_keys);
    return {encode_response(out, c.params)};
  } catch (const std::exception& e) {
    return malformed(e.what());
  }
}

std::string errno_message(const std::string& what) { return what + ": " + std::strerror(errno); }

}  // namespace

void ModelRegistry::add(const std::string& model_id, CompiledCircuit circuit,
                        EvaluationKeys eval_keys) {
  if (eval_keys.params() != circuit.params) throw ParamsMismatch("evaluation keys for " + model_id);
  if (models_.count(model_id) != 0) throw ValidationError("duplicate model id " + model_id);
  models_.emplace(model_id, ModelEntry{std::move(circuit), std::move(eval_keys)});
}

const ModelEntry* ModelRegistry::find(std::string_view model_id) const {
  const auto it = models_.find(model_id);
  return it == models_.end() ? nullptr : &it->second;
}

ModelRegistry ModelRegistry::load(const std::filesystem::path& path) {
  const nlohmann::json j = read_json_file(path);
  const std::filesystem::path base = path.parent_path();
  auto resolve = [&](const nlohmann::json& entry, const char* key) {
    if (!entry.contains(key)) throw ValidationError(std::string("registry entry lacks ") + key);
    std::filesystem::path p = entry.at(key).get<std::string>();
    return p.is_absolute() ? p : base / p;
  };
  if (!j.contains("models") || !j.at("models").is_object()) {
    throw ValidationError("registry needs a \"models\" object");
  }
  ModelRegistry reg;
  for (const auto& [id, entry] : j.at("models").items()) {
    CompiledCircuit circuit = circuit_from_json(read_json_file(resolve(entry, "circuit")));
    const SchemeParams params = params_from_json(read_json_file(resolve(entry, "params")));
    if (params != circuit.params) throw ParamsMismatch("params file does not match circuit for " + id);
    EvaluationKeys keys = decode_evaluation_keys(read_file(resolve(entry, "eval_keys")), params);
    reg.add(id, std::move(circuit), std::move(keys));
  }
  return reg;
}

std::vector<uint8_t> handle_request(const ModelRegistry& registry,
                                    std::span<const uint8_t> request) {
  return handle(registry, request).response;
}

Server::Server(std::shared_ptr<const ModelRegistry> registry, ServerOptions options)
    : registry_(std::move(registry)), options_(std::move(options)) {}

Server::~Server() { stop(); }

void Server::start() {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(options_.port);
  if (::getaddrinfo(options_.host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr) {
    throw std::runtime_error("cannot resolve " + options_.host);
  }
  const int fd = ::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC, res->ai_protocol);
  if (fd < 0) {
    ::freeaddrinfo(res);
    throw std::runtime_error(errno_message("socket"));
  }
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd, 64) != 0) {
    const std::string msg = errno_message("bind " + options_.host + ":" + port);
    ::freeaddrinfo(res);
    ::close(fd);
    throw std::runtime_error(msg);
  }
  ::freeaddrinfo(res);
  sockaddr_storage addr{};
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = addr.ss_family == AF_INET6
              ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
              : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  listen_fd_ = fd;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void Server::accept_loop() {
  while (!stopping_) {
    pollfd p{listen_fd_, POLLIN, 0};
    if (::poll(&p, 1, 100) <= 0) continue;
    const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) continue;
    {
      std::lock_guard<std::mutex> lock(mu_);
      ++active_;
    }
    std::thread([this, fd] {
      serve_connection(fd);
      ::close(fd);
      std::lock_guard<std::mutex> lock(mu_);
      --active_;
      cv_.notify_all();
    }).detach();
  }
}

void Server::serve_connection(int fd) {
  std::vector<uint8_t> request;
  std::string reason;
  do {
    if (!read_envelope(fd, options_.read_timeout_ms, request, reason)) {
      if (!reason.empty()) reject(fd, reason);
      return;
    }
    if (!options_.keep_alive) {
      // One request per connection: the client half-closes right after it.
      switch (wait_for_eof(fd, options_.read_timeout_ms)) {
        case StreamEnd::kEof: break;
        case StreamEnd::kMoreData: return reject(fd, "trailing bytes after the request");
        case StreamEnd::kTimeout: return reject(fd, "request not terminated");
      }
    }
    const Handled h = handle(*registry_, request);
    if (h.malformed) return reject(fd, h.response);
    if (!write_all(fd, h.response)) return;
  } while (options_.keep_alive);
}

void Server::reject(int fd, const std::string& reason) {
  send_and_linger(fd, encode_error(ProtocolErrorCode::kMalformed, reason));
}

void Server::reject(int fd, std::span<const uint8_t> error_response) {
  send_and_linger(fd, error_response);
}

void Server::stop() {
  if (listen_fd_ < 0) return;
  stopping_ = true;
  if (acceptor_.joinable()) acceptor_.join();
  ::close(listen_fd_);
  listen_fd_ = -1;
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait(lock, [this] { return active_ == 0; });
  stopped_ = true;
  cv_.notify_all();
}

void Server::wait() {
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait(lock, [this] { return stopped_; });
}

ProtocolError::ProtocolError(uint16_t code, const std::string& message)
    : Error(code == 0 ? message : "server error " + std::to_string(code) + ": " + message),
      code_(code) {}

Endpoint parse_endpoint(std::string_view s) {
  const size_t colon = s.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw ValidationError("expected host:port, got " + std::string(s));
  }
  Endpoint e;
  e.host = std::string(s.substr(0, colon));
  if (e.host.size() > 2 && e.host.front() == '[' && e.host.back() == ']') {
    e.host = e.host.substr(1, e.host.size() - 2);
  }
  const std::string_view port = s.substr(colon + 1);
  unsigned value = 0;
  const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc() || ptr != port.data() + port.size() || value > 65535) {
    throw ValidationError("bad port in " + std::string(s));
  }
  e.port = static_cast<uint16_t>(value);
  return e;
}

std::vector<uint8_t> round_trip(const Endpoint& server, std::span<const uint8_t> request,
                              int timeout_ms) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(server.port);
  if (::getaddrinfo(server.host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr) {
    throw ProtocolError(0, "cannot resolve " + server.host);
  }
  int fd = -1;
  for (addrinfo* a = res; a != nullptr && fd < 0; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype | SOCK_CLOEXEC, a->ai_protocol);
    if (fd >= 0 && ::connect(fd, a->ai_addr, a->ai_addrlen) != 0) {
      ::close(fd);
      fd = -1;
    }
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw ProtocolError(0, errno_message("connect " + server.host + ":" + port));
  // The server may answer and close before reading everything (for example
  // after an oversize header); a failed write is not fatal on its own.
  write_all(fd, request);
  ::shutdown(fd, SHUT_WR);
  std::vector<uint8_t> response;
  std::string reason;
  const bool ok = read_envelope(fd, timeout_ms, response, reason);
  ::close(fd);
  if (!ok) {
    if (reason.empty()) return {};
    throw ProtocolError(0, "bad response: " + reason);
  }
  return response;
}

std::vector<Ciphertext> request_inference(const Endpoint& server, const std::string& model_id,
                                          std::span<const Ciphertext> inputs,
                                          const SchemeParams& params) {
  const std::vector<uint8_t> response = round_trip(server, encode_request(model_id, inputs, params));
  if (response.empty()) throw ProtocolError(0, "server closed the connection without answering");
  try {
    const Envelope env = decode_envelope(response);
    if (env.type == MessageType::kError) {
      const ErrorResponse e = decode_error_payload(env.payload);
      throw ProtocolError(e.code, e.message);
    }
    if (env.type != MessageType::kInferenceResponse) {
      throw ProtocolError(0, "unexpected response type");
    }
    return decode_response_payload(env.payload, params);
  } catch (const WireFormatError& e) {
    throw ProtocolError(0, std::string("bad response: ") + e.what());
  }
}

}  // namespace cryptonet
