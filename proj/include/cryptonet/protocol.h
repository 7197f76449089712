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

// Inference service over TCP. The server holds compiled circuits and public
// evaluation keys only; there is no path from its inputs to a secret key.
//
// A connection carries one request and one response unless keep-alive is
// enabled; in that default mode the client half-closes after its request and
// any byte after the envelope makes the request malformed. Malformed input
// gets an error response (code 3) and the connection is closed.

#ifndef CRYPTONET_PROTOCOL_H_
#define CRYPTONET_PROTOCOL_H_

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "cryptonet/polynet.h"
#include "cryptonet/she.h"
#include "cryptonet/wire.h"

namespace cryptonet {

struct ModelEntry {
  CompiledCircuit circuit;
  EvaluationKeys eval_keys;
};

// Immutable once the server starts; shared read-only by every connection.
class ModelRegistry {
 public:
  // Throws ParamsMismatch if the keys were made for other parameters.
  void add(const std::string& model_id, CompiledCircuit circuit, EvaluationKeys eval_keys);
  const ModelEntry* find(std::string_view model_id) const;
  size_t size() const { return models_.size(); }

  // {"models": {"<id>": {"circuit": path, "params": path, "eval_keys": path}}}
  // Relative paths resolve against the registry file's directory. The params
  // file must describe the same parameters as the circuit.
  static ModelRegistry load(const std::filesystem::path& path);

 private:
  std::map<std::string, ModelEntry, std::less<>> models_;
};

// Full request envelope in, full response envelope out. Never throws for bad
// input; every failure becomes an error response.
std::vector<uint8_t> handle_request(const ModelRegistry& registry,
                                    std::span<const uint8_t> request);

struct ServerOptions {
  std::string host = "127.0.0.1";
  uint16_t port = 0;  // 0 picks a free port
  bool keep_alive = false;
  int read_timeout_ms = 30000;
};

class Server {
 public:
  Server(std::shared_ptr<const ModelRegistry> registry, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and starts accepting in a background thread.
  void start();
  uint16_t port() const { return port_; }
  // Stops accepting and waits for open connections to finish.
  void stop();
  // Blocks until stop() is called from elsewhere.
  void wait();

 private:
  void accept_loop();
  void serve_connection(int fd);
  void reject(int fd, const std::string& reason);
  void reject(int fd, std::span<const uint8_t> error_response);

  std::shared_ptr<const ModelRegistry> registry_;
  ServerOptions options_;
  int listen_fd_ = -1;
  uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex mu_;
  std::condition_variable cv_;
  int active_ = 0;
  bool stopped_ = false;
};

// An error response from the server, or a transport failure (code 0).
class ProtocolError : public Error {
 public:
  ProtocolError(uint16_t code, const std::string& message);
  uint16_t code() const { return code_; }

 private:
  uint16_t code_;
};

struct Endpoint {
  std::string host;
  uint16_t port = 0;
};

// "host:port"; throws ValidationError.
Endpoint parse_endpoint(std::string_view s);

// Sends raw bytes, half-closes, and returns the raw response envelope. An
// empty result means the server closed without answering.
std::vector<uint8_t> round_trip(const Endpoint& server, std::span<const uint8_t> request,
                              int timeout_ms = 60000);

std::vector<Ciphertext> request_inference(const Endpoint& server, const std::string& model_id,
                                          std::span<const Ciphertext> inputs,
                                          const SchemeParams& params);

}  // namespace cryptonet

#endif  // CRYPTONET_PROTOCOL_H_
