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

#ifndef CRYPTONET_ERRORS_H_
#define CRYPTONET_ERRORS_H_

#include <stdexcept>
#include <string>

namespace cryptonet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operands or key material were produced under different scheme parameters.
class ParamsMismatch : public Error {
 public:
  ParamsMismatch() : Error("params mismatch") {}
  explicit ParamsMismatch(const std::string& what) : Error("params mismatch: " + what) {}
};

class DepthExhausted : public Error {
 public:
  DepthExhausted() : Error("depth exhausted") {}
  explicit DepthExhausted(const std::string& what) : Error("depth exhausted: " + what) {}
};

class PlaintextOverflow : public Error {
 public:
  PlaintextOverflow() : Error("plaintext overflow") {}
  explicit PlaintextOverflow(const std::string& what)
      : Error("plaintext overflow: " + what) {}
};

class ScaleMismatch : public Error {
 public:
  ScaleMismatch() : Error("scale mismatch") {}
};

// A network or circuit failed a compile-time check; the message names it.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cryptonet

#endif  // CRYPTONET_ERRORS_H_
