/*
 * Copyright 2026 The tilecodec Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace tilecodec {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Tensor shape mismatch; the message names the offending dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or usage of an API (bad mode, out-of-range k, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File or stream level failure. `kind()` distinguishes the failure classes
/// that callers are expected to handle separately.
class FormatError : public Error {
 public:
  enum class Kind {
    BadMagic,
    BadVersion,
    Truncated,
    TrailingData,
    LengthMismatch,
    DigestMismatch,
    ModelMismatch,
    Unsupported,
    Corrupt,
  };

  FormatError(Kind kind, const std::string& msg) : Error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Filesystem I/O failure; message carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tilecodec
