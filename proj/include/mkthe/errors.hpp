/*
 * Copyright 2026 The mkthe Authors
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
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

namespace mkthe {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or arguments (bad plaintext range, bad flags, ...).
struct ArgumentError : Error {
  using Error::Error;
};

/// Two operands that must live at the same level / modulus do not.
struct LevelMismatchError : Error {
  using Error::Error;
};

/// Operands encrypted under different key sets were combined.
struct KeysetMismatchError : Error {
  using Error::Error;
};

/// The tracked noise bound reached the decryption threshold q/2; the result
/// would be garbage, so the operation refuses to produce one.
struct NoiseOverflowError : Error {
  using Error::Error;
};

/// A serialized object failed to parse, checksum-verify, or version-check.
struct FileFormatError : Error {
  using Error::Error;
};

/// A protocol operation was invoked out of phase order or with missing
/// contributions (e.g. an absent partial decryption).
struct ProtocolError : Error {
  using Error::Error;
};

}  // namespace mkthe
