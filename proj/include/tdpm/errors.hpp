// Copyright 2026 The TDPM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace tdpm {

/// Violated precondition: bad index, out-of-range argument, inconsistent inputs.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Incompatible tensor shapes. The message names the primitive and both shapes.
class ShapeError : public ContractError {
 public:
  using ContractError::ContractError;
};

/// A computation produced NaN or infinity.
class NumericError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Bad configuration key or value.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File could not be read/written or has a malformed layout.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checkpoint written by an incompatible format version (or not a checkpoint).
class VersionError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace tdpm
