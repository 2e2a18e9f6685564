// Copyright 2026 The xaxa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace xaxa {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller violated a precondition (bad argument, dimension mismatch, bad flag).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Input data could not be read or parsed.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Model file is corrupt, has the wrong schema, or violates a structural invariant.
class ModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace xaxa
