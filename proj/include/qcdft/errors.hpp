// Copyright 2026 The qcdft Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file
 * Exception hierarchy shared by every qcdft module.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace qcdft {

/// Base class of all errors raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InvalidParameterError : public Error {
  public:
    using Error::Error;
};

/// Matrix has an eigenvalue below the PSD tolerance.
class NotPsdError : public Error {
  public:
    using Error::Error;
};

class IndexOutOfRangeError : public Error {
  public:
    using Error::Error;
};

/// Register exceeds the exact simulator's configured width.
class CapacityError : public Error {
  public:
    using Error::Error;
};

class UnsupportedGateError : public Error {
  public:
    using Error::Error;
};

class InvalidGateError : public Error {
  public:
    using Error::Error;
};

class WidthMismatchError : public Error {
  public:
    using Error::Error;
};

class ShapeMismatchError : public Error {
  public:
    using Error::Error;
};

class SchemaError : public Error {
  public:
    using Error::Error;
};

class VersionError : public Error {
  public:
    using Error::Error;
};

class DimensionError : public Error {
  public:
    using Error::Error;
};

class TrainingDivergedError : public Error {
  public:
    using Error::Error;
};

class AmbiguousDecodeError : public Error {
  public:
    using Error::Error;
};

class NotApplicableError : public Error {
  public:
    using Error::Error;
};

class UndefinedOrderError : public Error {
  public:
    using Error::Error;
};

class ParseError : public Error {
  public:
    using Error::Error;
};

} // namespace qcdft
