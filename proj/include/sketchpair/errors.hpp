/*
 * Copyright 2026 The sketchpair Authors
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

namespace sketchpair {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible tensor shapes, or a network applied to input it cannot take.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Malformed layer-notation string.
class ParseError : public Error {
 public:
  ParseError(const std::string& segment, std::size_t position, const std::string& reason)
      : Error("segment " + std::to_string(position) + " (\"" + segment + "\"): " + reason),
        segment_(segment),
        position_(position) {}

  const std::string& segment() const { return segment_; }
  /// 1-based index of the offending segment.
  std::size_t position() const { return position_; }

 private:
  std::string segment_;
  std::size_t position_;
};

/// Spec/role combinations that cannot be instantiated.
class BuildError : public Error {
 public:
  using Error::Error;
};

/// A loss term became NaN or infinite during training.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& term)
      : Error("non-finite value in loss term '" + term + "'"), term_(term) {}
  const std::string& term() const { return term_; }

 private:
  std::string term_;
};

/// Missing, unreadable or undecodable input data.
class DataError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public DataError {
 public:
  enum class Kind { Io, BadMagic, VersionMismatch, Truncated, ArchitectureMismatch, MissingNetwork };

  CheckpointError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Invalid user-supplied settings: unknown config keys, bad values, labels out of range.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace sketchpair
