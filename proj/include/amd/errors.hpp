// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace amd {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible tensor shapes or an invalid axis.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation, or a non-finite
/// intermediate value.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Misuse of the differentiation graph (e.g. a second backward pass).
class GraphError : public Error {
 public:
  using Error::Error;
};

/// A CTC target that no alignment of the given length can produce.
class InfeasibleTargetError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or experiment specification.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File system or decoding failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// A runtime contract was violated (frozen parameter changed, labels read...).
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace amd
