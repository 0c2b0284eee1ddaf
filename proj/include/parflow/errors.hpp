// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace parflow {

/// Operand shapes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// A diagonal block of a block-triangular system has no usable inverse.
class SingularBlockError : public std::runtime_error {
 public:
  explicit SingularBlockError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed serialized tensor.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace parflow
