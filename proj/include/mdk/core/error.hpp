#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mdk {

/// Base for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input data: inconsistent arrays, malformed files, missing table entries.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (unknown keys, type errors, unsupported options).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Geometry the algorithms cannot handle (cutoff too large for the box, unreduced cell).
class GeometryError : public InputError {
 public:
  using InputError::InputError;
};

/// Non-finite or singular numerics (diverged training, non-finite forces, zero-length pair).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// More neighbor pairs than the fixed capacity; carries the size the caller needs.
class OverflowError : public Error {
 public:
  OverflowError(std::size_t required, std::size_t capacity)
      : Error("neighbor list overflow: found " + std::to_string(required) +
              " pairs, capacity " + std::to_string(capacity)),
        required_(required),
        capacity_(capacity) {}

  std::size_t required() const noexcept { return required_; }
  std::size_t capacity() const noexcept { return capacity_; }

 private:
  std::size_t required_;
  std::size_t capacity_;
};

}  // namespace mdk
