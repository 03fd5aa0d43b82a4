#pragma once

#include <stdexcept>
#include <string>

namespace permfit {

/// Input outside an operation's domain (bad sizes, non-bijective maps,
/// violated matrix margins, nonpositive kernels).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Permutation sizes that must agree do not.
class SizeMismatch : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Malformed or unreadable input file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested combination of model and algorithm is not supported.
class UnsupportedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace permfit
