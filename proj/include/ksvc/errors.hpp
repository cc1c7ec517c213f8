#pragma once

#include <stdexcept>
#include <string>

namespace ksvc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument violates an operation's precondition (bad index, mismatched k, empty set).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The requested constraint or flow has no feasible solution.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// An exhaustive search was asked to go beyond its configured limits.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file or schema violation. The message carries the field path or byte offset.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace ksvc
