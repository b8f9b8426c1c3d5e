#pragma once

#include <stdexcept>
#include <string>

namespace totsched {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid dimensions, bounds or configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// API misuse, such as reusing a consumed tape or stepping a finished episode.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Operation requested before its dependencies were committed.
class SequencingError : public Error {
 public:
  using Error::Error;
};

/// A positive payload has to cross a link whose rate is zero.
class UnreachableLinkError : public Error {
 public:
  using Error::Error;
};

class ActionError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class FitDomainError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values detected while training. Carries the offending layer
/// (or -1 when not tied to a layer).
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, int layer = -1) : Error(what), layer_(layer) {}
  int layer() const noexcept { return layer_; }

 private:
  int layer_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace totsched
