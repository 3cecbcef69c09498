#pragma once

#include <stdexcept>
#include <string>

namespace dronecell {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingKey : public Error {
 public:
  explicit MissingKey(std::string key)
      : Error("missing config key '" + key + "'"), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class InvalidValue : public Error {
 public:
  InvalidValue(std::string name, std::string reason)
      : Error("invalid value for '" + name + "': " + reason),
        name_(std::move(name)),
        reason_(std::move(reason)) {}
  const std::string& name() const noexcept { return name_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string name_;
  std::string reason_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

// Raised when an alternating series or a probability overshoots what the
// working precision can represent.
class PrecisionLoss : public Error {
 public:
  using Error::Error;
};

}  // namespace dronecell
