#pragma once

#include <stdexcept>
#include <string>

namespace lwct {

// Invalid or inconsistent data: bad dimensions, non-finite pixels, corrupt files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A required configuration key is missing or malformed.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Network failures. Transient errors (timeouts, dropped connections) may be
// retried; protocol errors are the peer rejecting what we sent.
class TransportError : public std::runtime_error {
 public:
  enum class Kind { Transient, Protocol };

  TransportError(Kind kind, const std::string& what, unsigned code = 0)
      : std::runtime_error(what), kind_(kind), code_(code) {}
  Kind kind() const noexcept { return kind_; }
  bool transient() const noexcept { return kind_ == Kind::Transient; }
  // Server-side error code for protocol errors, 0 otherwise.
  unsigned code() const noexcept { return code_; }

 private:
  Kind kind_;
  unsigned code_;
};

}  // namespace lwct
