// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace ris {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or scene invariant. `key` names the offending
/// config field (e.g. "focus.radius") when one can be identified; `line`
/// is the 1-based line in the config file, or 0 if not known.
class ConfigError : public Error {
  public:
    ConfigError(std::string key, const std::string &message, int line = 0)
        : Error(message), key_(std::move(key)), line_(line) {}

    const std::string &key() const noexcept { return key_; }
    int line() const noexcept { return line_; }

  private:
    std::string key_;
    int line_;
};

class NumericalError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

}  // namespace ris
