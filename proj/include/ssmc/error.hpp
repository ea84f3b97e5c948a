#pragma once

#include <stdexcept>
#include <string>

namespace ssmc {

/// Non-finite or out-of-domain argument to a numerical routine.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parameter set that violates a documented invariant.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Controller invoked off its decision grid.
class SchedulingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace ssmc
