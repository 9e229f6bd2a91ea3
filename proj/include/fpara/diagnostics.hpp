#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace fpara {

/// Thrown when inputs violate an operation's preconditions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical procedure cannot deliver a trustworthy result.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using WarningHandler = std::function<void(const std::string&)>;

/// Routes a non-fatal diagnostic to the installed handler (stderr by default).
void warn(const std::string& message);

/// Installs a handler and returns the previous one.
WarningHandler set_warning_handler(WarningHandler handler);

}  // namespace fpara
