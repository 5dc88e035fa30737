#pragma once

#include <stdexcept>
#include <string>

namespace adanav {

// Invalid user-facing input: bad grid layout, unknown builtin name, malformed
// config, schedule parameters out of range. Maps to exit code 1 in the CLI.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runtime numerical failure: eigensolver non-convergence, non-finite learner
// parameters. Maps to exit code 2 in the CLI.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace adanav
