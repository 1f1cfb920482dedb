#pragma once

#include <stdexcept>

namespace hdb {

/// Bad parameters or malformed configuration. Maps to exit code 1 in the CLI.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Missing or malformed input data, or unmet metric preconditions. Maps to
/// exit code 2 in the CLI.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hdb
