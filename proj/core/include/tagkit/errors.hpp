#pragma once

#include <stdexcept>
#include <string>

namespace tagkit {

// Problems with input data or resource files (bad format, missing file,
// truncated stream). The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration values (out-of-range knobs, unknown keys).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tagkit
