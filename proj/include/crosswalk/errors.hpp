#pragma once

#include <stdexcept>
#include <string>

namespace crosswalk {

// Bad or inconsistent configuration; maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Missing or degenerate input data; maps to CLI exit code 3.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace crosswalk
