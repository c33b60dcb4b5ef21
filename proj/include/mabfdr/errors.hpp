#pragma once

#include <stdexcept>
#include <string>

namespace mabfdr {

/// Invalid user-supplied configuration (CLI exit status 2).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or out-of-range input data (CLI exit status 3).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mabfdr
