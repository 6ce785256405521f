#pragma once

#include <stdexcept>
#include <string>

namespace mei {

/// Structural input problem: unreadable file, bad header, invalid geometry.
class IngestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameter or run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Destination could not be written.
class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mei
