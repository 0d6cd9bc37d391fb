#pragma once

#include <stdexcept>
#include <string>

namespace cghc {

// I/O failure: missing file, short read/write.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally invalid container or stream (bad magic, inconsistent lengths,
// truncated payload).
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Well-formed input that uses a feature outside the supported subset
// (progressive JPEG, multi-component scans, restart markers).
class UnsupportedError : public std::runtime_error {
public:
    explicit UnsupportedError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace cghc
