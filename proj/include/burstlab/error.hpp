#pragma once

#include <stdexcept>
#include <string>

namespace burstlab {

// Problems with user-supplied data (files, corpora, records). CLI exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid parameters or misuse of an operation. CLI exit code 1.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace burstlab
