#pragma once

#include <stdexcept>
#include <string>

namespace nsflow {

// Exit-code contract used by the CLI: 0 ok, 1 runtime, 2 bad input/args,
// 3 dataset format error.

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotFoundError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyScopeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace nsflow
