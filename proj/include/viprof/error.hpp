// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace viprof {

/// Malformed, inconsistent or unreadable input data. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad arguments to an operation (k < 2, n odd, unknown enum token, ...).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An optional capability (neural inference) was not compiled in.
class CapabilityUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace viprof
