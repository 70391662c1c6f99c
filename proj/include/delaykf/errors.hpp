#pragma once

#include <stdexcept>

namespace delaykf {

/// Invalid configuration value or malformed config file.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// API misuse (wrong call order, shape mismatch, exhausted episode).
struct UsageError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Numerical failure inside the estimator (singular innovation covariance etc.).
struct FilterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File read/write failure.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace delaykf
