#pragma once

#include <stdexcept>
#include <string>

namespace optomag {

/// Invalid user-supplied configuration (bad value, unknown key, broken invariant).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// API misuse: a precondition of an operation was violated by the caller.
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A background ROI integrated to zero or less, i.e. the site is dead.
class DegenerateBackgroundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace optomag
