#pragma once

#include <stdexcept>
#include <string>

namespace ssf {

/// Thrown for every contract violation: malformed inputs, unreadable or
/// inconsistent files, geometry that cannot be rectified.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition)
        throw Error(message);
}

} // namespace detail
} // namespace ssf
