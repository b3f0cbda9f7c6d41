#pragma once

#include <stdexcept>
#include <string>

namespace cprrtc {

/// Malformed input document. `where()` is a human-readable location
/// ("line 3, column 7" or a field path such as "joints[2].limits").
class parse_error : public std::runtime_error {
public:
    parse_error(std::string where, const std::string& what)
        : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

/// Well-formed input that violates a domain invariant.
class validation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Vector / matrix sizes that do not agree.
class dimension_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Linear system that cannot be solved without damping.
class singular_system_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cprrtc
