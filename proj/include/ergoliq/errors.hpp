#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace ergoliq {

/// A model constant violates its domain (k <= 0, r outside [0,1], ...).
class InvalidParameter : public std::invalid_argument {
public:
    InvalidParameter(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A closed form or estimator was called outside the region where it is defined.
class PreconditionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed or insufficient input data. `line` is 1-based, 0 when not tied to a line.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Bad command line or config file.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ergoliq
