#pragma once

#include <stdexcept>
#include <string>

namespace aes {

/// Error categories double as process exit codes for the CLI.
enum class ErrorKind : int {
    usage = 2,
    validation = 3,
    io = 4,
    numeric = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

/// Raised when the kappa denominator vanishes (both rating sequences constant at the same level).
class DegenerateQwkError : public NumericError {
public:
    explicit DegenerateQwkError(const std::string& what) : NumericError(what) {}
};

const char* kind_name(ErrorKind kind) noexcept;

}  // namespace aes
