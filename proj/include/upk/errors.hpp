#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace upk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t offset, const std::string& expected, const std::string& found)
        : Error("syntax error at byte " + std::to_string(offset) + ": expected " + expected +
                ", found " + found),
          offset_(offset), expected_(expected) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::string expected_;
};

class UnboundVariable : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class NonPositiveGamma : public Error {
public:
    using Error::Error;
};

class LambdaTooSmall : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

class ZeroInitialData : public Error {
public:
    using Error::Error;
};

class DegenerateGrid : public Error {
public:
    using Error::Error;
};

class NaNDetected : public Error {
public:
    using Error::Error;
};

class CflViolation : public Error {
public:
    using Error::Error;
};

class TooFewRuns : public Error {
public:
    using Error::Error;
};

class MissingTauTraces : public Error {
public:
    using Error::Error;
};

class GammaOutOfRange : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& what)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// A named problem invariant does not hold; the message names the invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace upk
