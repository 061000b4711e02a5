#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace streamdec {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed text input. line() is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(const std::string &what, std::size_t line)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), message_(what), line_(line) {}

    std::size_t line() const noexcept { return line_; }
    // The description without the line prefix.
    const std::string &message() const noexcept { return message_; }

private:
    std::string message_;
    std::size_t line_;
};

} // namespace streamdec
