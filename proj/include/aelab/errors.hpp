#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aelab {

/// Malformed input file. Carries the 1-based line number where parsing stopped.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A computation produced NaN/Inf (non-finite gradient, diverging loss).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Training loss became non-finite. epoch() is the 0-based epoch index.
class DivergenceError : public NumericError {
public:
    DivergenceError(std::size_t epoch, const std::string& what)
        : NumericError("diverged at epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}

    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

}  // namespace aelab
