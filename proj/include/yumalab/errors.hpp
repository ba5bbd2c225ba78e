#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace yumalab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value or dataset violates a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Input text could not be parsed. `line()` is 1-based; 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Some (wallet, netuid) pairs appear under both roles.
class RoleConflictError : public ValidationError {
public:
    using Pair = std::pair<std::string, std::uint32_t>;

    explicit RoleConflictError(std::vector<Pair> pairs)
        : ValidationError(describe(pairs)), pairs_(std::move(pairs)) {}

    const std::vector<Pair>& pairs() const noexcept { return pairs_; }

private:
    static std::string describe(const std::vector<Pair>& pairs) {
        std::string msg = "role conflict for (wallet, netuid):";
        for (const auto& [wallet, netuid] : pairs)
            msg += " (" + wallet + ", " + std::to_string(netuid) + ")";
        return msg;
    }

    std::vector<Pair> pairs_;
};

} // namespace yumalab
