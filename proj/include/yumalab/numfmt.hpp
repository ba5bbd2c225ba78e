#pragma once

#include <charconv>
#include <cstdio>
#include <optional>
#include <string>

namespace yumalab {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_roundtrip(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

/// Report formatting: 9 significant digits.
inline std::string format_sig9(double v) {
    if (v == 0.0) return "0";  // folds -0
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

/// Empty cell for undefined values.
inline std::string format_sig9(const std::optional<double>& v) { return v ? format_sig9(*v) : std::string(); }

} // namespace yumalab
