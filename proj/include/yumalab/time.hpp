#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>
#include <utility>

#include "errors.hpp"

namespace yumalab {

/// UTC instant with millisecond resolution.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

enum class Frequency { Daily, Weekly, Monthly };

inline std::string_view to_string(Frequency f) {
    switch (f) {
    case Frequency::Daily: return "daily";
    case Frequency::Weekly: return "weekly";
    case Frequency::Monthly: return "monthly";
    }
    return "?";
}

inline Frequency parse_frequency(std::string_view s) {
    if (s == "daily") return Frequency::Daily;
    if (s == "weekly") return Frequency::Weekly;
    if (s == "monthly") return Frequency::Monthly;
    throw ParseError(0, "unknown frequency '" + std::string(s) + "'");
}

namespace detail {

inline int parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len, std::string_view whole) {
    int value = 0;
    if (pos + len > s.size())
        throw ParseError(0, "truncated timestamp '" + std::string(whole) + "'");
    const char* first = s.data() + pos;
    const char* last = first + len;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ParseError(0, "malformed timestamp '" + std::string(whole) + "'");
    return value;
}

} // namespace detail

/// Parses `YYYY-MM-DDTHH:MM:SS[.fff]Z`. Fractions beyond milliseconds are rejected.
inline Timestamp parse_timestamp(std::string_view s) {
    using namespace std::chrono;
    const auto bad = [&] { return ParseError(0, "malformed timestamp '" + std::string(s) + "'"); };
    if (s.size() < 20 || s.back() != 'Z' || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' ||
        s[16] != ':')
        throw bad();

    const int y = detail::parse_fixed_int(s, 0, 4, s);
    const int mo = detail::parse_fixed_int(s, 5, 2, s);
    const int d = detail::parse_fixed_int(s, 8, 2, s);
    const int hh = detail::parse_fixed_int(s, 11, 2, s);
    const int mm = detail::parse_fixed_int(s, 14, 2, s);
    const int ss = detail::parse_fixed_int(s, 17, 2, s);

    int millis = 0;
    const std::string_view rest = s.substr(19, s.size() - 20);
    if (!rest.empty()) {
        if (rest[0] != '.' || rest.size() < 2 || rest.size() > 4) throw bad();
        const std::string_view frac = rest.substr(1);
        millis = detail::parse_fixed_int(frac, 0, frac.size(), s);
        for (std::size_t k = frac.size(); k < 3; ++k) millis *= 10;
    }

    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) throw bad();
    return Timestamp{sys_days{ymd}} + hours{hh} + minutes{mm} + seconds{ss} + milliseconds{millis};
}

/// Inverse of parse_timestamp; milliseconds are printed only when nonzero.
inline std::string format_timestamp(Timestamp t) {
    using namespace std::chrono;
    const auto day_start = floor<days>(t);
    const year_month_day ymd{day_start};
    const hh_mm_ss tod{t - day_start};
    char buf[40];
    const long long ms = tod.subseconds().count();
    if (ms != 0) {
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ", int(ymd.year()),
                      unsigned(ymd.month()), unsigned(ymd.day()), static_cast<long long>(tod.hours().count()),
                      static_cast<long long>(tod.minutes().count()), static_cast<long long>(tod.seconds().count()),
                      ms);
    } else {
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", int(ymd.year()),
                      unsigned(ymd.month()), unsigned(ymd.day()), static_cast<long long>(tod.hours().count()),
                      static_cast<long long>(tod.minutes().count()),
                      static_cast<long long>(tod.seconds().count()));
    }
    return buf;
}

/// Calendar-aligned UTC window `[start, end)` containing `t`. Weeks start on Monday.
inline std::pair<Timestamp, Timestamp> window_of(Timestamp t, Frequency f) {
    using namespace std::chrono;
    const sys_days day = floor<days>(t);
    switch (f) {
    case Frequency::Daily:
        return {Timestamp{day}, Timestamp{day + days{1}}};
    case Frequency::Weekly: {
        const auto since_monday = weekday{day} - Monday;
        const sys_days start = day - since_monday;
        return {Timestamp{start}, Timestamp{start + days{7}}};
    }
    case Frequency::Monthly: {
        const year_month_day ymd{day};
        const auto first = ymd.year() / ymd.month() / 1d;
        const auto next = first + months{1};
        return {Timestamp{sys_days{first}}, Timestamp{sys_days{next}}};
    }
    }
    throw Error("unreachable frequency");
}

/// Default exclusion instant for post-upgrade data.
inline Timestamp default_cutoff() { return parse_timestamp("2025-02-13T00:00:00Z"); }

} // namespace yumalab
