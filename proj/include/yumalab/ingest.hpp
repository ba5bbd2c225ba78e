#pragma once

// Snapshot-event files: parsing, dataset invariants, cutoff, resampling.

#include <algorithm>
#include <charconv>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "model.hpp"
#include "numfmt.hpp"
#include "time.hpp"

namespace yumalab {

enum class Format { Jsonl, Csv };

inline Format parse_format(std::string_view s) {
    if (s == "jsonl") return Format::Jsonl;
    if (s == "csv") return Format::Csv;
    throw ParseError(0, "unknown format '" + std::string(s) + "'");
}

inline constexpr std::string_view kCsvHeader =
    "timestamp,block_number,netuid,wallet,role,stake,reward,trust,validator_trust";

/// Validated, sorted collection of events that all precede `cutoff()`.
class Dataset {
public:
    Dataset() = default;

    explicit Dataset(std::vector<SnapshotEvent> events, Timestamp cutoff = Timestamp::max())
        : events_(std::move(events)), cutoff_(cutoff) {
        std::stable_sort(events_.begin(), events_.end(), [](const SnapshotEvent& a, const SnapshotEvent& b) {
            const auto ta = a.timestamp();
            const auto tb = b.timestamp();
            const auto na = a.netuid();
            const auto nb = b.netuid();
            return std::tie(ta, na, a.wallet()) < std::tie(tb, nb, b.wallet());
        });
        for (const auto& e : events_)
            if (!(e.timestamp() < cutoff_))
                throw ValidationError("event at " + format_timestamp(e.timestamp()) + " is not before the cutoff");
        check_roles();
    }

    const std::vector<SnapshotEvent>& events() const noexcept { return events_; }
    Timestamp cutoff() const noexcept { return cutoff_; }
    std::size_t size() const noexcept { return events_.size(); }
    bool empty() const noexcept { return events_.empty(); }

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    void check_roles() const {
        std::map<std::pair<std::string_view, Netuid>, Role> seen;
        std::set<RoleConflictError::Pair> conflicts;
        for (const auto& e : events_) {
            auto [it, inserted] = seen.try_emplace({e.wallet(), e.netuid()}, e.role());
            if (!inserted && it->second != e.role()) conflicts.insert({e.wallet(), e.netuid()});
        }
        if (!conflicts.empty()) throw RoleConflictError({conflicts.begin(), conflicts.end()});
    }

    std::vector<SnapshotEvent> events_;
    Timestamp cutoff_ = Timestamp::max();
};

namespace detail {

inline double parse_double(std::string_view s, std::size_t line, const char* field) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || s.empty())
        throw ParseError(line, std::string("bad number for ") + field + ": '" + std::string(s) + "'");
    return v;
}

template <typename Int>
Int parse_int(std::string_view s, std::size_t line, const char* field) {
    Int v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw ParseError(line, std::string("bad integer for ") + field + ": '" + std::string(s) + "'");
    return v;
}

inline Timestamp parse_ts_at(std::string_view s, std::size_t line) {
    try {
        return parse_timestamp(s);
    } catch (const ParseError& e) {
        throw ParseError(line, e.what());
    }
}

// RFC 4180 field splitting; quoted fields may contain commas and doubled quotes.
inline std::vector<std::string> split_csv(std::string_view row, std::size_t line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    bool field_start = true;
    for (std::size_t k = 0; k < row.size(); ++k) {
        const char c = row[k];
        if (quoted) {
            if (c == '"') {
                if (k + 1 < row.size() && row[k + 1] == '"') {
                    cur += '"';
                    ++k;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && field_start) {
            quoted = true;
            field_start = false;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
            field_start = true;
        } else {
            cur += c;
            field_start = false;
        }
    }
    if (quoted) throw ParseError(line, "unterminated quoted field");
    out.push_back(std::move(cur));
    return out;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

inline std::optional<double> optional_score(std::string_view s, std::size_t line, const char* field) {
    if (s.empty()) return std::nullopt;
    return parse_double(s, line, field);
}

inline SnapshotEvent make_event_at(SnapshotEvent::Fields f, std::size_t line) {
    try {
        return SnapshotEvent(std::move(f));
    } catch (const ValidationError& e) {
        throw ValidationError("line " + std::to_string(line) + ": " + e.what());
    }
}

inline SnapshotEvent parse_csv_row(std::string_view row, std::size_t line) {
    const auto cols = split_csv(row, line);
    if (cols.size() != 9) throw ParseError(line, "expected 9 columns, got " + std::to_string(cols.size()));
    SnapshotEvent::Fields f;
    f.timestamp = parse_ts_at(cols[0], line);
    f.block_number = parse_int<std::uint64_t>(cols[1], line, "block_number");
    f.netuid = parse_int<Netuid>(cols[2], line, "netuid");
    f.wallet = cols[3];
    try {
        f.role = parse_role(cols[4]);
    } catch (const ParseError& e) {
        throw ParseError(line, e.what());
    }
    f.stake = parse_double(cols[5], line, "stake");
    f.reward = parse_double(cols[6], line, "reward");
    f.trust = optional_score(cols[7], line, "trust");
    f.validator_trust = optional_score(cols[8], line, "validator_trust");
    return make_event_at(std::move(f), line);
}

inline double json_number(const nlohmann::json& obj, const char* key, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(line, std::string("missing field '") + key + "'");
    if (it->is_number()) return it->get<double>();
    if (it->is_string()) return parse_double(it->get_ref<const std::string&>(), line, key);
    throw ParseError(line, std::string("field '") + key + "' is not a number");
}

inline std::optional<double> json_score(const nlohmann::json& obj, const char* key, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    return json_number(obj, key, line);
}

inline SnapshotEvent parse_json_row(std::string_view row, std::size_t line) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(row);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(line, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line, "expected a JSON object");

    const auto str = [&](const char* key) -> std::string {
        const auto it = obj.find(key);
        if (it == obj.end() || !it->is_string()) throw ParseError(line, std::string("missing string field '") + key + "'");
        return it->get<std::string>();
    };
    const auto uint = [&](const char* key) -> std::uint64_t {
        const auto it = obj.find(key);
        if (it == obj.end()) throw ParseError(line, std::string("missing field '") + key + "'");
        if (it->is_number_unsigned()) return it->get<std::uint64_t>();
        if (it->is_string()) return parse_int<std::uint64_t>(it->get_ref<const std::string&>(), line, key);
        throw ParseError(line, std::string("field '") + key + "' is not a nonnegative integer");
    };

    SnapshotEvent::Fields f;
    f.timestamp = parse_ts_at(str("timestamp"), line);
    f.block_number = uint("block_number");
    const auto netuid = uint("netuid");
    if (netuid > std::numeric_limits<Netuid>::max()) throw ParseError(line, "netuid out of range");
    f.netuid = static_cast<Netuid>(netuid);
    f.wallet = str("wallet");
    try {
        f.role = parse_role(str("role"));
    } catch (const ParseError& e) {
        if (e.line() != 0) throw;
        throw ParseError(line, e.what());
    }
    f.stake = json_number(obj, "stake", line);
    f.reward = json_number(obj, "reward", line);
    f.trust = json_score(obj, "trust", line);
    f.validator_trust = json_score(obj, "validator_trust", line);
    return make_event_at(std::move(f), line);
}

inline bool blank(std::string_view s) {
    return s.find_first_not_of(" \t\r") == std::string_view::npos;
}

} // namespace detail

/// Reads a whole event stream. Blank lines are skipped; CSV requires the fixed header first.
inline Dataset parse_events(std::istream& in, Format format) {
    std::vector<SnapshotEvent> events;
    std::string row;
    std::size_t line = 0;
    bool header_seen = false;
    while (std::getline(in, row)) {
        ++line;
        if (!row.empty() && row.back() == '\r') row.pop_back();
        if (detail::blank(row)) continue;
        if (format == Format::Csv && !header_seen) {
            if (row != kCsvHeader) throw ParseError(line, "unexpected CSV header '" + row + "'");
            header_seen = true;
            continue;
        }
        events.push_back(format == Format::Csv ? detail::parse_csv_row(row, line) : detail::parse_json_row(row, line));
    }
    return Dataset(std::move(events));
}

/// Writes events in `format`; numbers use shortest round-trip text so parse_events recovers them exactly.
inline void write_events(std::ostream& out, const Dataset& d, Format format) {
    const auto score = [](const std::optional<double>& s) { return s ? format_roundtrip(*s) : std::string(); };
    if (format == Format::Csv) {
        out << kCsvHeader << '\n';
        for (const auto& e : d.events()) {
            out << format_timestamp(e.timestamp()) << ',' << e.block_number() << ',' << e.netuid() << ','
                << detail::csv_escape(e.wallet()) << ',' << to_string(e.role()) << ',' << format_roundtrip(e.stake())
                << ',' << format_roundtrip(e.reward()) << ',' << score(e.trust()) << ',' << score(e.validator_trust())
                << '\n';
        }
        return;
    }
    const auto json_score = [](const std::optional<double>& s) { return s ? format_roundtrip(*s) : std::string("null"); };
    for (const auto& e : d.events()) {
        out << R"({"timestamp":")" << format_timestamp(e.timestamp()) << R"(","block_number":)" << e.block_number()
            << R"(,"netuid":)" << e.netuid() << R"(,"wallet":)" << nlohmann::json(e.wallet()).dump()
            << R"(,"role":")" << to_string(e.role()) << R"(","stake":)" << format_roundtrip(e.stake())
            << R"(,"reward":)" << format_roundtrip(e.reward()) << R"(,"trust":)" << json_score(e.trust())
            << R"(,"validator_trust":)" << json_score(e.validator_trust()) << "}\n";
    }
}

/// Keeps events strictly before `cutoff`.
inline Dataset apply_cutoff(const Dataset& d, Timestamp cutoff) {
    std::vector<SnapshotEvent> kept;
    kept.reserve(d.size());
    for (const auto& e : d.events())
        if (e.timestamp() < cutoff) kept.push_back(e);
    return Dataset(std::move(kept), std::min(cutoff, d.cutoff()));
}

namespace detail {

struct WalletAccumulator {
    Role role = Role::Miner;
    Tao stake = 0.0;
    Tao reward = 0.0;
    double perf = 0.0;
};

using WindowKey = std::pair<Netuid, Timestamp>;

inline std::vector<SubnetSnapshot> build_snapshots(
    const std::map<WindowKey, std::pair<Timestamp, std::map<std::string, WalletAccumulator>>>& groups) {
    std::vector<SubnetSnapshot> out;
    out.reserve(groups.size());
    for (const auto& [key, group] : groups) {
        SubnetSnapshot snap;
        snap.netuid = key.first;
        snap.window_start = key.second;
        snap.window_end = group.first;
        snap.entries.reserve(group.second.size());
        for (const auto& [wallet, acc] : group.second)
            snap.entries.push_back({wallet, acc.role, acc.stake, acc.reward, acc.perf});
        out.push_back(std::move(snap));
    }
    return out;
}

} // namespace detail

/// Groups events into calendar windows per subnet, ordered by (netuid, window_start).
/// Stake and perf come from each wallet's last event in the window; rewards are summed.
inline std::vector<SubnetSnapshot> resample(const Dataset& d, Frequency freq) {
    if (d.empty()) throw ValidationError("cannot resample an empty dataset");
    std::map<detail::WindowKey, std::pair<Timestamp, std::map<std::string, detail::WalletAccumulator>>> groups;
    for (const auto& e : d.events()) {
        const auto [start, end] = window_of(e.timestamp(), freq);
        auto& group = groups[{e.netuid(), start}];
        group.first = end;
        auto& acc = group.second[e.wallet()];
        acc.role = e.role();
        acc.stake = e.stake();
        acc.perf = e.perf();
        acc.reward += e.reward();
    }
    return detail::build_snapshots(groups);
}

/// One snapshot per subnet spanning its whole history (same aggregation rule as resample).
inline std::vector<SubnetSnapshot> collapse_history(const Dataset& d) {
    if (d.empty()) throw ValidationError("cannot aggregate an empty dataset");
    std::map<Netuid, Timestamp> first_seen;
    for (const auto& e : d.events()) first_seen.try_emplace(e.netuid(), e.timestamp());
    std::map<detail::WindowKey, std::pair<Timestamp, std::map<std::string, detail::WalletAccumulator>>> groups;
    for (const auto& e : d.events()) {
        auto& group = groups[{e.netuid(), first_seen.at(e.netuid())}];
        group.first = e.timestamp() + std::chrono::milliseconds{1};
        auto& acc = group.second[e.wallet()];
        acc.role = e.role();
        acc.stake = e.stake();
        acc.perf = e.perf();
        acc.reward += e.reward();
    }
    return detail::build_snapshots(groups);
}

} // namespace yumalab
