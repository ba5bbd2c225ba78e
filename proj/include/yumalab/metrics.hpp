#pragma once

// Concentration, correlation and majority-coalition statistics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace yumalab {

namespace detail {

inline double checked_sum(std::span<const double> values, const char* what) {
    double total = 0.0;
    for (double v : values) {
        if (!std::isfinite(v) || v < 0.0) throw ValidationError(std::string(what) + ": values must be finite and >= 0");
        total += v;
    }
    return total;
}

inline double positive_sum(std::span<const double> values, const char* what) {
    const double total = checked_sum(values, what);
    if (!(total > 0.0)) throw ValidationError(std::string(what) + ": total must be positive");
    return total;
}

} // namespace detail

/// Discrete Gini via the sorted-rank identity
///   G = sum_i (2i - n - 1) x_(i) / (n * sum x),  x ascending, i = 1..n,
/// which equals the mean absolute pairwise difference over twice the mean.
/// Returns nullopt when every value is zero.
inline std::optional<double> gini(std::span<const double> values) {
    if (values.empty()) throw ValidationError("gini: empty input");
    const double total = detail::checked_sum(values, "gini");
    if (!(total > 0.0)) return std::nullopt;
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double num = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) num += (2.0 * static_cast<double>(k + 1) - n - 1.0) * sorted[k];
    return std::clamp(num / (n * total), 0.0, 1.0);
}

/// Herfindahl-Hirschman index: sum of squared shares.
inline double hhi(std::span<const double> values) {
    const double total = detail::positive_sum(values, "hhi");
    double acc = 0.0;
    for (double v : values) {
        const double s = v / total;
        acc += s * s;
    }
    return acc;
}

/// ceil(p * n), with a small allowance so that e.g. 0.07 * 100 counts 7 wallets, at least 1.
inline std::size_t top_count(double fraction, std::size_t n) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ValidationError("fraction must lie in (0,1]");
    const double raw = std::ceil(fraction * static_cast<double>(n) - 1e-9);
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 0.0)), 1, std::max<std::size_t>(n, 1));
}

/// Share of the total held by the ceil(p * n) largest values.
inline double top_share(std::span<const double> values, double fraction) {
    const double total = detail::positive_sum(values, "top_share");
    const std::size_t k = top_count(fraction, values.size());
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>{});
    double top = 0.0;
    for (std::size_t i = 0; i < k; ++i) top += sorted[i];
    return std::min(1.0, top / total);
}

/// Smallest number of wallets whose combined stake reaches threshold * total.
inline std::size_t coalition_size(std::span<const double> stakes, double threshold = 0.51) {
    if (!(threshold > 0.0 && threshold <= 1.0)) throw ValidationError("threshold must lie in (0,1]");
    detail::positive_sum(stakes, "coalition_fraction");
    std::vector<double> sorted(stakes.begin(), stakes.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>{});
    // Total accumulated in the same order as the prefix sums so a threshold of 1 is reachable.
    const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
    const double needed = threshold * total;
    double acc = 0.0;
    for (std::size_t m = 0; m < sorted.size(); ++m) {
        acc += sorted[m];
        if (acc >= needed) return m + 1;
    }
    return sorted.size();
}

/// coalition_size / n.
inline double coalition_fraction(std::span<const double> stakes, double threshold = 0.51) {
    return static_cast<double>(coalition_size(stakes, threshold)) / static_cast<double>(stakes.size());
}

/// Sample Pearson coefficient; nullopt when either input is constant.
inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
    if (x.size() < 2) throw ValidationError("pearson: need at least 2 observations");
    const auto constant = [](std::span<const double> v) {
        return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
    };
    if (constant(x) || constant(y)) return std::nullopt;
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
    return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

struct CorrelationProfile {
    std::optional<double> r_sr;  // stake, reward
    std::optional<double> r_sp;  // stake, perf
    std::optional<double> r_pr;  // perf, reward

    friend bool operator==(const CorrelationProfile&, const CorrelationProfile&) = default;
};

inline CorrelationProfile correlation_profile(std::span<const double> stake, std::span<const double> reward,
                                              std::span<const double> perf) {
    if (stake.size() < 2) throw ValidationError("correlation profile needs at least 2 wallets");
    return {pearson(stake, reward), pearson(stake, perf), pearson(perf, reward)};
}

inline CorrelationProfile correlation_profile(const SubnetSnapshot& snap, Role role) {
    const auto stake = column(snap, Column::Stake, role);
    if (stake.size() < 2)
        throw ValidationError("subnet " + std::to_string(snap.netuid) + " has fewer than 2 wallets of role " +
                              std::string(to_string(role)));
    return correlation_profile(stake, column(snap, Column::Reward, role), column(snap, Column::Perf, role));
}

enum class RoleFilter { All, Miner, Validator };

inline std::string_view to_string(RoleFilter f) {
    switch (f) {
    case RoleFilter::All: return "all";
    case RoleFilter::Miner: return "miner";
    case RoleFilter::Validator: return "validator";
    }
    return "?";
}

inline std::optional<Role> as_role(RoleFilter f) {
    if (f == RoleFilter::Miner) return Role::Miner;
    if (f == RoleFilter::Validator) return Role::Validator;
    return std::nullopt;
}

/// Undefined metrics (empty or all-zero columns) are nullopt.
struct ConcentrationReport {
    Netuid netuid = 0;
    RoleFilter role_filter = RoleFilter::All;
    std::size_t n_wallets = 0;
    std::optional<double> gini_stake, gini_reward;
    std::optional<double> hhi_stake, hhi_reward;
    std::optional<double> top1_stake_share, top1_reward_share;
};

inline ConcentrationReport concentration_report(const SubnetSnapshot& snap, RoleFilter filter,
                                                double top_fraction = 0.01) {
    ConcentrationReport r;
    r.netuid = snap.netuid;
    r.role_filter = filter;
    const auto stake = column(snap, Column::Stake, as_role(filter));
    const auto reward = column(snap, Column::Reward, as_role(filter));
    r.n_wallets = stake.size();
    if (stake.empty()) return r;
    const auto fill = [&](const std::vector<double>& v, std::optional<double>& g, std::optional<double>& h,
                          std::optional<double>& t) {
        g = gini(v);
        if (!g) return;
        h = hhi(v);
        t = top_share(v, top_fraction);
    };
    fill(stake, r.gini_stake, r.hhi_stake, r.top1_stake_share);
    fill(reward, r.gini_reward, r.hhi_reward, r.top1_reward_share);
    return r;
}

/// Linear interpolation between order statistics at rank q * (n - 1), q in [0,1].
inline double percentile_linear(std::span<const double> values, double q) {
    if (values.empty()) throw ValidationError("percentile of empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("percentile rank must lie in [0,1]");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double median(std::span<const double> values) { return percentile_linear(values, 0.5); }

struct SummaryStats {
    std::size_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// Stats over the defined values; nullopt when none are defined.
inline std::optional<SummaryStats> summarize(std::span<const std::optional<double>> values) {
    std::vector<double> defined;
    for (const auto& v : values)
        if (v) defined.push_back(*v);
    if (defined.empty()) return std::nullopt;
    SummaryStats s;
    s.count = defined.size();
    s.mean = std::accumulate(defined.begin(), defined.end(), 0.0) / static_cast<double>(defined.size());
    s.median = median(defined);
    const auto [lo, hi] = std::minmax_element(defined.begin(), defined.end());
    s.min = *lo;
    s.max = *hi;
    return s;
}

} // namespace yumalab
