#pragma once

// Reward-realignment schemes and stake-reshaping transforms, all pure functions
// over per-wallet vectors.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "numfmt.hpp"

namespace yumalab {

struct SchemeParams {
    double xi0 = 0.25;   // base validator share
    double delta = 0.0;  // performance sensitivity of the split
    double lambda = 1.0; // weight on the baseline rank
    double gamma = 0.0;  // trust bonus

    void validate() const {
        if (!(xi0 >= 0.0 && xi0 <= 1.0)) throw ValidationError("xi0 must lie in [0,1]");
        if (!(delta >= 0.0) || !std::isfinite(delta)) throw ValidationError("delta must be >= 0");
        if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("lambda must lie in [0,1]");
        if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ValidationError("gamma must be >= 0");
    }
};

struct RewardEntry {
    Role role = Role::Miner;
    double reward = 0.0;
    double perf = 0.0;
};

namespace detail {

inline void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw ValidationError(std::string(what) + ": length mismatch");
}

} // namespace detail

/// Validators: r (xi0 + delta perf). Miners: r ((1 - xi0) + delta perf).
/// The total is not conserved; each wallet is rescaled independently.
inline std::vector<double> perf_weighted_rewards(std::span<const RewardEntry> entries, double xi0, double delta) {
    SchemeParams{.xi0 = xi0, .delta = delta}.validate();
    std::vector<double> out;
    out.reserve(entries.size());
    for (const auto& e : entries) {
        const double base = e.role == Role::Validator ? xi0 : 1.0 - xi0;
        out.push_back(e.reward * (base + delta * e.perf));
    }
    return out;
}

/// R'_j = lambda R_j + (1 - lambda) perf_j, with R already on [0,1].
inline std::vector<double> composite_ranks(std::span<const double> ranks, std::span<const double> perfs,
                                           double lambda) {
    detail::require_same_size(ranks.size(), perfs.size(), "composite_ranks");
    SchemeParams{.lambda = lambda}.validate();
    std::vector<double> out(ranks.size());
    for (std::size_t j = 0; j < ranks.size(); ++j) out[j] = lambda * ranks[j] + (1.0 - lambda) * perfs[j];
    return out;
}

/// Maps values affinely onto [0,1]. A constant nonzero vector maps to all ones, all zeros to zeros.
inline std::vector<double> min_max_normalize(std::span<const double> values) {
    std::vector<double> out(values.size(), 0.0);
    if (values.empty()) return out;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*hi == *lo) {
        if (*hi != 0.0) std::fill(out.begin(), out.end(), 1.0);
        return out;
    }
    const double range = *hi - *lo;
    for (std::size_t j = 0; j < values.size(); ++j) out[j] = (values[j] - *lo) / range;
    return out;
}

/// Re-allocates the miners' observed reward pool in proportion to the composite rank
/// built from min-max normalized observed rewards and perf.
inline std::vector<double> composite_miner_rewards(std::span<const double> rewards, std::span<const double> perfs,
                                                   double lambda) {
    detail::require_same_size(rewards.size(), perfs.size(), "composite_miner_rewards");
    const auto ranks = composite_ranks(min_max_normalize(rewards), perfs, lambda);
    const double pool = std::accumulate(rewards.begin(), rewards.end(), 0.0);
    const double mass = std::accumulate(ranks.begin(), ranks.end(), 0.0);
    std::vector<double> out(rewards.size(), 0.0);
    if (!(mass > 0.0)) return out;
    for (std::size_t j = 0; j < ranks.size(); ++j) out[j] = pool * (ranks[j] / mass);
    return out;
}

/// r* = r (1 + gamma perf).
inline std::vector<double> bonus_rewards(std::span<const double> rewards, std::span<const double> perfs, double gamma) {
    detail::require_same_size(rewards.size(), perfs.size(), "bonus_rewards");
    SchemeParams{.gamma = gamma}.validate();
    std::vector<double> out(rewards.size());
    for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = rewards[i] * (1.0 + gamma * perfs[i]);
    return out;
}

enum class TransformKind { Cap, Power, Log };

struct TransformSpec {
    TransformKind kind = TransformKind::Cap;
    double cap_percentile = 100.0;  // (0,100]
    double alpha_exponent = 1.0;    // (0,1]

    static TransformSpec cap(double percentile) { return {TransformKind::Cap, percentile, 1.0}; }
    static TransformSpec power(double alpha) { return {TransformKind::Power, 100.0, alpha}; }
    static TransformSpec log() { return {TransformKind::Log, 100.0, 1.0}; }
    static TransformSpec identity() { return cap(100.0); }

    void validate() const {
        if (kind == TransformKind::Cap && !(cap_percentile > 0.0 && cap_percentile <= 100.0))
            throw ValidationError("cap percentile must lie in (0,100]");
        if (kind == TransformKind::Power && !(alpha_exponent > 0.0 && alpha_exponent <= 1.0))
            throw ValidationError("power exponent must lie in (0,1]");
    }

    bool is_identity() const {
        return (kind == TransformKind::Cap && cap_percentile == 100.0) ||
               (kind == TransformKind::Power && alpha_exponent == 1.0);
    }

    std::string label() const {
        switch (kind) {
        case TransformKind::Cap: return "cap" + format_sig9(cap_percentile);
        case TransformKind::Power: return "power" + format_sig9(alpha_exponent);
        case TransformKind::Log: return "log";
        }
        return "?";
    }

    double param() const {
        switch (kind) {
        case TransformKind::Cap: return cap_percentile;
        case TransformKind::Power: return alpha_exponent;
        case TransformKind::Log: return 1.0;
        }
        return 0.0;
    }
};

inline std::string_view to_string(TransformKind k) {
    switch (k) {
    case TransformKind::Cap: return "cap";
    case TransformKind::Power: return "power";
    case TransformKind::Log: return "log";
    }
    return "?";
}

/// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value (1-based, at least the first).
inline double nearest_rank_percentile(std::span<const double> values, double percentile) {
    if (values.empty()) throw ValidationError("percentile of empty sample");
    if (!(percentile > 0.0 && percentile <= 100.0)) throw ValidationError("percentile must lie in (0,100]");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    const double rank = std::ceil(percentile / 100.0 * n - 1e-9);
    const auto idx = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(rank, 1.0)), 1, sorted.size());
    return sorted[idx - 1];
}

inline std::vector<double> apply_stake_transform(std::span<const double> stakes, const TransformSpec& spec) {
    spec.validate();
    detail::checked_sum(stakes, "stake transform");
    std::vector<double> out(stakes.begin(), stakes.end());
    if (out.empty()) return out;
    switch (spec.kind) {
    case TransformKind::Cap: {
        const double cap = nearest_rank_percentile(stakes, spec.cap_percentile);
        for (double& s : out) s = std::min(s, cap);
        break;
    }
    case TransformKind::Power:
        if (spec.alpha_exponent != 1.0)
            for (double& s : out) s = std::pow(s, spec.alpha_exponent);
        break;
    case TransformKind::Log:
        for (double& s : out) s = std::log1p(s);
        break;
    }
    return out;
}

/// Fraction of the top-1% wallets' original stake removed by a transform. The top set
/// is chosen by original stake (ties by position); the result is clamped to [0,1]
/// because concave transforms can raise stakes below 1.
inline double whale_penalty(std::span<const double> original, std::span<const double> transformed,
                            double top_fraction = 0.01) {
    detail::require_same_size(original.size(), transformed.size(), "whale_penalty");
    if (original.empty()) throw ValidationError("whale_penalty: empty input");
    std::vector<std::size_t> order(original.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return original[a] > original[b]; });
    const std::size_t k = top_count(top_fraction, original.size());
    double before = 0.0, after = 0.0;
    for (std::size_t t = 0; t < k; ++t) {
        before += original[order[t]];
        after += transformed[order[t]];
    }
    if (!(before > 0.0)) throw ValidationError("whale_penalty: top wallets hold no stake");
    return std::clamp((before - after) / before, 0.0, 1.0);
}

} // namespace yumalab
