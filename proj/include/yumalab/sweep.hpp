#pragma once

// Parameter sweeps over reward schemes and stake transforms, the security versus
// whale-penalty frontier, and coalition robustness across sampling frequencies.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "ingest.hpp"
#include "interventions.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "parallel.hpp"

namespace yumalab {

enum class Scheme { Split, Composite, Bonus, Cap, Power, Log };

inline std::string_view to_string(Scheme s) {
    switch (s) {
    case Scheme::Split: return "split";
    case Scheme::Composite: return "composite";
    case Scheme::Bonus: return "bonus";
    case Scheme::Cap: return "cap";
    case Scheme::Power: return "power";
    case Scheme::Log: return "log";
    }
    return "?";
}

inline Scheme parse_scheme(std::string_view s) {
    for (Scheme k : {Scheme::Split, Scheme::Composite, Scheme::Bonus, Scheme::Cap, Scheme::Power, Scheme::Log})
        if (s == to_string(k)) return k;
    throw ParseError(0, "unknown scheme '" + std::string(s) + "'");
}

/// Parameter value at which a scheme leaves within-role correlations unchanged.
/// For log the parameter is an on/off switch.
inline double null_parameter(Scheme s) {
    switch (s) {
    case Scheme::Split: return 0.0;
    case Scheme::Composite: return 1.0;
    case Scheme::Bonus: return 0.0;
    case Scheme::Cap: return 100.0;
    case Scheme::Power: return 1.0;
    case Scheme::Log: return 0.0;
    }
    return 0.0;
}

namespace detail {

inline std::vector<double> steps(int first, int last, int step, double scale) {
    std::vector<double> out;
    if (step > 0)
        for (int k = first; k <= last; k += step) out.push_back(k / scale);
    else
        for (int k = first; k >= last; k += step) out.push_back(k / scale);
    return out;
}

} // namespace detail

inline std::vector<double> cap_percentile_grid() {
    std::vector<double> g = detail::steps(50, 95, 5, 1.0);
    for (int p = 96; p <= 99; ++p) g.push_back(p);
    g.push_back(88.0);
    std::sort(g.begin(), g.end());
    return g;
}

inline std::vector<double> default_grid(Scheme s) {
    switch (s) {
    case Scheme::Split: return detail::steps(0, 20, 1, 10.0);        // delta 0, 0.1, ..., 2.0
    case Scheme::Composite: return detail::steps(10, 0, -1, 10.0);   // lambda 1.0 down to 0
    case Scheme::Bonus: return detail::steps(0, 20, 1, 100.0);       // gamma 0, 0.01, ..., 0.20
    case Scheme::Cap: {
        auto g = cap_percentile_grid();
        g.push_back(100.0);  // null
        std::reverse(g.begin(), g.end());
        return g;
    }
    case Scheme::Power: return detail::steps(10, 5, -1, 10.0);       // alpha 1.0 down to 0.5
    case Scheme::Log: return {0.0, 1.0};
    }
    return {};
}

inline void validate_grid(Scheme s, std::span<const double> grid) {
    if (grid.empty()) throw ValidationError("sweep grid is empty");
    const double null = null_parameter(s);
    if (std::find(grid.begin(), grid.end(), null) == grid.end())
        throw ValidationError("grid for " + std::string(to_string(s)) + " must include the null parameter " +
                              format_sig9(null));
    for (double v : grid) {
        bool ok = std::isfinite(v);
        switch (s) {
        case Scheme::Split:
        case Scheme::Bonus: ok = ok && v >= 0.0; break;
        case Scheme::Composite: ok = ok && v >= 0.0 && v <= 1.0; break;
        case Scheme::Cap: ok = ok && v > 0.0 && v <= 100.0; break;
        case Scheme::Power: ok = ok && v > 0.0 && v <= 1.0; break;
        case Scheme::Log: ok = ok && (v == 0.0 || v == 1.0); break;
        }
        if (!ok) throw ValidationError("grid value " + format_sig9(v) + " is invalid for " + std::string(to_string(s)));
    }
}

/// (stake, reward) for every entry of a snapshot after applying `scheme` at `param`.
struct AdjustedColumns {
    std::vector<double> stake;
    std::vector<double> reward;
};

inline AdjustedColumns apply_scheme(const SubnetSnapshot& snap, Scheme scheme, double param, double xi0 = 0.25) {
    AdjustedColumns out{column(snap, Column::Stake), column(snap, Column::Reward)};
    const auto perf = column(snap, Column::Perf);
    switch (scheme) {
    case Scheme::Split: {
        std::vector<RewardEntry> entries;
        entries.reserve(snap.entries.size());
        for (const auto& e : snap.entries) entries.push_back({e.role, e.reward, e.perf});
        out.reward = perf_weighted_rewards(entries, xi0, param);
        break;
    }
    case Scheme::Composite: {
        std::vector<std::size_t> miners;
        std::vector<double> r, p;
        for (std::size_t k = 0; k < snap.entries.size(); ++k) {
            if (snap.entries[k].role != Role::Miner) continue;
            miners.push_back(k);
            r.push_back(out.reward[k]);
            p.push_back(perf[k]);
        }
        const auto adjusted = composite_miner_rewards(r, p, param);
        for (std::size_t m = 0; m < miners.size(); ++m) out.reward[miners[m]] = adjusted[m];
        break;
    }
    case Scheme::Bonus: out.reward = bonus_rewards(out.reward, perf, param); break;
    case Scheme::Cap: out.stake = apply_stake_transform(out.stake, TransformSpec::cap(param)); break;
    case Scheme::Power: out.stake = apply_stake_transform(out.stake, TransformSpec::power(param)); break;
    case Scheme::Log:
        if (param != 0.0) out.stake = apply_stake_transform(out.stake, TransformSpec::log());
        break;
    }
    return out;
}

struct SweepRow {
    double param = 0.0;
    Netuid netuid = 0;
    Role role = Role::Miner;
    std::optional<double> r_sr, r_pr;
    std::optional<double> d_r_sr, d_r_pr;
};

/// Deltas across subnets for one (grid value, role); rows with an undefined delta are excluded.
struct SweepAggregate {
    double param = 0.0;
    Role role = Role::Miner;
    std::size_t n_subnets = 0;
    std::size_t excluded = 0;
    std::optional<double> mean_d_r_sr, median_d_r_sr;
    std::optional<double> mean_d_r_pr, median_d_r_pr;
};

struct SweepResult {
    Scheme scheme = Scheme::Split;
    std::vector<double> grid;
    std::vector<SweepRow> rows;              // ordered by (grid index, netuid, role)
    std::vector<SweepAggregate> aggregates;  // ordered by (grid index, role)
};

struct SweepOptions {
    double xi0 = 0.25;
    unsigned threads = 1;
};

namespace detail {

inline std::optional<double> diff(const std::optional<double>& a, const std::optional<double>& b) {
    if (!a || !b) return std::nullopt;
    return *a - *b;
}

inline std::vector<std::size_t> order_by_netuid(std::span<const SubnetSnapshot> snapshots) {
    std::vector<std::size_t> order(snapshots.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return snapshots[a].netuid < snapshots[b].netuid; });
    for (std::size_t k = 1; k < order.size(); ++k)
        if (snapshots[order[k]].netuid == snapshots[order[k - 1]].netuid)
            throw ValidationError("sweep expects one snapshot per subnet; netuid " +
                                  std::to_string(snapshots[order[k]].netuid) + " repeats");
    return order;
}

inline std::vector<double> select(std::span<const double> values, const SubnetSnapshot& snap, Role role) {
    std::vector<double> out;
    for (std::size_t k = 0; k < snap.entries.size(); ++k)
        if (snap.entries[k].role == role) out.push_back(values[k]);
    return out;
}

inline std::optional<double> mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::nullopt;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

} // namespace detail

/// Applies `scheme` at every grid value to every snapshot (one per subnet) and records
/// per-(subnet, role) stake-reward and perf-reward correlations. Deltas are taken
/// against the same scheme at its null parameter, so the null row is exactly zero.
inline SweepResult sweep_scheme(std::span<const SubnetSnapshot> snapshots, Scheme scheme, std::span<const double> grid,
                                const SweepOptions& opts = {}) {
    validate_grid(scheme, grid);
    const auto order = detail::order_by_netuid(snapshots);
    const double null = null_parameter(scheme);
    constexpr Role kRoles[] = {Role::Miner, Role::Validator};

    // per snapshot: rows for every grid value and role
    std::vector<std::vector<SweepRow>> per_snapshot(order.size());
    parallel_for(order.size(), opts.threads, [&](std::size_t slot) {
        const SubnetSnapshot& snap = snapshots[order[slot]];
        const auto profile_at = [&](double param, Role role) -> std::optional<std::pair<std::optional<double>, std::optional<double>>> {
            const auto adj = apply_scheme(snap, scheme, param, opts.xi0);
            const auto stake = detail::select(adj.stake, snap, role);
            if (stake.size() < 2) return std::nullopt;
            const auto reward = detail::select(adj.reward, snap, role);
            const auto perf = column(snap, Column::Perf, role);
            return std::pair{pearson(stake, reward), pearson(perf, reward)};
        };
        std::vector<SweepRow> rows;
        for (Role role : kRoles) {
            const auto base = profile_at(null, role);
            if (!base) continue;
            for (double param : grid) {
                const auto cur = param == null ? base : profile_at(param, role);
                SweepRow row{param, snap.netuid, role, cur->first, cur->second, {}, {}};
                row.d_r_sr = detail::diff(cur->first, base->first);
                row.d_r_pr = detail::diff(cur->second, base->second);
                rows.push_back(row);
            }
        }
        per_snapshot[slot] = std::move(rows);
    });

    SweepResult result{scheme, {grid.begin(), grid.end()}, {}, {}};
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::map<Role, std::vector<const SweepRow*>> by_role;
        for (const auto& rows : per_snapshot) {
            for (Role role : kRoles)
                for (const auto& row : rows)
                    if (row.param == grid[g] && row.role == role) {
                        result.rows.push_back(row);
                        break;
                    }
        }
        for (Role role : kRoles) {
            SweepAggregate agg{grid[g], role, 0, 0, {}, {}, {}, {}};
            std::vector<double> dsr, dpr;
            for (const auto& rows : per_snapshot)
                for (const auto& row : rows) {
                    if (row.param != grid[g] || row.role != role) continue;
                    if (!row.d_r_sr || !row.d_r_pr) {
                        ++agg.excluded;
                        continue;
                    }
                    dsr.push_back(*row.d_r_sr);
                    dpr.push_back(*row.d_r_pr);
                }
            agg.n_subnets = dsr.size();
            agg.mean_d_r_sr = detail::mean_of(dsr);
            agg.mean_d_r_pr = detail::mean_of(dpr);
            if (!dsr.empty()) {
                agg.median_d_r_sr = median(dsr);
                agg.median_d_r_pr = median(dpr);
            }
            result.aggregates.push_back(agg);
        }
    }
    return result;
}

struct FrontierPoint {
    std::string label;
    TransformSpec spec;
    std::size_t n_subnets = 0;
    double median_coalition_fraction = 0.0;
    double median_whale_penalty = 0.0;
    double mean_coalition_fraction = 0.0;
    double mean_whale_penalty = 0.0;
    bool pareto = false;
};

struct Frontier {
    double baseline_median_coalition_fraction = 0.0;
    std::vector<FrontierPoint> points;  // ascending whale penalty
};

struct FrontierOptions {
    double threshold = 0.51;
    double top_fraction = 0.01;
    unsigned threads = 1;
};

/// Marks points for which no other point has both a higher coalition fraction and a lower penalty.
inline void mark_pareto(std::vector<FrontierPoint>& points) {
    for (auto& p : points) {
        p.pareto = std::none_of(points.begin(), points.end(), [&](const FrontierPoint& q) {
            return q.median_coalition_fraction > p.median_coalition_fraction &&
                   q.median_whale_penalty < p.median_whale_penalty;
        });
    }
}

/// Median security (wallet fraction for a majority) and median whale penalty across
/// subnets for each transform. Subnets without positive stake are skipped.
inline Frontier tradeoff_frontier(std::span<const SubnetSnapshot> snapshots, std::span<const TransformSpec> specs,
                                  const FrontierOptions& opts = {}) {
    if (specs.empty()) throw ValidationError("frontier needs at least one intervention");
    for (const auto& s : specs) s.validate();

    std::vector<std::vector<double>> stakes;
    for (const auto& snap : snapshots) {
        auto s = column(snap, Column::Stake);
        if (!s.empty() && std::accumulate(s.begin(), s.end(), 0.0) > 0.0) stakes.push_back(std::move(s));
    }
    if (stakes.empty()) throw ValidationError("frontier needs at least one subnet with positive stake");

    Frontier out;
    std::vector<double> base(stakes.size());
    for (std::size_t k = 0; k < stakes.size(); ++k) base[k] = coalition_fraction(stakes[k], opts.threshold);
    out.baseline_median_coalition_fraction = median(base);

    out.points.resize(specs.size());
    parallel_for(specs.size(), opts.threads, [&](std::size_t idx) {
        std::vector<double> fracs, penalties;
        for (const auto& s : stakes) {
            const auto t = apply_stake_transform(s, specs[idx]);
            if (!(std::accumulate(t.begin(), t.end(), 0.0) > 0.0)) continue;
            fracs.push_back(coalition_fraction(t, opts.threshold));
            penalties.push_back(whale_penalty(s, t, opts.top_fraction));
        }
        FrontierPoint p;
        p.label = specs[idx].label();
        p.spec = specs[idx];
        p.n_subnets = fracs.size();
        if (!fracs.empty()) {
            p.median_coalition_fraction = median(fracs);
            p.median_whale_penalty = median(penalties);
            p.mean_coalition_fraction = *detail::mean_of(fracs);
            p.mean_whale_penalty = *detail::mean_of(penalties);
        }
        out.points[idx] = std::move(p);
    });
    std::stable_sort(out.points.begin(), out.points.end(), [](const FrontierPoint& a, const FrontierPoint& b) {
        if (a.median_whale_penalty != b.median_whale_penalty) return a.median_whale_penalty < b.median_whale_penalty;
        return a.median_coalition_fraction > b.median_coalition_fraction;
    });
    mark_pareto(out.points);
    return out;
}

/// Cap percentiles, power exponents and the log transform, as on the default sweep grids.
inline std::vector<TransformSpec> default_interventions() {
    std::vector<TransformSpec> out;
    out.push_back(TransformSpec::identity());
    for (double p : cap_percentile_grid()) out.push_back(TransformSpec::cap(p));
    for (double a : detail::steps(9, 5, -1, 10.0)) out.push_back(TransformSpec::power(a));
    out.push_back(TransformSpec::log());
    return out;
}

struct Band {
    double median = 0.0;
    double p10 = 0.0;
    double p90 = 0.0;
};

struct WindowStat {
    Timestamp window_start{};
    Timestamp window_end{};
    std::size_t n_subnets = 0;
    Band transformed;
    Band baseline;
};

struct RobustnessSeries {
    Frequency freq = Frequency::Daily;
    std::vector<WindowStat> windows;
};

inline Band band_of(std::span<const double> values) {
    return {percentile_linear(values, 0.5), percentile_linear(values, 0.1), percentile_linear(values, 0.9)};
}

/// For each frequency and window: coalition fraction per subnet with and without the
/// transform, summarized by median and 10th/90th percentiles across subnets.
inline std::vector<RobustnessSeries> temporal_robustness(const Dataset& d, const TransformSpec& spec,
                                                         std::span<const Frequency> freqs,
                                                         const FrontierOptions& opts = {}) {
    spec.validate();
    if (freqs.empty()) throw ValidationError("robustness needs at least one frequency");
    std::vector<RobustnessSeries> out;
    for (Frequency f : freqs) {
        const auto snaps = resample(d, f);
        std::map<Timestamp, std::vector<const SubnetSnapshot*>> by_window;
        for (const auto& s : snaps) by_window[s.window_start].push_back(&s);
        if (by_window.size() < 2)
            throw ValidationError("dataset spans fewer than 2 " + std::string(to_string(f)) + " windows");

        std::vector<std::pair<Timestamp, std::vector<const SubnetSnapshot*>>> windows(by_window.begin(), by_window.end());
        RobustnessSeries series{f, std::vector<WindowStat>(windows.size())};
        parallel_for(windows.size(), opts.threads, [&](std::size_t w) {
            std::vector<double> with, without;
            Timestamp end{};
            for (const SubnetSnapshot* s : windows[w].second) {
                end = std::max(end, s->window_end);
                const auto stake = column(*s, Column::Stake);
                if (!(std::accumulate(stake.begin(), stake.end(), 0.0) > 0.0)) continue;
                without.push_back(coalition_fraction(stake, opts.threshold));
                with.push_back(spec.is_identity() ? without.back()
                                                  : coalition_fraction(apply_stake_transform(stake, spec), opts.threshold));
            }
            WindowStat& stat = series.windows[w];
            stat.window_start = windows[w].first;
            stat.window_end = end;
            stat.n_subnets = with.size();
            if (!with.empty()) {
                stat.transformed = band_of(with);
                stat.baseline = band_of(without);
            }
        });
        out.push_back(std::move(series));
    }
    return out;
}

} // namespace yumalab
