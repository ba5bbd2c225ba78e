#pragma once

// Seeded synthetic snapshot datasets with controllable stake concentration and
// stake-perf coupling.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "consensus.hpp"
#include "errors.hpp"
#include "ingest.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "time.hpp"

namespace yumalab {

struct StakeLaw {
    enum class Kind { Pareto, Lognormal, Uniform };
    Kind kind = Kind::Pareto;
    double shape = 1.2;  // pareto tail index
    double scale = 1.0;  // pareto minimum
    double mu = 0.0;     // lognormal
    double sigma = 1.0;  // lognormal
    double low = 0.5;    // uniform
    double high = 1.5;   // uniform

    static StakeLaw pareto(double shape, double scale = 1.0) { return {Kind::Pareto, shape, scale}; }
    static StakeLaw lognormal(double mu, double sigma) { return {Kind::Lognormal, 1.2, 1.0, mu, sigma}; }
    static StakeLaw uniform(double low, double high) { return {Kind::Uniform, 1.2, 1.0, 0.0, 1.0, low, high}; }
};

struct PerfLaw {
    enum class Kind { Beta, Uniform };
    Kind kind = Kind::Beta;
    double a = 2.0;
    double b = 2.0;

    static PerfLaw beta(double a, double b) { return {Kind::Beta, a, b}; }
    static PerfLaw uniform() { return {Kind::Uniform, 1.0, 1.0}; }
};

enum class RewardRule { StakeProportional, YumaReplay };

struct SynthConfig {
    std::uint32_t n_subnets = 8;
    std::uint32_t wallets_per_subnet = 200;
    double validator_fraction = 0.2;
    StakeLaw stake_law;
    PerfLaw perf_law;
    double stake_perf_coupling = 0.0;  // rho in [-1,1]
    RewardRule reward_rule = RewardRule::StakeProportional;
    std::uint64_t seed = 0;
    Timestamp start = parse_timestamp("2024-11-04T00:00:00Z");
    std::uint32_t span_days = 90;
    Tao daily_emission = 100.0;   // per subnet
    double stake_jitter = 0.05;   // sd of the daily log-stake noise
    double weight_noise = 0.1;    // sd of validator scoring noise (yuma_replay)
    EmissionParams emission;
    unsigned threads = 1;

    void validate() const {
        if (n_subnets == 0) throw ValidationError("n_subnets must be positive");
        if (wallets_per_subnet < 2) throw ValidationError("wallets_per_subnet must be at least 2");
        if (!(validator_fraction > 0.0 && validator_fraction < 1.0))
            throw ValidationError("validator_fraction must lie in (0,1)");
        switch (stake_law.kind) {
        case StakeLaw::Kind::Pareto:
            if (!(stake_law.shape > 0.0) || !(stake_law.scale > 0.0))
                throw ValidationError("pareto stake law needs shape > 0 and scale > 0");
            break;
        case StakeLaw::Kind::Lognormal:
            if (!(stake_law.sigma > 0.0) || !std::isfinite(stake_law.mu))
                throw ValidationError("lognormal stake law needs finite mu and sigma > 0");
            break;
        case StakeLaw::Kind::Uniform:
            if (!(stake_law.low >= 0.0 && stake_law.high > stake_law.low))
                throw ValidationError("uniform stake law needs 0 <= low < high");
            break;
        }
        if (perf_law.kind == PerfLaw::Kind::Beta && !(perf_law.a > 0.0 && perf_law.b > 0.0))
            throw ValidationError("beta perf law needs a > 0 and b > 0");
        if (!(stake_perf_coupling >= -1.0 && stake_perf_coupling <= 1.0))
            throw ValidationError("stake_perf_coupling must lie in [-1,1]");
        if (span_days == 0) throw ValidationError("span_days must be positive");
        if (!(daily_emission >= 0.0)) throw ValidationError("daily_emission must be >= 0");
        if (!(stake_jitter >= 0.0) || !(weight_noise >= 0.0)) throw ValidationError("noise levels must be >= 0");
    }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline double draw_stake(const StakeLaw& law, std::mt19937_64& rng) {
    switch (law.kind) {
    case StakeLaw::Kind::Pareto: {
        // inverse CDF; 1 - U keeps the argument in (0,1]
        const double u = 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        return law.scale * std::pow(u, -1.0 / law.shape);
    }
    case StakeLaw::Kind::Lognormal: return std::lognormal_distribution<double>(law.mu, law.sigma)(rng);
    case StakeLaw::Kind::Uniform: return std::uniform_real_distribution<double>(law.low, law.high)(rng);
    }
    return 0.0;
}

inline double draw_perf(const PerfLaw& law, std::mt19937_64& rng) {
    if (law.kind == PerfLaw::Kind::Uniform) return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double x = std::gamma_distribution<double>(law.a, 1.0)(rng);
    const double y = std::gamma_distribution<double>(law.b, 1.0)(rng);
    return x + y > 0.0 ? x / (x + y) : 0.5;
}

/// Assigns sorted perf draws to wallets ordered by a blend of stake rank and an
/// independent random rank; |rho| weights the stake rank and its sign sets direction.
inline void couple_ranks(std::span<const double> stakes, std::vector<double>& perfs, double rho, std::mt19937_64& rng) {
    const std::size_t n = stakes.size();
    if (n < 2) return;
    std::vector<std::size_t> by_stake(n);
    std::iota(by_stake.begin(), by_stake.end(), std::size_t{0});
    std::stable_sort(by_stake.begin(), by_stake.end(), [&](std::size_t a, std::size_t b) { return stakes[a] < stakes[b]; });
    std::vector<double> stake_rank(n);
    for (std::size_t r = 0; r < n; ++r) stake_rank[by_stake[r]] = static_cast<double>(r) / static_cast<double>(n - 1);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> score(n);
    const double w = std::abs(rho);
    for (std::size_t i = 0; i < n; ++i) {
        const double directed = rho >= 0.0 ? stake_rank[i] : 1.0 - stake_rank[i];
        score[i] = w * directed + (1.0 - w) * unit(rng);
    }
    std::vector<std::size_t> by_score(n);
    std::iota(by_score.begin(), by_score.end(), std::size_t{0});
    std::stable_sort(by_score.begin(), by_score.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
    std::vector<double> sorted = perfs;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t r = 0; r < n; ++r) perfs[by_score[r]] = sorted[r];
}

inline std::vector<SnapshotEvent> generate_subnet(const SynthConfig& cfg, Netuid netuid) {
    std::mt19937_64 rng(splitmix64(cfg.seed ^ splitmix64(netuid)));
    const std::size_t n = cfg.wallets_per_subnet;
    const auto n_val = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(cfg.validator_fraction * static_cast<double>(n))), 1, n - 1);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Role> role(n, Role::Miner);
    for (std::size_t k = 0; k < n_val; ++k) role[order[k]] = Role::Validator;

    std::vector<double> base_stake(n), perf(n);
    for (auto& s : base_stake) s = draw_stake(cfg.stake_law, rng);
    for (auto& p : perf) p = draw_perf(cfg.perf_law, rng);
    for (Role r : {Role::Miner, Role::Validator}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < n; ++i)
            if (role[i] == r) idx.push_back(i);
        std::vector<double> s, p;
        for (auto i : idx) {
            s.push_back(base_stake[i]);
            p.push_back(perf[i]);
        }
        couple_ranks(s, p, cfg.stake_perf_coupling, rng);
        for (std::size_t k = 0; k < idx.size(); ++k) perf[idx[k]] = p[k];
    }

    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "sn%u-w%05zu", netuid, i);
        ids[i] = buf;
    }
    std::vector<std::size_t> validators, miners;
    for (std::size_t i = 0; i < n; ++i) (role[i] == Role::Validator ? validators : miners).push_back(i);

    BondState bonds = BondState::zeros(validators.size(), miners.size());
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<SnapshotEvent> events;
    events.reserve(n * cfg.span_days);
    std::vector<double> stake(n), reward(n);
    const double sd = cfg.stake_jitter;

    for (std::uint32_t day = 0; day < cfg.span_days; ++day) {
        for (std::size_t i = 0; i < n; ++i) stake[i] = base_stake[i] * std::exp(sd * normal(rng) - 0.5 * sd * sd);
        std::fill(reward.begin(), reward.end(), 0.0);

        if (cfg.reward_rule == RewardRule::StakeProportional) {
            const auto split = split_block_emission(cfg.daily_emission, cfg.emission);
            for (const auto* group : {&miners, &validators}) {
                const Tao pool = group == &miners ? split.miner_pool : split.validator_pool;
                double total = 0.0;
                for (auto i : *group) total += stake[i];
                if (total > 0.0)
                    for (auto i : *group) reward[i] = pool * (stake[i] / total);
            }
        } else {
            std::vector<ValidatorStake> vs;
            for (auto i : validators) vs.push_back({ids[i], stake[i]});
            std::vector<std::string> ms;
            for (auto j : miners) ms.push_back(ids[j]);
            Matrix w(validators.size(), miners.size());
            for (std::size_t a = 0; a < validators.size(); ++a)
                for (std::size_t b = 0; b < miners.size(); ++b)
                    w(a, b) = std::clamp(perf[miners[b]] + cfg.weight_noise * normal(rng), 0.0, 1.0);
            const WeightMatrix wm(std::move(vs), std::move(ms), std::move(w));
            const auto outcome = run_tempo(wm, bonds, cfg.emission, cfg.daily_emission);
            bonds = BondState(outcome.bonds, outcome.tempo_index);
            for (std::size_t a = 0; a < validators.size(); ++a) reward[validators[a]] = outcome.validator_tao[a];
            for (std::size_t b = 0; b < miners.size(); ++b) reward[miners[b]] = outcome.miner_tao[b];
        }

        const Timestamp ts = cfg.start + std::chrono::days{day};
        for (std::size_t i = 0; i < n; ++i) {
            SnapshotEvent::Fields f;
            f.timestamp = ts;
            f.block_number = 7200ull * (day + 1);
            f.netuid = netuid;
            f.wallet = ids[i];
            f.role = role[i];
            f.stake = stake[i];
            f.reward = reward[i];
            (role[i] == Role::Miner ? f.trust : f.validator_trust) = perf[i];
            events.emplace_back(std::move(f));
        }
    }
    return events;
}

} // namespace detail

/// Deterministic for a fixed config: subnets draw from seeds derived from (seed, netuid),
/// so the thread count does not affect the output. Netuids run 1..n_subnets.
inline Dataset generate(const SynthConfig& cfg) {
    cfg.validate();
    std::vector<std::vector<SnapshotEvent>> per_subnet(cfg.n_subnets);
    parallel_for(cfg.n_subnets, cfg.threads,
                 [&](std::size_t k) { per_subnet[k] = detail::generate_subnet(cfg, static_cast<Netuid>(k + 1)); });
    std::vector<SnapshotEvent> all;
    std::size_t total = 0;
    for (const auto& v : per_subnet) total += v.size();
    all.reserve(total);
    for (auto& v : per_subnet) std::move(v.begin(), v.end(), std::back_inserter(all));
    return Dataset(std::move(all));
}

} // namespace yumalab
