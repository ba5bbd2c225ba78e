// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <yumalab/yumalab.hpp>

#include "../cli_util.hpp"
#include "../oracles.hpp"
#include "../yuma_util.hpp"

using namespace yumalab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Shared synthetic corpus: 50 subnets x 500 wallets, rho = 0, Pareto(1.2) stakes,
// stake-proportional rewards, 62 days starting on a Monday.
const Dataset& corpus() {
    static const Dataset d = [] {
        SynthConfig cfg;
        cfg.n_subnets = 50;
        cfg.wallets_per_subnet = 500;
        cfg.span_days = 62;
        cfg.seed = 42;
        cfg.start = parse_timestamp("2024-12-02T00:00:00Z");
        cfg.stake_perf_coupling = 0.0;
        cfg.threads = worker_count();
        return generate(cfg);
    }();
    return d;
}

const std::vector<SubnetSnapshot>& corpus_snapshots() {
    static const auto s = collapse_history(corpus());
    return s;
}

// 1. Gini vs the O(n^2) pairwise formula.
Outcome gini_oracle() {
    std::mt19937_64 rng(1001);
    std::uniform_int_distribution<std::size_t> nd(1, 200);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> v(nd(rng));
        const int law = t % 3;
        for (auto& x : v) {
            const double u = unit(rng);
            x = law == 0 ? u : law == 1 ? std::pow(1.0 - u, -1.0 / 1.2) : (u < 0.3 ? 0.0 : std::exp(6.0 * u));
        }
        v[rng() % v.size()] += 0.5;
        worst = std::max(worst, std::abs(*gini(v) - oracle::gini_pairwise(v)));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-12 && secs < 5.0, fmt("1000 vectors, max |diff| %.3g (tol 1e-12), %.2fs (limit 5s)", worst, secs)};
}

// 2. run_tempo conservation and the exact 18/41/41 split.
Outcome yuma_conservation() {
    std::mt19937_64 rng(1002);
    std::uniform_real_distribution<double> ed(1e-3, 1e4);
    const EmissionParams params;
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    bool split_exact = params.owner_share() + params.miner_share() + params.validator_share() == 1.0;
    const auto s100 = split_block_emission(100.0, params);
    split_exact = split_exact && s100.owner == 18.0 && s100.miner_pool == 41.0 && s100.validator_pool == 41.0;
    int done = 0;
    while (done < 500) {
        const auto inst = testutil::random_instance(rng, 10, 10);
        const auto wm = testutil::to_weight_matrix(inst);
        const double e = ed(rng);
        BondState bonds = BondState::zeros(wm.n_validators(), wm.n_miners());
        const auto out = run_tempo(wm, bonds, params, e);
        if (out.no_ranking_mass || out.no_bond_mass) continue;  // nothing to allocate
        split_exact = split_exact && out.owner_amount == 0.18 * e && out.miner_pool == 0.41 * e &&
                      out.validator_pool == 0.41 * e;
        double paid = out.owner_amount;
        for (double x : out.miner_tao) paid += x;
        for (double x : out.validator_tao) paid += x;
        worst = std::max(worst, std::abs(paid - e) / e);
        ++done;
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-9 && split_exact && secs < 5.0,
            fmt("500 instances, max rel err %.3g (tol 1e-9), split exact: %s, %.2fs (limit 5s)", worst,
                split_exact ? "yes" : "no", secs)};
}

// 3. Raising any above-benchmark weight leaves every R_j unchanged.
Outcome clipping_futility() {
    std::mt19937_64 rng(1003);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int instances = 0, raises = 0, mismatches = 0;
    while (instances < 200) {
        auto inst = testutil::random_instance(rng, 10, 10);
        const auto wm = testutil::to_weight_matrix(inst);
        const auto clip = consensus_clip(wm, 0.5);
        const auto base = miner_emission_shares(clip.clipped, wm.stakes()).ranks;
        bool any = false;
        for (std::size_t i = 0; i < inst.S.size(); ++i)
            for (std::size_t j = 0; j < inst.W[i].size(); ++j) {
                if (!(inst.W[i][j] > clip.benchmarks[j])) continue;
                any = true;
                auto raised = inst;
                raised.W[i][j] = inst.W[i][j] + (1.0 - inst.W[i][j]) * (0.01 + 0.99 * unit(rng));
                const auto wm2 = testutil::to_weight_matrix(raised);
                const auto ranks = miner_emission_shares(consensus_clip(wm2, 0.5).clipped, wm2.stakes()).ranks;
                ++raises;
                if (ranks != base) ++mismatches;
            }
        if (any) ++instances;
    }
    return {mismatches == 0, fmt("200 instances, %d single-weight raises, %d changed R_j (exact equality)", raises, mismatches)};
}

// 4. Null parameters reproduce the observed profiles; lambda = 0 gives r_pr = 1.
Outcome scheme_endpoints() {
    std::ifstream in(testutil::data_path("fixture.jsonl"));
    const auto fixture = collapse_history(apply_cutoff(parse_events(in, Format::Jsonl), default_cutoff()));
    double worst_profile = 0.0, worst_lambda0 = 0.0;
    bool zero_deltas = true, bonus_exact = true;
    int checked = 0;
    for (const auto* snaps : {&fixture, &corpus_snapshots()}) {
        for (Scheme s : {Scheme::Split, Scheme::Composite, Scheme::Bonus}) {
            const auto res = sweep_scheme(*snaps, s, default_grid(s), {.threads = worker_count()});
            std::map<Netuid, const SubnetSnapshot*> by_id;
            for (const auto& snap : *snaps) by_id[snap.netuid] = &snap;
            for (const auto& row : res.rows) {
                if (row.param == null_parameter(s)) {
                    zero_deltas = zero_deltas && row.d_r_sr == 0.0 && row.d_r_pr == 0.0;
                    const auto raw = correlation_profile(*by_id.at(row.netuid), row.role);
                    if (row.r_sr && raw.r_sr) worst_profile = std::max(worst_profile, std::abs(*row.r_sr - *raw.r_sr));
                    if (row.r_pr && raw.r_pr) worst_profile = std::max(worst_profile, std::abs(*row.r_pr - *raw.r_pr));
                    if (s == Scheme::Bonus) bonus_exact = bonus_exact && row.r_sr == raw.r_sr && row.r_pr == raw.r_pr;
                    ++checked;
                }
                if (s == Scheme::Composite && row.param == 0.0 && row.role == Role::Miner && row.r_pr)
                    worst_lambda0 = std::max(worst_lambda0, std::abs(*row.r_pr - 1.0));
            }
        }
    }
    const bool pass = zero_deltas && bonus_exact && worst_profile <= 1e-12 && worst_lambda0 <= 1e-12;
    return {pass, fmt("%d null rows: deltas exactly 0: %s; max |r - r_observed| %.3g (tol 1e-12, bonus bit-exact: %s); "
                      "lambda=0 max |r_pr - 1| %.3g (tol 1e-12)",
                      checked, zero_deltas ? "yes" : "no", worst_profile, bonus_exact ? "yes" : "no", worst_lambda0)};
}

// 5. Directional reproduction of the reward schemes.
Outcome scheme_directions() {
    const auto& snaps = corpus_snapshots();
    bool pass = true;
    std::ostringstream detail;
    std::map<Scheme, std::pair<double, double>> at;  // (d_r_pr, d_r_sr) at the operating point
    const std::map<Scheme, double> operating{{Scheme::Split, 1.0}, {Scheme::Composite, 0.8}, {Scheme::Bonus, 0.2}};
    for (Scheme s : {Scheme::Split, Scheme::Composite, Scheme::Bonus}) {
        const auto res = sweep_scheme(snaps, s, default_grid(s), {.threads = worker_count()});
        double prev = -2.0;
        bool monotone = true;
        for (const auto& a : res.aggregates) {
            if (a.role != Role::Miner || !a.median_d_r_pr) continue;
            monotone = monotone && *a.median_d_r_pr >= prev;
            prev = *a.median_d_r_pr;
            if (a.param == operating.at(s)) at[s] = {*a.median_d_r_pr, *a.median_d_r_sr};
        }
        pass = pass && monotone && at.count(s);
        detail << to_string(s) << '@' << format_sig9(operating.at(s)) << " dpr=" << format_sig9(at[s].first)
               << " dsr=" << format_sig9(at[s].second) << (monotone ? " monotone" : " NOT-monotone") << (s == Scheme::Bonus ? "" : "; ");
    }
    pass = pass && at[Scheme::Split].first > 0 && at[Scheme::Split].second < 0;
    pass = pass && at[Scheme::Composite].first > 0 && at[Scheme::Composite].second < 0;
    pass = pass && at[Scheme::Bonus].first > 0 && std::abs(at[Scheme::Bonus].second) < std::abs(at[Scheme::Bonus].first);
    return {pass, "50x500 corpus, miner medians: " + detail.str()};
}

// 6. Coalition solver vs exhaustive search.
Outcome coalition_oracle() {
    std::mt19937_64 rng(1006);
    std::uniform_int_distribution<std::size_t> nd(1, 50);
    std::uniform_int_distribution<int> small(0, 100);
    const auto t0 = std::chrono::steady_clock::now();
    int mismatches = 0, enumerated = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = nd(rng);
        std::vector<double> v(n);
        // integer stakes keep subset sums exact, so the comparison is free of rounding
        for (auto& x : v) x = t % 2 ? small(rng) : std::floor(std::pow(1.0 - std::uniform_real_distribution<double>()(rng), -1.0 / 1.2) * 10.0);
        v[0] += 1.0;
        const auto fast = coalition_size(v, 0.51);
        if (fast != oracle::coalition_size_dp(v, 0.51)) ++mismatches;
        if (n <= 20) {
            ++enumerated;
            if (fast != oracle::coalition_size_enumerate(v, 0.51)) ++mismatches;
        }
    }
    const double secs = seconds_since(t0);
    return {mismatches == 0 && secs < 10.0,
            fmt("1000 vectors (n<=50, %d also fully enumerated), %d mismatches, %.2fs (limit 10s)", enumerated, mismatches, secs)};
}

// 7. Cap monotonicity and the 88th-percentile cap at every window.
Outcome cap_security() {
    const auto& snaps = corpus_snapshots();
    std::vector<TransformSpec> specs;
    std::vector<double> pcts = cap_percentile_grid();
    pcts.push_back(100.0);
    for (double p : pcts) specs.push_back(TransformSpec::cap(p));
    const auto f = tradeoff_frontier(snaps, specs, {.threads = worker_count()});
    std::map<double, double> by_pct;
    for (const auto& p : f.points) by_pct[p.spec.cap_percentile] = p.median_coalition_fraction;
    bool monotone = true;
    double prev = 2.0;
    for (const auto& [pct, frac] : by_pct) {
        monotone = monotone && frac <= prev;
        prev = frac;
    }
    const Frequency freqs[] = {Frequency::Daily, Frequency::Weekly, Frequency::Monthly};
    const auto series = temporal_robustness(corpus(), TransformSpec::cap(88), freqs, {.threads = worker_count()});
    bool every = true;
    std::ostringstream detail;
    for (const auto& s : series) {
        double gap = 1.0;
        for (const auto& w : s.windows) gap = std::min(gap, w.transformed.median - w.baseline.median);
        every = every && gap > 0.0;
        detail << to_string(s.freq) << ": " << s.windows.size() << " windows, min gap " << format_sig9(gap) << (s.freq == Frequency::Monthly ? "" : "; ");
    }
    return {monotone && every, fmt("median f nonincreasing over %zu cap percentiles: %s; cap88 vs baseline ", by_pct.size(),
                                   monotone ? "yes" : "no") + detail.str()};
}

// 8. Frontier identity point and concave transforms vs caps.
Outcome frontier_sanity() {
    const auto& snaps = corpus_snapshots();
    auto specs = default_interventions();
    specs.push_back(TransformSpec::power(1.0));
    const auto f = tradeoff_frontier(snaps, specs, {.threads = worker_count()});
    bool identity_ok = false;
    double max_power = -1.0, min_cap = 2.0;
    for (const auto& p : f.points) {
        if (p.spec.kind == TransformKind::Cap && p.spec.cap_percentile == 100.0)
            identity_ok = p.median_whale_penalty == 0.0 && p.median_coalition_fraction == f.baseline_median_coalition_fraction;
        if (p.spec.kind == TransformKind::Power && p.spec.alpha_exponent >= 0.5) max_power = std::max(max_power, p.median_whale_penalty);
        if (p.spec.kind == TransformKind::Cap && p.spec.cap_percentile <= 90.0) min_cap = std::min(min_cap, p.median_whale_penalty);
    }
    return {identity_ok && max_power < min_cap,
            fmt("identity at dw=0 and baseline f=%.4f: %s; max power dw %.4f < min cap<=90 dw %.4f", f.baseline_median_coalition_fraction,
                identity_ok ? "yes" : "no", max_power, min_cap)};
}

// 9. synth -> write -> parse -> resample(daily) conserves reward mass exactly.
Outcome ingest_round_trip() {
    int ok = 0, errors = 0;
    std::size_t events = 0;
    for (int k = 0; k < 20; ++k) {
        SynthConfig cfg;
        cfg.seed = 9000 + k;
        cfg.n_subnets = 2 + k % 4;
        cfg.wallets_per_subnet = 10 + 7 * k;
        cfg.span_days = 5 + k;
        cfg.stake_perf_coupling = (k % 5 - 2) * 0.4;
        cfg.stake_law = k % 3 == 0 ? StakeLaw::pareto(1.2) : k % 3 == 1 ? StakeLaw::lognormal(2.0, 1.5) : StakeLaw::uniform(0.5, 1.5);
        cfg.reward_rule = k % 2 ? RewardRule::YumaReplay : RewardRule::StakeProportional;
        try {
            const Dataset d = generate(cfg);
            const Format f = k % 2 ? Format::Csv : Format::Jsonl;
            std::stringstream buf;
            write_events(buf, d, f);
            const Dataset back = parse_events(buf, f);
            std::vector<double> before, after;
            for (const auto& e : d.events()) before.push_back(e.reward());
            for (const auto& s : resample(back, Frequency::Daily))
                for (const auto& e : s.entries) after.push_back(e.reward);
            std::sort(before.begin(), before.end());
            std::sort(after.begin(), after.end());
            double sb = 0.0, sa = 0.0;
            for (double x : before) sb += x;
            for (double x : after) sa += x;
            events += d.size();
            if (back == d && sb == sa && before == after) ++ok;
        } catch (const Error&) {
            ++errors;
        }
    }
    return {ok == 20 && errors == 0, fmt("20 configs (%zu events), %d conserved exactly, %d validation errors", events, ok, errors)};
}

// 10. Every subcommand rerun on the bundled fixture is byte-identical.
Outcome golden_determinism() {
    const std::string fixture = testutil::data_path("fixture.jsonl");
    const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
        {"ingest", {"ingest", "--input", fixture}},
        {"metrics", {"metrics", "--input", fixture}},
        {"attack", {"attack", "--input", fixture}},
        {"tempo", {"tempo", "--input", testutil::data_path("tempo.json")}},
        {"sweep-split", {"sweep", "--scheme", "split", "--input", fixture}},
        {"sweep-composite", {"sweep", "--scheme", "composite", "--input", fixture}},
        {"sweep-bonus", {"sweep", "--scheme", "bonus", "--input", fixture}},
        {"frontier", {"frontier", "--input", fixture}},
        {"robustness", {"robustness", "--input", fixture}},
        {"synth", {"synth", "--seed", "7", "--subnets", "3", "--wallets", "12", "--days", "40", "--start", "2025-01-06T00:00:00Z"}},
    };
    int identical = 0, files = 0;
    std::string bad;
    for (const auto& [name, args] : commands) {
        std::vector<std::map<std::string, std::string>> runs(2);
        bool ran = true;
        for (int r = 0; r < 2; ++r) {
            const auto dir = testutil::scratch_dir("acc-" + name + "-" + std::to_string(r));
            auto full = args;
            full.push_back("--out");
            full.push_back(dir.string());
            ran = ran && testutil::run_cli(full).code == 0;
            for (const auto& e : fs::directory_iterator(dir)) runs[r][e.path().filename().string()] = testutil::read_file(e.path());
        }
        if (ran && !runs[0].empty() && runs[0] == runs[1]) {
            ++identical;
            files += static_cast<int>(runs[0].size());
        } else {
            bad += " " + name;
        }
        if (name == "synth" && runs[0]["synth.jsonl"] != testutil::read_file(fixture)) bad += " synth-vs-fixture";
        if (name == "metrics" && runs[0]["concentration.csv"] != testutil::read_file(testutil::data_path("golden/concentration.csv")))
            bad += " metrics-vs-golden";
        if (name == "attack" && runs[0]["coalition.csv"] != testutil::read_file(testutil::data_path("golden/coalition.csv")))
            bad += " attack-vs-golden";
    }
    const int expected = static_cast<int>(commands.size());
    return {identical == expected && bad.empty(),
            fmt("%d/%d subcommand runs byte-identical (%d files)", identical, expected, files) +
                (bad.empty() ? std::string("; goldens match") : "; differing:" + bad)};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"gini-oracle", gini_oracle},
        {"yuma-conservation", yuma_conservation},
        {"clipping-futility", clipping_futility},
        {"scheme-endpoints", scheme_endpoints},
        {"scheme-directions", scheme_directions},
        {"coalition-oracle", coalition_oracle},
        {"cap-security", cap_security},
        {"frontier-sanity", frontier_sanity},
        {"ingest-round-trip", ingest_round_trip},
        {"golden-determinism", golden_determinism},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("[%s] %2zu %-20s %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
