#include <gtest/gtest.h>

#include <random>

#include <yumalab/sweep.hpp>
#include <yumalab/synth.hpp>

using namespace yumalab;

namespace {

using Vec = std::vector<double>;

SubnetSnapshot random_snapshot(std::mt19937_64& rng, Netuid netuid, std::size_t n) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SubnetSnapshot s;
    s.netuid = netuid;
    for (std::size_t i = 0; i < n; ++i) {
        const Role role = i % 4 == 0 ? Role::Validator : Role::Miner;
        const double stake = std::pow(1.0 - unit(rng), -1.0 / 1.2);
        s.entries.push_back({"w" + std::to_string(i), role, stake, stake * (0.5 + unit(rng)), unit(rng)});
    }
    return s;
}

std::vector<SubnetSnapshot> corpus(std::uint64_t seed, std::size_t subnets, std::size_t wallets) {
    std::mt19937_64 rng(seed);
    std::vector<SubnetSnapshot> out;
    for (std::size_t k = 0; k < subnets; ++k) out.push_back(random_snapshot(rng, static_cast<Netuid>(k + 1), wallets));
    return out;
}

Dataset synth_dataset(std::uint32_t subnets, std::uint32_t wallets, std::uint32_t days, std::uint64_t seed) {
    SynthConfig cfg;
    cfg.n_subnets = subnets;
    cfg.wallets_per_subnet = wallets;
    cfg.span_days = days;
    cfg.seed = seed;
    cfg.start = parse_timestamp("2024-12-02T00:00:00Z");
    return generate(cfg);
}

} // namespace

TEST(Grids, DefaultsContainNullAndValidate) {
    for (Scheme s : {Scheme::Split, Scheme::Composite, Scheme::Bonus, Scheme::Cap, Scheme::Power, Scheme::Log}) {
        const auto g = default_grid(s);
        EXPECT_NE(std::find(g.begin(), g.end(), null_parameter(s)), g.end()) << to_string(s);
        EXPECT_NO_THROW(validate_grid(s, g));
        EXPECT_EQ(parse_scheme(to_string(s)), s);
    }
    EXPECT_EQ(default_grid(Scheme::Composite).size(), 11u);
    EXPECT_EQ(default_grid(Scheme::Composite).front(), 1.0);
    EXPECT_EQ(default_grid(Scheme::Composite).back(), 0.0);
    EXPECT_EQ(default_grid(Scheme::Split).back(), 2.0);
    EXPECT_EQ(default_grid(Scheme::Bonus).back(), 0.2);
    const auto caps = cap_percentile_grid();
    EXPECT_NE(std::find(caps.begin(), caps.end(), 88.0), caps.end());
    EXPECT_TRUE(std::is_sorted(caps.begin(), caps.end()));
}

TEST(Grids, MismatchIsRejected) {
    EXPECT_THROW(validate_grid(Scheme::Composite, Vec{1.0, 1.5}), ValidationError);
    EXPECT_THROW(validate_grid(Scheme::Composite, Vec{0.5}), ValidationError);  // lacks the null value
    EXPECT_THROW(validate_grid(Scheme::Split, Vec{}), ValidationError);
    EXPECT_THROW(validate_grid(Scheme::Bonus, Vec{0.0, -0.1}), ValidationError);
    EXPECT_THROW(validate_grid(Scheme::Cap, Vec{100.0, 0.0}), ValidationError);
    EXPECT_THROW(validate_grid(Scheme::Log, Vec{0.0, 0.5}), ValidationError);
    EXPECT_THROW(parse_scheme("demurrage"), Error);
}

TEST(SweepScheme, NullOnlyGridGivesZeroDeltas) {
    const auto snaps = corpus(41, 6, 40);
    for (Scheme s : {Scheme::Split, Scheme::Composite, Scheme::Bonus, Scheme::Cap, Scheme::Power, Scheme::Log}) {
        const Vec grid{null_parameter(s)};
        const auto res = sweep_scheme(snaps, s, grid);
        ASSERT_EQ(res.rows.size(), 12u);
        for (const auto& row : res.rows) {
            EXPECT_EQ(row.d_r_sr, 0.0);
            EXPECT_EQ(row.d_r_pr, 0.0);
        }
    }
}

TEST(SweepScheme, NullPointsReproduceRawProfiles) {
    const auto snaps = corpus(42, 4, 30);
    for (Scheme s : {Scheme::Bonus, Scheme::Composite}) {
        const auto res = sweep_scheme(snaps, s, default_grid(s));
        for (const auto& row : res.rows) {
            if (row.param != null_parameter(s)) continue;
            const auto& snap = snaps[row.netuid - 1];
            const auto prof = correlation_profile(snap, row.role);
            // composite at lambda=1 is an affine image of the observed rewards
            EXPECT_NEAR(*row.r_sr, *prof.r_sr, 1e-12);
            EXPECT_NEAR(*row.r_pr, *prof.r_pr, 1e-12);
            if (s == Scheme::Bonus) {
                EXPECT_EQ(row.r_sr, prof.r_sr);
                EXPECT_EQ(row.r_pr, prof.r_pr);
            }
        }
    }
}

TEST(SweepScheme, RowOrderAndCardinality) {
    const auto snaps = corpus(43, 3, 20);
    const auto grid = default_grid(Scheme::Composite);
    const auto res = sweep_scheme(snaps, Scheme::Composite, grid);
    ASSERT_EQ(res.rows.size(), grid.size() * 3 * 2);
    std::size_t k = 0;
    for (double g : grid)
        for (Netuid n = 1; n <= 3; ++n)
            for (Role r : {Role::Miner, Role::Validator}) {
                EXPECT_EQ(res.rows[k].param, g);
                EXPECT_EQ(res.rows[k].netuid, n);
                EXPECT_EQ(res.rows[k].role, r);
                ++k;
            }
    EXPECT_EQ(res.aggregates.size(), grid.size() * 2);
}

TEST(SweepScheme, CompositeReachesPerfProportionalAtZero) {
    const auto snaps = corpus(44, 5, 60);
    const auto res = sweep_scheme(snaps, Scheme::Composite, default_grid(Scheme::Composite));
    for (const auto& row : res.rows)
        if (row.role == Role::Miner && row.param == 0.0) { EXPECT_NEAR(*row.r_pr, 1.0, 1e-12); }
    // miner median delta is nondecreasing as lambda falls
    double prev = -2.0;
    for (const auto& a : res.aggregates) {
        if (a.role != Role::Miner) continue;
        EXPECT_GE(*a.median_d_r_pr, prev - 1e-12);
        prev = *a.median_d_r_pr;
    }
}

TEST(SweepScheme, BonusMatchesDirectRecomputation) {
    std::mt19937_64 rng(45);
    const std::vector<SubnetSnapshot> snaps{random_snapshot(rng, 7, 10)};
    const Vec grid{0.0, 0.1, 0.2};
    const auto res = sweep_scheme(snaps, Scheme::Bonus, grid);
    for (const auto& row : res.rows) {
        const auto stake = column(snaps[0], Column::Stake, row.role);
        const auto reward = column(snaps[0], Column::Reward, row.role);
        const auto perf = column(snaps[0], Column::Perf, row.role);
        const auto adj = bonus_rewards(reward, perf, row.param);
        EXPECT_NEAR(*row.d_r_sr, *pearson(stake, adj) - *pearson(stake, reward), 1e-12);
        EXPECT_NEAR(*row.d_r_pr, *pearson(perf, adj) - *pearson(perf, reward), 1e-12);
    }
}

TEST(SweepScheme, RejectsDuplicateNetuids) {
    auto snaps = corpus(46, 2, 10);
    snaps[1].netuid = snaps[0].netuid;
    EXPECT_THROW(sweep_scheme(snaps, Scheme::Split, default_grid(Scheme::Split)), ValidationError);
}

TEST(SweepScheme, ExcludesUndefinedCorrelations) {
    SubnetSnapshot s;
    s.netuid = 1;
    s.entries = {{"a", Role::Miner, 1, 1, 0}, {"b", Role::Miner, 2, 3, 0}, {"c", Role::Validator, 5, 1, 0.3}};
    const std::vector<SubnetSnapshot> snaps{s};
    const auto res = sweep_scheme(snaps, Scheme::Bonus, Vec{0.0, 0.2});
    ASSERT_EQ(res.rows.size(), 2u);  // one validator: role skipped
    EXPECT_FALSE(res.rows[0].r_pr);
    for (const auto& a : res.aggregates) EXPECT_EQ(a.n_subnets, 0u);
    EXPECT_EQ(res.aggregates[0].excluded, 1u);
}

TEST(SweepScheme, DeterministicAcrossThreadCounts) {
    const auto snaps = corpus(47, 9, 50);
    const auto a = sweep_scheme(snaps, Scheme::Split, default_grid(Scheme::Split), {0.25, 1});
    const auto b = sweep_scheme(snaps, Scheme::Split, default_grid(Scheme::Split), {0.25, 4});
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
        EXPECT_EQ(a.rows[k].r_sr, b.rows[k].r_sr);
        EXPECT_EQ(a.rows[k].d_r_pr, b.rows[k].d_r_pr);
    }
    const auto specs = default_interventions();
    const auto fa = tradeoff_frontier(snaps, specs, {0.51, 0.01, 1});
    const auto fb = tradeoff_frontier(snaps, specs, {0.51, 0.01, 3});
    for (std::size_t k = 0; k < fa.points.size(); ++k) {
        EXPECT_EQ(fa.points[k].label, fb.points[k].label);
        EXPECT_EQ(fa.points[k].median_coalition_fraction, fb.points[k].median_coalition_fraction);
    }
}

TEST(Frontier, IdentityPointSitsAtBaseline) {
    const auto snaps = corpus(48, 8, 120);
    const std::vector<TransformSpec> specs{TransformSpec::identity()};
    const auto f = tradeoff_frontier(snaps, specs);
    ASSERT_EQ(f.points.size(), 1u);
    EXPECT_EQ(f.points[0].median_whale_penalty, 0.0);
    EXPECT_EQ(f.points[0].median_coalition_fraction, f.baseline_median_coalition_fraction);
    EXPECT_TRUE(f.points[0].pareto);
}

TEST(Frontier, CapPenaltyNonincreasingInPercentile) {
    const auto snaps = corpus(49, 10, 150);
    std::vector<TransformSpec> specs;
    for (double p : cap_percentile_grid()) specs.push_back(TransformSpec::cap(p));
    const auto f = tradeoff_frontier(snaps, specs);
    std::map<double, double> by_pct;
    for (const auto& p : f.points) by_pct[p.spec.cap_percentile] = p.median_whale_penalty;
    double prev = 2.0;
    for (const auto& [pct, w] : by_pct) {
        EXPECT_LE(w, prev);
        prev = w;
    }
}

TEST(Frontier, ParetoFlagMatchesBruteForce) {
    std::vector<FrontierPoint> pts(3);
    pts[0] = {"a", {}, 1, 0.30, 0.10};
    pts[1] = {"b", {}, 1, 0.25, 0.20};  // dominated by a
    pts[2] = {"c", {}, 1, 0.40, 0.50};
    mark_pareto(pts);
    for (const auto& p : pts) {
        bool dominated = false;
        for (const auto& q : pts)
            dominated |= q.median_coalition_fraction > p.median_coalition_fraction && q.median_whale_penalty < p.median_whale_penalty;
        EXPECT_EQ(p.pareto, !dominated) << p.label;
    }
    EXPECT_FALSE(pts[1].pareto);
    EXPECT_TRUE(pts[0].pareto);
    EXPECT_TRUE(pts[2].pareto);
}

TEST(Frontier, RejectsEmptyInputs) {
    const auto snaps = corpus(50, 1, 5);
    EXPECT_THROW(tradeoff_frontier(snaps, std::vector<TransformSpec>{}), ValidationError);
    EXPECT_THROW(tradeoff_frontier(std::vector<SubnetSnapshot>{}, default_interventions()), ValidationError);
}

TEST(Robustness, IdentityMatchesBaseline) {
    const auto d = synth_dataset(4, 40, 70, 3);
    const Frequency freqs[] = {Frequency::Daily, Frequency::Weekly, Frequency::Monthly};
    const auto series = temporal_robustness(d, TransformSpec::identity(), freqs);
    ASSERT_EQ(series.size(), 3u);
    EXPECT_EQ(series[0].windows.size(), 70u);
    for (const auto& s : series)
        for (const auto& w : s.windows) {
            EXPECT_EQ(w.transformed.median, w.baseline.median);
            EXPECT_EQ(w.transformed.p10, w.baseline.p10);
            EXPECT_EQ(w.transformed.p90, w.baseline.p90);
        }
}

TEST(Robustness, SingleSubnetBandsCollapse) {
    const auto d = synth_dataset(1, 50, 40, 4);
    const Frequency freqs[] = {Frequency::Daily, Frequency::Weekly, Frequency::Monthly};
    for (const auto& s : temporal_robustness(d, TransformSpec::cap(88), freqs))
        for (const auto& w : s.windows) {
            EXPECT_EQ(w.transformed.median, w.transformed.p10);
            EXPECT_EQ(w.transformed.median, w.transformed.p90);
            EXPECT_EQ(w.n_subnets, 1u);
        }
}

TEST(Robustness, Cap88RaisesMedianEveryWindow) {
    const auto d = synth_dataset(8, 200, 62, 5);
    const Frequency freqs[] = {Frequency::Daily, Frequency::Weekly, Frequency::Monthly};
    for (const auto& s : temporal_robustness(d, TransformSpec::cap(88), freqs))
        for (const auto& w : s.windows) EXPECT_GT(w.transformed.median, w.baseline.median);
}

TEST(Robustness, ShortSpanIsAnError) {
    const auto d = synth_dataset(2, 10, 5, 6);
    const Frequency monthly[] = {Frequency::Monthly};
    EXPECT_THROW(temporal_robustness(d, TransformSpec::cap(88), monthly), ValidationError);
    EXPECT_THROW(temporal_robustness(d, TransformSpec::cap(88), std::span<const Frequency>{}), ValidationError);
}
