#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <yumalab/yumalab.hpp>

namespace yumalab::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunConfig {
    std::vector<std::string> inputs;
    std::string out_dir = ".";
    std::string format;  // empty: infer from extension
    std::string cutoff = "2025-02-13T00:00:00Z";
    std::string freq;
    std::string scheme = "split";
    std::string grid;
    std::string transform;
    std::optional<double> param;
    double threshold = 0.51;
    std::uint64_t seed = 0;
    double xi0 = 0.25;

    // synth
    std::uint32_t subnets = 8;
    std::uint32_t wallets = 200;
    std::uint32_t days = 90;
    std::string start = "2024-11-04T00:00:00Z";
    double rho = 0.0;
    double validator_fraction = 0.2;
    std::string stake_law = "pareto";
    double stake_shape = 1.2;
    double stake_scale = 1.0;
    std::string reward_rule = "stake_proportional";
    double emission = 100.0;
};

/// Rounds to the 9 significant digits used in every report so JSON and CSV agree.
double sig9(double v) { return std::stod(format_sig9(v)); }

json sig9(const std::optional<double>& v) { return v ? json(sig9(*v)) : json(nullptr); }

fs::path prepare_out(const RunConfig& cfg) {
    fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ValidationError("cannot create output directory '" + cfg.out_dir + "'");
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ValidationError("cannot write '" + path.string() + "'");
    f << content;
    if (!content.empty() && content.back() != '\n') f << '\n';
    if (!f) throw ValidationError("failed writing '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

Format input_format(const RunConfig& cfg, const std::string& path) {
    if (!cfg.format.empty()) return parse_format(cfg.format);
    return fs::path(path).extension() == ".csv" ? Format::Csv : Format::Jsonl;
}

/// Reads and merges every input, then applies the cutoff.
Dataset load(const RunConfig& cfg, std::size_t* events_read = nullptr) {
    if (cfg.inputs.empty()) throw ValidationError("--input is required");
    std::vector<SnapshotEvent> all;
    for (const auto& path : cfg.inputs) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ValidationError("cannot open input '" + path + "'");
        Dataset part;
        try {
            part = parse_events(in, input_format(cfg, path));
        } catch (const Error& e) {
            throw ValidationError(path + ": " + e.what());
        }
        all.insert(all.end(), part.events().begin(), part.events().end());
    }
    if (events_read) *events_read = all.size();
    return apply_cutoff(Dataset(std::move(all)), parse_timestamp(cfg.cutoff));
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item.empty()) continue;
        out.push_back(detail::parse_double(item, 0, "grid"));
    }
    if (out.empty()) throw ValidationError("--grid is empty");
    return out;
}

void require_nonempty(const Dataset& d) {
    if (d.empty()) throw ValidationError("no events remain after the cutoff");
}

// ---------------------------------------------------------------- ingest

int cmd_ingest(const RunConfig& cfg) {
    std::size_t read = 0;
    const Dataset d = load(cfg, &read);
    require_nonempty(d);
    const Frequency freq = cfg.freq.empty() ? Frequency::Daily : parse_frequency(cfg.freq);
    const auto snaps = resample(d, freq);
    const auto dir = prepare_out(cfg);

    std::ostringstream csv;
    csv << "netuid,window_start,window_end,wallet,role,stake,reward,perf\n";
    std::set<std::pair<std::string, Netuid>> wallets;
    for (const auto& s : snaps)
        for (const auto& e : s.entries) {
            wallets.insert({e.wallet, s.netuid});
            csv << s.netuid << ',' << format_timestamp(s.window_start) << ',' << format_timestamp(s.window_end) << ','
                << detail::csv_escape(e.wallet) << ',' << to_string(e.role) << ',' << format_sig9(e.stake) << ','
                << format_sig9(e.reward) << ',' << format_sig9(e.perf) << '\n';
        }
    write_file(dir / "snapshots.csv", csv.str());

    std::set<Netuid> subnets;
    for (const auto& e : d.events()) subnets.insert(e.netuid());
    json summary{{"events_read", read},
                 {"events_kept", d.size()},
                 {"cutoff", cfg.cutoff},
                 {"freq", std::string(to_string(freq))},
                 {"subnets", subnets.size()},
                 {"wallet_subnet_pairs", wallets.size()},
                 {"snapshots", snaps.size()}};
    write_json(dir / "ingest_summary.json", summary);
    return kExitOk;
}

// ---------------------------------------------------------------- metrics

constexpr RoleFilter kFilters[] = {RoleFilter::All, RoleFilter::Miner, RoleFilter::Validator};

std::string report_row(const ConcentrationReport& r) {
    std::ostringstream row;
    row << r.netuid << ',' << to_string(r.role_filter) << ',' << r.n_wallets << ',' << format_sig9(r.gini_stake) << ','
        << format_sig9(r.gini_reward) << ',' << format_sig9(r.hhi_stake) << ',' << format_sig9(r.hhi_reward) << ','
        << format_sig9(r.top1_stake_share) << ',' << format_sig9(r.top1_reward_share) << '\n';
    return row.str();
}

constexpr const char* kReportHeader =
    "netuid,role_filter,n_wallets,gini_stake,gini_reward,hhi_stake,hhi_reward,top1_stake_share,top1_reward_share\n";

int cmd_metrics(const RunConfig& cfg) {
    const Dataset d = load(cfg);
    require_nonempty(d);
    const auto dir = prepare_out(cfg);

    // whole history: one aggregated snapshot per subnet
    std::vector<ConcentrationReport> whole;
    std::ostringstream csv;
    csv << kReportHeader;
    for (const auto& snap : collapse_history(d))
        for (RoleFilter f : kFilters) {
            whole.push_back(concentration_report(snap, f));
            csv << report_row(whole.back());
        }
    write_file(dir / "concentration.csv", csv.str());

    // per-snapshot mean: metrics per window, averaged per (subnet, role filter)
    const Frequency freq = cfg.freq.empty() ? Frequency::Daily : parse_frequency(cfg.freq);
    std::map<std::pair<Netuid, RoleFilter>, std::vector<ConcentrationReport>> per_window;
    for (const auto& snap : resample(d, freq))
        for (RoleFilter f : kFilters) per_window[{snap.netuid, f}].push_back(concentration_report(snap, f));

    std::vector<ConcentrationReport> means;
    std::ostringstream mcsv;
    mcsv << kReportHeader;
    for (const auto& [key, reports] : per_window) {
        ConcentrationReport m;
        m.netuid = key.first;
        m.role_filter = key.second;
        using Field = std::optional<double> ConcentrationReport::*;
        const auto avg = [&](Field field) -> std::optional<double> {
            std::vector<std::optional<double>> vals;
            for (const auto& r : reports) vals.push_back(r.*field);
            const auto s = summarize(vals);
            return s ? std::optional<double>(s->mean) : std::nullopt;
        };
        std::size_t n = 0;
        for (const auto& r : reports) n = std::max(n, r.n_wallets);
        m.n_wallets = n;
        m.gini_stake = avg(&ConcentrationReport::gini_stake);
        m.gini_reward = avg(&ConcentrationReport::gini_reward);
        m.hhi_stake = avg(&ConcentrationReport::hhi_stake);
        m.hhi_reward = avg(&ConcentrationReport::hhi_reward);
        m.top1_stake_share = avg(&ConcentrationReport::top1_stake_share);
        m.top1_reward_share = avg(&ConcentrationReport::top1_reward_share);
        means.push_back(m);
        mcsv << report_row(m);
    }
    write_file(dir / "concentration_snapshot_mean.csv", mcsv.str());

    // cross-subnet summary: mean, median, min, max of each metric, split by role
    std::ostringstream scsv;
    scsv << "variant,role_filter,metric,stake_mean,stake_median,stake_min,stake_max,reward_mean,reward_median,"
            "reward_min,reward_max\n";
    using Field = std::optional<double> ConcentrationReport::*;
    struct Metric {
        const char* name;
        Field stake;
        Field reward;
    };
    const Metric metrics[] = {
        {"gini", &ConcentrationReport::gini_stake, &ConcentrationReport::gini_reward},
        {"hhi", &ConcentrationReport::hhi_stake, &ConcentrationReport::hhi_reward},
        {"top1_share", &ConcentrationReport::top1_stake_share, &ConcentrationReport::top1_reward_share},
    };
    const auto stats_cells = [](const std::optional<SummaryStats>& s) {
        if (!s) return std::string(",,,");
        return format_sig9(s->mean) + ',' + format_sig9(s->median) + ',' + format_sig9(s->min) + ',' +
               format_sig9(s->max);
    };
    for (const auto& [variant, reports] :
         {std::pair<const char*, const std::vector<ConcentrationReport>*>{"whole_history", &whole},
          {"snapshot_mean", &means}}) {
        for (RoleFilter f : kFilters)
            for (const auto& m : metrics) {
                std::vector<std::optional<double>> st, rw;
                for (const auto& r : *reports)
                    if (r.role_filter == f) {
                        st.push_back(r.*(m.stake));
                        rw.push_back(r.*(m.reward));
                    }
                scsv << variant << ',' << to_string(f) << ',' << m.name << ',' << stats_cells(summarize(st)) << ','
                     << stats_cells(summarize(rw)) << '\n';
            }
    }
    write_file(dir / "concentration_summary.csv", scsv.str());
    return kExitOk;
}

// ---------------------------------------------------------------- attack

int cmd_attack(const RunConfig& cfg) {
    const Dataset d = load(cfg);
    require_nonempty(d);
    const auto dir = prepare_out(cfg);
    std::ostringstream csv;
    csv << "netuid,n_wallets,coalition_fraction\n";
    for (const auto& snap : collapse_history(d)) {
        const auto stakes = column(snap, Column::Stake);
        const double total = std::accumulate(stakes.begin(), stakes.end(), 0.0);
        csv << snap.netuid << ',' << stakes.size() << ','
            << (total > 0.0 ? format_sig9(coalition_fraction(stakes, cfg.threshold)) : std::string()) << '\n';
    }
    write_file(dir / "coalition.csv", csv.str());
    return kExitOk;
}

// ---------------------------------------------------------------- tempo

json outcome_json(const EmissionOutcome& o) {
    json miners = json::array();
    for (std::size_t j = 0; j < o.miner_ids.size(); ++j)
        miners.push_back({{"id", o.miner_ids[j]}, {"share", sig9(o.miner_shares[j])}, {"tao", sig9(o.miner_tao[j])}});
    json validators = json::array();
    for (std::size_t i = 0; i < o.validator_ids.size(); ++i)
        validators.push_back({{"id", o.validator_ids[i]},
                              {"share", sig9(o.validator_shares[i])},
                              {"tao", sig9(o.validator_tao[i])},
                              {"retained", sig9(o.validator_retained[i])}});
    json bonds = json::array();
    for (std::size_t i = 0; i < o.bonds.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < o.bonds.cols(); ++j) row.push_back(sig9(o.bonds(i, j)));
        bonds.push_back(row);
    }
    json delegators = json::object();
    for (const auto& [id, tao] : o.delegator_rewards) delegators[id] = sig9(tao);
    return {{"tempo_index", o.tempo_index},
            {"owner_amount", sig9(o.owner_amount)},
            {"miner_pool", sig9(o.miner_pool)},
            {"validator_pool", sig9(o.validator_pool)},
            {"no_ranking_mass", o.no_ranking_mass},
            {"no_bond_mass", o.no_bond_mass},
            {"miners", miners},
            {"validators", validators},
            {"bonds", bonds},
            {"delegator_rewards", delegators}};
}

int cmd_tempo(const RunConfig& cfg) {
    if (cfg.inputs.size() != 1) throw ValidationError("tempo takes exactly one --input weight-matrix JSON file");
    std::ifstream in(cfg.inputs.front(), std::ios::binary);
    if (!in) throw ValidationError("cannot open input '" + cfg.inputs.front() + "'");
    json spec;
    try {
        spec = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed tempo input: ") + e.what());
    }

    try {
        std::vector<ValidatorStake> validators;
        for (const auto& v : spec.at("validators")) validators.push_back({v.at("id"), v.at("stake")});
        std::vector<std::string> miners = spec.at("miners").get<std::vector<std::string>>();
        const auto rows = spec.at("weights").get<std::vector<std::vector<double>>>();
        Matrix w(rows.size(), miners.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != miners.size()) throw ValidationError("weights row length does not match miners");
            for (std::size_t j = 0; j < rows[i].size(); ++j) w(i, j) = rows[i][j];
        }
        const WeightMatrix wm(std::move(validators), std::move(miners), std::move(w));

        EmissionParams::Fields pf;
        if (spec.contains("params")) {
            const auto& p = spec["params"];
            pf.kappa = p.value("kappa", pf.kappa);
            pf.alpha = p.value("alpha", pf.alpha);
            pf.beta = p.value("beta", pf.beta);
            pf.commission_on_self_stake = p.value("commission_on_self_stake", pf.commission_on_self_stake);
        }
        const EmissionParams params(pf);

        std::vector<Delegation> delegations;
        if (spec.contains("delegations"))
            for (const auto& d : spec["delegations"])
                delegations.push_back({d.at("validator"), d.at("delegator"), d.at("amount"), d.value("take", 0.18)});

        std::optional<CompositeRouting> composite;
        if (spec.contains("composite")) {
            const auto& c = spec["composite"];
            composite = CompositeRouting{c.at("perf").get<std::vector<double>>(), c.value("lambda", 1.0)};
        }

        const Tao emission = spec.at("block_emission");
        const int tempos = spec.value("tempos", 1);
        if (tempos < 1) throw ValidationError("tempos must be >= 1");

        BondState bonds = BondState::zeros(wm.n_validators(), wm.n_miners());
        json outcomes = json::array();
        for (int t = 0; t < tempos; ++t) {
            const auto o = run_tempo(wm, bonds, params, emission, delegations, composite);
            bonds = BondState(o.bonds, o.tempo_index);
            outcomes.push_back(outcome_json(o));
        }
        write_json(prepare_out(cfg) / "outcome.json", json{{"outcomes", outcomes}});
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid tempo input: ") + e.what());
    }
    return kExitOk;
}

// ---------------------------------------------------------------- sweep

int cmd_sweep(const RunConfig& cfg) {
    const Dataset d = load(cfg);
    require_nonempty(d);
    const Scheme scheme = parse_scheme(cfg.scheme);
    const auto grid = cfg.grid.empty() ? default_grid(scheme) : parse_grid(cfg.grid);
    const auto snaps = collapse_history(d);
    const auto result = sweep_scheme(snaps, scheme, grid, {.xi0 = cfg.xi0, .threads = worker_count()});
    const auto dir = prepare_out(cfg);

    std::ostringstream csv;
    csv << "scheme,param,netuid,role,r_sr,r_pr,d_r_sr,d_r_pr\n";
    for (const auto& r : result.rows)
        csv << to_string(scheme) << ',' << format_sig9(r.param) << ',' << r.netuid << ',' << to_string(r.role) << ','
            << format_sig9(r.r_sr) << ',' << format_sig9(r.r_pr) << ',' << format_sig9(r.d_r_sr) << ','
            << format_sig9(r.d_r_pr) << '\n';
    write_file(dir / "sweep.csv", csv.str());

    json aggs = json::array();
    for (const auto& a : result.aggregates)
        aggs.push_back({{"param", sig9(a.param)},
                        {"role", std::string(to_string(a.role))},
                        {"n_subnets", a.n_subnets},
                        {"excluded", a.excluded},
                        {"mean_d_r_sr", sig9(a.mean_d_r_sr)},
                        {"median_d_r_sr", sig9(a.median_d_r_sr)},
                        {"mean_d_r_pr", sig9(a.mean_d_r_pr)},
                        {"median_d_r_pr", sig9(a.median_d_r_pr)}});
    json grid_json = json::array();
    for (double g : grid) grid_json.push_back(sig9(g));
    write_json(dir / "sweep_summary.json",
               json{{"scheme", std::string(to_string(scheme))}, {"grid", grid_json}, {"aggregates", aggs}});
    return kExitOk;
}

// ---------------------------------------------------------------- frontier

TransformSpec make_spec(TransformKind kind, double param) {
    switch (kind) {
    case TransformKind::Cap: return TransformSpec::cap(param);
    case TransformKind::Power: return TransformSpec::power(param);
    case TransformKind::Log: return TransformSpec::log();
    }
    return TransformSpec::identity();
}

TransformKind parse_kind(const std::string& s) {
    if (s == "cap") return TransformKind::Cap;
    if (s == "power") return TransformKind::Power;
    if (s == "log") return TransformKind::Log;
    throw ValidationError("unknown transform '" + s + "'");
}

int cmd_frontier(const RunConfig& cfg) {
    const Dataset d = load(cfg);
    require_nonempty(d);
    std::vector<TransformSpec> specs;
    if (cfg.transform.empty()) {
        specs = default_interventions();
    } else {
        const TransformKind kind = parse_kind(cfg.transform);
        specs.push_back(TransformSpec::identity());
        if (kind == TransformKind::Log) {
            specs.push_back(TransformSpec::log());
        } else {
            std::vector<double> values;
            if (!cfg.grid.empty()) values = parse_grid(cfg.grid);
            else if (cfg.param) values = {*cfg.param};
            else values = kind == TransformKind::Cap ? cap_percentile_grid() : std::vector<double>{0.9, 0.8, 0.7, 0.6, 0.5};
            for (double v : values) {
                const auto s = make_spec(kind, v);
                if (!s.is_identity()) specs.push_back(s);
            }
        }
    }
    const auto frontier = tradeoff_frontier(collapse_history(d), specs,
                                            {.threshold = cfg.threshold, .threads = worker_count()});
    const auto dir = prepare_out(cfg);

    std::ostringstream csv;
    csv << "label,kind,param,n_subnets,median_coalition_fraction,median_whale_penalty,mean_coalition_fraction,"
           "mean_whale_penalty,pareto\n";
    json points = json::array();
    for (const auto& p : frontier.points) {
        csv << p.label << ',' << to_string(p.spec.kind) << ',' << format_sig9(p.spec.param()) << ',' << p.n_subnets
            << ',' << format_sig9(p.median_coalition_fraction) << ',' << format_sig9(p.median_whale_penalty) << ','
            << format_sig9(p.mean_coalition_fraction) << ',' << format_sig9(p.mean_whale_penalty) << ','
            << (p.pareto ? "true" : "false") << '\n';
        points.push_back({{"label", p.label},
                          {"median_coalition_fraction", sig9(p.median_coalition_fraction)},
                          {"median_whale_penalty", sig9(p.median_whale_penalty)},
                          {"pareto", p.pareto}});
    }
    write_file(dir / "frontier.csv", csv.str());
    write_json(dir / "frontier.json",
               json{{"threshold", sig9(cfg.threshold)},
                    {"baseline_median_coalition_fraction", sig9(frontier.baseline_median_coalition_fraction)},
                    {"points", points}});
    return kExitOk;
}

// ---------------------------------------------------------------- robustness

int cmd_robustness(const RunConfig& cfg) {
    const Dataset d = load(cfg);
    require_nonempty(d);
    const TransformKind kind = parse_kind(cfg.transform.empty() ? "cap" : cfg.transform);
    const double param = cfg.param.value_or(kind == TransformKind::Cap ? 88.0 : 0.5);
    const TransformSpec spec = make_spec(kind, param);
    std::vector<Frequency> freqs{Frequency::Daily, Frequency::Weekly, Frequency::Monthly};
    if (!cfg.freq.empty()) freqs = {parse_frequency(cfg.freq)};
    const auto series = temporal_robustness(d, spec, freqs, {.threshold = cfg.threshold, .threads = worker_count()});
    const auto dir = prepare_out(cfg);

    std::ostringstream csv;
    csv << "freq,window_start,window_end,n_subnets,series,median,p10,p90\n";
    json out = json::object();
    for (const auto& s : series) {
        json windows = json::array();
        for (const auto& w : s.windows) {
            for (const auto& [name, band] : {std::pair{"transformed", w.transformed}, std::pair{"baseline", w.baseline}})
                csv << to_string(s.freq) << ',' << format_timestamp(w.window_start) << ','
                    << format_timestamp(w.window_end) << ',' << w.n_subnets << ',' << name << ','
                    << format_sig9(band.median) << ',' << format_sig9(band.p10) << ',' << format_sig9(band.p90) << '\n';
            windows.push_back({{"window_start", format_timestamp(w.window_start)},
                               {"n_subnets", w.n_subnets},
                               {"median", sig9(w.transformed.median)},
                               {"baseline_median", sig9(w.baseline.median)}});
        }
        out[std::string(to_string(s.freq))] = windows;
    }
    write_file(dir / "robustness.csv", csv.str());
    write_json(dir / "robustness.json", json{{"transform", spec.label()}, {"series", out}});
    return kExitOk;
}

// ---------------------------------------------------------------- synth

int cmd_synth(const RunConfig& cfg) {
    SynthConfig sc;
    sc.n_subnets = cfg.subnets;
    sc.wallets_per_subnet = cfg.wallets;
    sc.span_days = cfg.days;
    sc.start = parse_timestamp(cfg.start);
    sc.stake_perf_coupling = cfg.rho;
    sc.validator_fraction = cfg.validator_fraction;
    sc.seed = cfg.seed;
    sc.daily_emission = cfg.emission;
    sc.threads = worker_count();
    if (cfg.stake_law == "pareto") sc.stake_law = StakeLaw::pareto(cfg.stake_shape, cfg.stake_scale);
    else if (cfg.stake_law == "lognormal") sc.stake_law = StakeLaw::lognormal(std::log(cfg.stake_scale), cfg.stake_shape);
    else if (cfg.stake_law == "uniform") sc.stake_law = StakeLaw::uniform(0.5 * cfg.stake_scale, 1.5 * cfg.stake_scale);
    else throw ValidationError("unknown stake law '" + cfg.stake_law + "'");
    if (cfg.reward_rule == "stake_proportional") sc.reward_rule = RewardRule::StakeProportional;
    else if (cfg.reward_rule == "yuma_replay") sc.reward_rule = RewardRule::YumaReplay;
    else throw ValidationError("unknown reward rule '" + cfg.reward_rule + "'");

    const Format format = cfg.format.empty() ? Format::Jsonl : parse_format(cfg.format);
    const Dataset d = generate(sc);
    std::ostringstream text;
    write_events(text, d, format);
    write_file(prepare_out(cfg) / (format == Format::Csv ? "synth.csv" : "synth.jsonl"), text.str());
    return kExitOk;
}

void add_input_flags(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--input", cfg.inputs, "Event files (JSON Lines or CSV)")->required();
    sub->add_option("--format", cfg.format, "Input format; inferred from the extension when omitted")
        ->check(CLI::IsMember({"jsonl", "csv"}));
    sub->add_option("--cutoff", cfg.cutoff, "Exclude events at or after this ISO-8601 instant");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Yuma Consensus emission simulator and decentralization analysis", "yumalab"};
    app.require_subcommand(1);
    app.fallthrough();

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--out", cfg.out_dir, "Output directory");
        sub->add_option("--threshold", cfg.threshold, "Majority threshold (fraction of stake)")
            ->check(CLI::Range(1e-12, 1.0));
        sub->add_option("--seed", cfg.seed, "Random seed");
    };

    auto* ingest = app.add_subcommand("ingest", "Validate events and write resampled snapshots");
    add_input_flags(ingest, cfg);
    ingest->add_option("--freq", cfg.freq)->check(CLI::IsMember({"daily", "weekly", "monthly"}));
    common(ingest);

    auto* metrics = app.add_subcommand("metrics", "Gini, HHI and top-1% share per subnet and role");
    add_input_flags(metrics, cfg);
    metrics->add_option("--freq", cfg.freq, "Window for the per-snapshot mean variant")
        ->check(CLI::IsMember({"daily", "weekly", "monthly"}));
    common(metrics);

    auto* attack = app.add_subcommand("attack", "Wallet fraction needed for majority stake per subnet");
    add_input_flags(attack, cfg);
    common(attack);

    auto* tempo = app.add_subcommand("tempo", "Run the emission pipeline on a weight-matrix JSON file");
    tempo->add_option("--input", cfg.inputs, "Weight-matrix JSON")->required();
    common(tempo);

    auto* sweep = app.add_subcommand("sweep", "Correlation shifts under a reward scheme");
    add_input_flags(sweep, cfg);
    sweep->add_option("--scheme", cfg.scheme)
        ->check(CLI::IsMember({"split", "composite", "bonus", "cap", "power", "log"}));
    sweep->add_option("--grid", cfg.grid, "Comma-separated parameter values");
    sweep->add_option("--xi0", cfg.xi0, "Base validator share for the split scheme");
    common(sweep);

    auto* frontier = app.add_subcommand("frontier", "Security vs whale-penalty trade-off of stake transforms");
    add_input_flags(frontier, cfg);
    frontier->add_option("--transform", cfg.transform)->check(CLI::IsMember({"cap", "power", "log"}));
    frontier->add_option("--grid", cfg.grid, "Comma-separated parameter values");
    frontier->add_option("--param", cfg.param, "Single transform parameter");
    common(frontier);

    auto* robustness = app.add_subcommand("robustness", "Coalition fraction over time under a stake transform");
    add_input_flags(robustness, cfg);
    robustness->add_option("--transform", cfg.transform)->check(CLI::IsMember({"cap", "power", "log"}));
    robustness->add_option("--param", cfg.param, "Transform parameter (default cap percentile 88)");
    robustness->add_option("--freq", cfg.freq, "Restrict to one frequency")
        ->check(CLI::IsMember({"daily", "weekly", "monthly"}));
    common(robustness);

    auto* synth = app.add_subcommand("synth", "Generate a synthetic event dataset");
    synth->add_option("--format", cfg.format)->check(CLI::IsMember({"jsonl", "csv"}));
    synth->add_option("--subnets", cfg.subnets)->check(CLI::PositiveNumber);
    synth->add_option("--wallets", cfg.wallets, "Wallets per subnet")->check(CLI::Range(2u, 1u << 24));
    synth->add_option("--days", cfg.days)->check(CLI::PositiveNumber);
    synth->add_option("--start", cfg.start, "First event day (ISO-8601)");
    synth->add_option("--rho", cfg.rho, "Stake-perf rank coupling in [-1,1]");
    synth->add_option("--validator-fraction", cfg.validator_fraction);
    synth->add_option("--stake-law", cfg.stake_law)->check(CLI::IsMember({"pareto", "lognormal", "uniform"}));
    synth->add_option("--stake-shape", cfg.stake_shape, "Pareto tail index or lognormal sigma");
    synth->add_option("--stake-scale", cfg.stake_scale, "Pareto minimum, lognormal median or uniform midpoint");
    synth->add_option("--reward-rule", cfg.reward_rule)
        ->check(CLI::IsMember({"stake_proportional", "yuma_replay"}));
    synth->add_option("--emission", cfg.emission, "Emission per subnet per day");
    common(synth);

    if (!args.empty() && !args.front().starts_with('-')) {
        const auto subs = app.get_subcommands([](CLI::App*) { return true; });
        const bool known = std::any_of(subs.begin(), subs.end(), [&](CLI::App* s) { return s->get_name() == args.front(); });
        if (!known) {
            err << "error: unknown subcommand '" << args.front() << "'\n\n" << app.help();
            return kExitUsage;
        }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(cfg);
        if (metrics->parsed()) return cmd_metrics(cfg);
        if (attack->parsed()) return cmd_attack(cfg);
        if (tempo->parsed()) return cmd_tempo(cfg);
        if (sweep->parsed()) return cmd_sweep(cfg);
        if (frontier->parsed()) return cmd_frontier(cfg);
        if (robustness->parsed()) return cmd_robustness(cfg);
        if (synth->parsed()) return cmd_synth(cfg);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    err << app.help();
    return kExitUsage;
}

} // namespace yumalab::cli
