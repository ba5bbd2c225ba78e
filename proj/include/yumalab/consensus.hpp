#pragma once

// Yuma Consensus emission pipeline for one subnet and one tempo.
//
// Pipeline: split the block emission 18/41/41, clip each miner's weights at the
// highest value backed by a kappa fraction of validator stake, rank miners by
// stake-weighted clipped weight, update EMA bonds from penalty-adjusted weights,
// then pay validators by bond-weighted miner share and delegators pro rata.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <optional>

#include "errors.hpp"
#include "interventions.hpp"
#include "model.hpp"

namespace yumalab {

struct EmissionSplit {
    Tao owner = 0.0;
    Tao miner_pool = 0.0;
    Tao validator_pool = 0.0;
};

inline EmissionSplit split_block_emission(Tao total, const EmissionParams& params) {
    if (!(total >= 0.0) || !std::isfinite(total)) throw ValidationError("block emission must be finite and >= 0");
    return {params.owner_share() * total, params.miner_share() * total, params.validator_share() * total};
}

struct ClipResult {
    std::vector<double> benchmarks;  // per miner
    Matrix clipped;                  // min(W_ij, benchmark_j)
};

/// Benchmark for miner j is the largest observed weight w such that validators with
/// W_ij >= w hold at least kappa of total stake. Zero-stake validators still supply
/// candidate values.
inline ClipResult consensus_clip(const WeightMatrix& wm, double kappa) {
    if (!(kappa > 0.0 && kappa <= 1.0)) throw ValidationError("kappa must lie in (0,1]");
    const auto& W = wm.weights();
    const auto stakes = wm.stakes();
    const double total = std::accumulate(stakes.begin(), stakes.end(), 0.0);
    if (!(total > 0.0)) throw ValidationError("consensus requires at least one validator with positive stake");
    const double needed = kappa * total;

    ClipResult out{std::vector<double>(wm.n_miners(), 0.0), Matrix(W.rows(), W.cols())};
    std::vector<std::pair<double, double>> column(W.rows());  // (weight, stake)
    for (std::size_t j = 0; j < W.cols(); ++j) {
        for (std::size_t i = 0; i < W.rows(); ++i) column[i] = {W(i, j), stakes[i]};
        std::sort(column.begin(), column.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

        double benchmark = column.empty() ? 0.0 : column.back().first;  // lowest candidate has full backing
        double backing = 0.0;
        for (std::size_t k = 0; k < column.size();) {
            const double w = column[k].first;
            for (; k < column.size() && column[k].first == w; ++k) backing += column[k].second;
            if (backing >= needed) {
                benchmark = w;
                break;
            }
        }
        out.benchmarks[j] = benchmark;
        for (std::size_t i = 0; i < W.rows(); ++i) out.clipped(i, j) = std::min(W(i, j), benchmark);
    }
    return out;
}

struct MinerShares {
    std::vector<double> ranks;   // R_j
    std::vector<double> shares;  // M_j
    bool no_ranking_mass = false;
};

inline MinerShares miner_emission_shares(const Matrix& clipped, std::span<const double> stakes) {
    if (clipped.rows() != stakes.size()) throw ValidationError("stake vector does not match clipped weights");
    MinerShares out{std::vector<double>(clipped.cols(), 0.0), std::vector<double>(clipped.cols(), 0.0), false};
    for (std::size_t i = 0; i < clipped.rows(); ++i) {
        if (stakes[i] < 0.0) throw ValidationError("stakes must be nonnegative");
        for (std::size_t j = 0; j < clipped.cols(); ++j) out.ranks[j] += stakes[i] * clipped(i, j);
    }
    const double mass = std::accumulate(out.ranks.begin(), out.ranks.end(), 0.0);
    if (!(mass > 0.0)) {
        out.no_ranking_mass = true;
        return out;
    }
    for (std::size_t j = 0; j < out.ranks.size(); ++j) out.shares[j] = out.ranks[j] / mass;
    return out;
}

/// Running bonds B_ij(t), validators by rows.
class BondState {
public:
    BondState() = default;
    BondState(Matrix bonds, std::uint64_t tempo_index) : bonds_(std::move(bonds)), tempo_index_(tempo_index) {
        for (double b : bonds_.data())
            if (!(b >= 0.0 && b <= 1.0)) throw ValidationError("bond entries must lie in [0,1]");
    }

    /// B(0) = 0.
    static BondState zeros(std::size_t n_validators, std::size_t n_miners) {
        return BondState(Matrix(n_validators, n_miners, 0.0), 0);
    }

    const Matrix& bonds() const noexcept { return bonds_; }
    std::uint64_t tempo_index() const noexcept { return tempo_index_; }

private:
    Matrix bonds_;
    std::uint64_t tempo_index_ = 0;
};

/// W~_ij = (1 - beta) W_ij + beta Wbar_ij.
inline Matrix bond_weights(const Matrix& weights, const Matrix& clipped, double beta) {
    if (weights.rows() != clipped.rows() || weights.cols() != clipped.cols())
        throw ValidationError("clipped matrix does not match weights");
    if (!(beta >= 0.0 && beta <= 1.0)) throw ValidationError("beta must lie in [0,1]");
    Matrix out(weights.rows(), weights.cols());
    for (std::size_t i = 0; i < weights.rows(); ++i)
        for (std::size_t j = 0; j < weights.cols(); ++j)
            out(i, j) = (1.0 - beta) * weights(i, j) + beta * clipped(i, j);
    return out;
}

/// dB_ij = S_i W~_ij / sum_k S_k W~_kj; columns without mass stay zero.
inline Matrix instant_bonds(const Matrix& bond_w, std::span<const double> stakes) {
    if (bond_w.rows() != stakes.size()) throw ValidationError("stake vector does not match bond weights");
    Matrix out(bond_w.rows(), bond_w.cols());
    for (std::size_t j = 0; j < bond_w.cols(); ++j) {
        double denom = 0.0;
        for (std::size_t i = 0; i < bond_w.rows(); ++i) denom += stakes[i] * bond_w(i, j);
        if (!(denom > 0.0)) continue;
        for (std::size_t i = 0; i < bond_w.rows(); ++i) out(i, j) = stakes[i] * bond_w(i, j) / denom;
    }
    return out;
}

inline BondState validator_bonds(const WeightMatrix& wm, const Matrix& clipped, double beta, double alpha,
                                 const BondState& prev) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in [0,1]");
    const Matrix& last = prev.bonds();
    if (last.rows() != wm.n_validators() || last.cols() != wm.n_miners())
        throw ValidationError("previous bond state does not match weight matrix");
    const auto stakes = wm.stakes();
    const Matrix delta = instant_bonds(bond_weights(wm.weights(), clipped, beta), stakes);
    Matrix next(last.rows(), last.cols());
    for (std::size_t i = 0; i < last.rows(); ++i)
        for (std::size_t j = 0; j < last.cols(); ++j)
            next(i, j) = std::min(1.0, alpha * delta(i, j) + (1.0 - alpha) * last(i, j));
    return BondState(std::move(next), prev.tempo_index() + 1);
}

/// V_i = sum_j B_ij M_j.
inline std::vector<double> validator_emission_shares(const BondState& bonds, std::span<const double> miner_shares) {
    const Matrix& B = bonds.bonds();
    if (B.cols() != miner_shares.size()) throw ValidationError("miner shares do not match bond columns");
    std::vector<double> out(B.rows(), 0.0);
    for (std::size_t i = 0; i < B.rows(); ++i)
        for (std::size_t j = 0; j < B.cols(); ++j) out[i] += B(i, j) * miner_shares[j];
    return out;
}

struct Delegation {
    std::string validator_id;
    std::string delegator_id;
    Tao amount = 0.0;  // S_d
    double take = 0.0; // T_i
};

/// R_d = (1 - T_i)(S_d / S_i) D_i for each delegation to one validator. Amounts for a
/// delegator listed more than once are summed. An entry whose delegator is the
/// validator itself is self-stake and pays no take unless `commission_on_self_stake`.
inline std::map<std::string, Tao> delegator_rewards(std::span<const Delegation> delegations, Tao validator_reward,
                                                    Tao validator_stake, bool commission_on_self_stake = false) {
    if (!(validator_stake > 0.0)) throw ValidationError("validator stake must be positive to pay delegators");
    if (!(validator_reward >= 0.0)) throw ValidationError("validator reward must be nonnegative");
    double delegated = 0.0;
    for (const auto& d : delegations) {
        detail::require_finite_nonneg(d.amount, "delegated amount");
        detail::require_unit(d.take, "take");
        delegated += d.amount;
    }
    if (delegated > validator_stake * (1.0 + 1e-12))
        throw ValidationError("delegations exceed the validator's total stake");

    std::map<std::string, Tao> out;
    for (const auto& d : delegations) {
        const double take = (d.delegator_id == d.validator_id && !commission_on_self_stake) ? 0.0 : d.take;
        out[d.delegator_id] += (1.0 - take) * (d.amount / validator_stake) * validator_reward;
    }
    return out;
}

/// Replaces the miner shares with composite ranks lambda * minmax(R) + (1 - lambda) perf,
/// for simulating the composite scheme inside consensus. Bonds are unaffected; validator
/// shares use the replaced miner shares.
struct CompositeRouting {
    std::vector<double> perf;  // per miner, in [0,1]
    double lambda = 1.0;
};

inline MinerShares route_composite(const MinerShares& base, const CompositeRouting& routing) {
    if (routing.perf.size() != base.ranks.size()) throw ValidationError("composite perf vector does not match miners");
    for (double p : routing.perf) detail::require_unit(p, "composite perf");
    MinerShares out;
    out.ranks = composite_ranks(min_max_normalize(base.ranks), routing.perf, routing.lambda);
    out.shares.assign(out.ranks.size(), 0.0);
    const double mass = std::accumulate(out.ranks.begin(), out.ranks.end(), 0.0);
    out.no_ranking_mass = !(mass > 0.0);
    if (!out.no_ranking_mass)
        for (std::size_t j = 0; j < out.ranks.size(); ++j) out.shares[j] = out.ranks[j] / mass;
    return out;
}

/// One full tempo. Validator TAO is validator_pool * V_i / sum_k V_k; delegators are
/// paid out of it and the validator retains the remainder (commission plus the
/// self-stake portion).
inline EmissionOutcome run_tempo(const WeightMatrix& wm, const BondState& prev, const EmissionParams& params,
                                 Tao block_emission, std::span<const Delegation> delegations = {},
                                 const std::optional<CompositeRouting>& composite = std::nullopt) {
    const EmissionSplit split = split_block_emission(block_emission, params);
    const ClipResult clip = consensus_clip(wm, params.kappa());
    const auto stakes = wm.stakes();
    MinerShares miners = miner_emission_shares(clip.clipped, stakes);
    if (composite) miners = route_composite(miners, *composite);
    BondState bonds = validator_bonds(wm, clip.clipped, params.beta(), params.alpha(), prev);
    const auto vshares = validator_emission_shares(bonds, miners.shares);

    EmissionOutcome out;
    out.owner_amount = split.owner;
    out.miner_pool = split.miner_pool;
    out.validator_pool = split.validator_pool;
    out.miner_ids = wm.miners();
    out.miner_shares = miners.shares;
    out.no_ranking_mass = miners.no_ranking_mass;
    out.miner_tao.resize(wm.n_miners());
    for (std::size_t j = 0; j < wm.n_miners(); ++j) out.miner_tao[j] = split.miner_pool * miners.shares[j];

    const double vmass = std::accumulate(vshares.begin(), vshares.end(), 0.0);
    out.no_bond_mass = !(vmass > 0.0);
    out.validator_shares = vshares;
    out.validator_tao.assign(wm.n_validators(), 0.0);
    for (std::size_t i = 0; i < wm.n_validators(); ++i) {
        out.validator_ids.push_back(wm.validators()[i].id);
        if (!out.no_bond_mass) out.validator_tao[i] = split.validator_pool * (vshares[i] / vmass);
    }

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < wm.n_validators(); ++i)
        if (!index.emplace(wm.validators()[i].id, i).second)
            throw ValidationError("duplicate validator id '" + wm.validators()[i].id + "'");
    std::vector<std::vector<Delegation>> per_validator(wm.n_validators());
    for (const auto& d : delegations) {
        const auto it = index.find(d.validator_id);
        if (it == index.end()) throw ValidationError("delegation to unknown validator '" + d.validator_id + "'");
        per_validator[it->second].push_back(d);
    }

    out.validator_retained = out.validator_tao;
    for (std::size_t i = 0; i < wm.n_validators(); ++i) {
        if (per_validator[i].empty()) continue;
        const auto paid = delegator_rewards(per_validator[i], out.validator_tao[i], stakes[i], params.commission_on_self_stake());
        for (const auto& [who, amount] : paid) {
            out.delegator_rewards[who] += amount;
            out.validator_retained[i] -= amount;
        }
        out.validator_retained[i] = std::max(0.0, out.validator_retained[i]);
    }

    out.bonds = bonds.bonds();
    out.tempo_index = bonds.tempo_index();
    return out;
}

} // namespace yumalab
