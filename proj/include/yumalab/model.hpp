#pragma once

// Shared domain types. Constructors validate; objects are immutable afterwards.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "time.hpp"

namespace yumalab {

/// TAO amount. Doubles carry ~15-16 significant digits.
using Tao = double;
using Netuid = std::uint32_t;

enum class Role { Miner, Validator };

inline std::string_view to_string(Role r) { return r == Role::Miner ? "miner" : "validator"; }

inline Role parse_role(std::string_view s) {
    if (s == "miner") return Role::Miner;
    if (s == "validator") return Role::Validator;
    throw ParseError(0, "unknown role '" + std::string(s) + "'");
}

namespace detail {

inline void require_finite_nonneg(double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0) throw ValidationError(std::string(what) + " must be finite and >= 0");
}

inline void require_unit(double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(std::string(what) + " must lie in [0,1]");
}

} // namespace detail

/// One wallet-day observation.
class SnapshotEvent {
public:
    struct Fields {
        Timestamp timestamp{};
        std::uint64_t block_number = 0;
        Netuid netuid = 0;
        std::string wallet;
        Role role = Role::Miner;
        Tao stake = 0.0;
        Tao reward = 0.0;
        std::optional<double> trust;
        std::optional<double> validator_trust;
    };

    explicit SnapshotEvent(Fields f) : f_(std::move(f)) {
        detail::require_finite_nonneg(f_.stake, "stake");
        detail::require_finite_nonneg(f_.reward, "reward");
        if (f_.trust) {
            if (f_.role != Role::Miner) throw ValidationError("trust is only defined for miners");
            detail::require_unit(*f_.trust, "trust");
        }
        if (f_.validator_trust) {
            if (f_.role != Role::Validator) throw ValidationError("validator_trust is only defined for validators");
            detail::require_unit(*f_.validator_trust, "validator_trust");
        }
    }

    Timestamp timestamp() const noexcept { return f_.timestamp; }
    std::uint64_t block_number() const noexcept { return f_.block_number; }
    Netuid netuid() const noexcept { return f_.netuid; }
    const std::string& wallet() const noexcept { return f_.wallet; }
    Role role() const noexcept { return f_.role; }
    Tao stake() const noexcept { return f_.stake; }
    Tao reward() const noexcept { return f_.reward; }
    const std::optional<double>& trust() const noexcept { return f_.trust; }
    const std::optional<double>& validator_trust() const noexcept { return f_.validator_trust; }

    /// Role-appropriate quality score; an absent score reads as 0.
    double perf() const noexcept {
        const auto& score = f_.role == Role::Miner ? f_.trust : f_.validator_trust;
        return score.value_or(0.0);
    }

    const Fields& fields() const noexcept { return f_; }

    friend bool operator==(const SnapshotEvent& a, const SnapshotEvent& b) {
        const auto& x = a.f_;
        const auto& y = b.f_;
        return x.timestamp == y.timestamp && x.block_number == y.block_number && x.netuid == y.netuid &&
               x.wallet == y.wallet && x.role == y.role && x.stake == y.stake && x.reward == y.reward &&
               x.trust == y.trust && x.validator_trust == y.validator_trust;
    }

private:
    Fields f_;
};

struct SnapshotEntry {
    std::string wallet;
    Role role = Role::Miner;
    Tao stake = 0.0;
    Tao reward = 0.0;
    double perf = 0.0;

    friend bool operator==(const SnapshotEntry&, const SnapshotEntry&) = default;
};

/// All wallets of one subnet over one window `[window_start, window_end)`.
struct SubnetSnapshot {
    Netuid netuid = 0;
    Timestamp window_start{};
    Timestamp window_end{};
    std::vector<SnapshotEntry> entries;

    friend bool operator==(const SubnetSnapshot&, const SubnetSnapshot&) = default;
};

enum class Column { Stake, Reward, Perf };

/// Extracts one column, optionally restricted to one role, in entry order.
inline std::vector<double> column(const SubnetSnapshot& snap, Column c, std::optional<Role> role = std::nullopt) {
    std::vector<double> out;
    out.reserve(snap.entries.size());
    for (const auto& e : snap.entries) {
        if (role && e.role != *role) continue;
        out.push_back(c == Column::Stake ? e.stake : c == Column::Reward ? e.reward : e.perf);
    }
    return out;
}

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<double>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_) throw ValidationError("ragged matrix initializer");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    const std::vector<double>& data() const noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct ValidatorStake {
    std::string id;
    Tao stake = 0.0;
};

/// Validator -> miner raw weights with validator stakes.
class WeightMatrix {
public:
    WeightMatrix(std::vector<ValidatorStake> validators, std::vector<std::string> miners, Matrix weights)
        : validators_(std::move(validators)), miners_(std::move(miners)), weights_(std::move(weights)) {
        if (weights_.rows() != validators_.size() || weights_.cols() != miners_.size())
            throw ValidationError("weight matrix dimensions do not match validator/miner lists");
        for (const auto& v : validators_) detail::require_finite_nonneg(v.stake, "validator stake");
        for (double w : weights_.data()) detail::require_unit(w, "weight");
    }

    const std::vector<ValidatorStake>& validators() const noexcept { return validators_; }
    const std::vector<std::string>& miners() const noexcept { return miners_; }
    const Matrix& weights() const noexcept { return weights_; }
    std::size_t n_validators() const noexcept { return validators_.size(); }
    std::size_t n_miners() const noexcept { return miners_.size(); }

    std::vector<Tao> stakes() const {
        std::vector<Tao> s;
        s.reserve(validators_.size());
        for (const auto& v : validators_) s.push_back(v.stake);
        return s;
    }

private:
    std::vector<ValidatorStake> validators_;
    std::vector<std::string> miners_;
    Matrix weights_;
};

/// Emission-pipeline parameters. Shares must sum to 1.
class EmissionParams {
public:
    struct Fields {
        double kappa = 0.5;
        double alpha = 0.1;
        double beta = 0.5;
        double owner_share = 0.18;
        double miner_share = 0.41;
        double validator_share = 0.41;
        std::uint32_t tempo_blocks = 360;
        bool commission_on_self_stake = false;  // charge the take on a validator's own delegation entry
    };

    EmissionParams() : EmissionParams(Fields{}) {}
    explicit EmissionParams(Fields f) : f_(f) {
        if (!(f_.kappa > 0.0 && f_.kappa <= 1.0)) throw ValidationError("kappa must lie in (0,1]");
        detail::require_unit(f_.alpha, "alpha");
        detail::require_unit(f_.beta, "beta");
        detail::require_unit(f_.owner_share, "owner_share");
        detail::require_unit(f_.miner_share, "miner_share");
        detail::require_unit(f_.validator_share, "validator_share");
        if (f_.owner_share + f_.miner_share + f_.validator_share != 1.0)
            throw ValidationError("owner, miner and validator shares must sum to 1");
        if (f_.tempo_blocks == 0) throw ValidationError("tempo_blocks must be positive");
    }

    double kappa() const noexcept { return f_.kappa; }
    double alpha() const noexcept { return f_.alpha; }
    double beta() const noexcept { return f_.beta; }
    double owner_share() const noexcept { return f_.owner_share; }
    double miner_share() const noexcept { return f_.miner_share; }
    double validator_share() const noexcept { return f_.validator_share; }
    std::uint32_t tempo_blocks() const noexcept { return f_.tempo_blocks; }
    bool commission_on_self_stake() const noexcept { return f_.commission_on_self_stake; }

private:
    Fields f_;
};

/// Result of one tempo of the emission pipeline. Vectors follow WeightMatrix order.
struct EmissionOutcome {
    Tao owner_amount = 0.0;
    Tao miner_pool = 0.0;
    Tao validator_pool = 0.0;
    std::vector<std::string> miner_ids;
    std::vector<double> miner_shares;  // M_j, sums to 1 unless no_ranking_mass
    std::vector<Tao> miner_tao;
    std::vector<std::string> validator_ids;
    std::vector<double> validator_shares;  // V_i, unnormalized
    std::vector<Tao> validator_tao;        // before delegation payouts
    std::vector<Tao> validator_retained;   // after delegation payouts
    Matrix bonds;
    std::uint64_t tempo_index = 0;
    std::map<std::string, Tao> delegator_rewards;
    bool no_ranking_mass = false;
    bool no_bond_mass = false;
};

} // namespace yumalab
