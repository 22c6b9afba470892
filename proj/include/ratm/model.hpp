#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ratm/exceptions.hpp"

namespace ratm {

using state_id = std::int32_t;
using action_id = std::int32_t;

/// Tolerance for probability-sum checks throughout the library.
inline constexpr double prob_eps = 1e-9;

/// A control action paired with a measurement flag.
struct action_pair {
    action_id control = 0;
    bool measure = false;

    friend bool operator==(const action_pair&, const action_pair&) = default;
};

/// Closed probability interval, 0 <= lo <= hi <= 1.
struct prob_interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// One successor entry of an uncertain transition row.
struct row_entry {
    state_id succ = 0;
    double lo = 0.0;
    double hi = 0.0;
};

/// Read-only view over one (state, action) row. Successors are distinct and
/// sorted by index. `lo == nullptr` means every lower bound is zero.
struct row_view {
    std::span<const state_id> succ;
    const double* lo = nullptr;
    std::span<const double> hi;

    std::size_t size() const { return succ.size(); }
    double lo_at(std::size_t i) const { return lo != nullptr ? lo[i] : 0.0; }
};

class ram_mdp;
class point_model;

/// Incremental builder for ram_mdp. Rows must be appended in increasing
/// (state, action) order and every pair must receive exactly one row.
class ram_mdp_builder {
public:
    ram_mdp_builder(std::int32_t num_states, std::int32_t num_actions);

    /// Entries need not be sorted; duplicates are rejected.
    void add_row(state_id s, action_id a, std::vector<row_entry> entries, double reward);
    void set_measure_cost(double c) { measure_cost_ = c; }
    void set_discount(double g) { discount_ = g; }
    void set_initial_state(state_id s) { initial_ = s; }
    void add_terminal(state_id s);

    ram_mdp build() &&;

private:
    std::int32_t num_states_, num_actions_;
    std::int64_t next_flat_ = 0;
    std::vector<std::int64_t> offsets_;
    std::vector<state_id> succ_;
    std::vector<double> lo_;
    std::vector<double> hi_;
    std::vector<double> reward_;
    std::vector<std::uint8_t> terminal_mask_;
    double measure_cost_ = 0.0;
    double discount_ = 1.0;
    state_id initial_ = 0;
    bool any_lo_ = false;

    friend class ram_mdp;
};

/**
 * Sparse interval-uncertain MDP with a factored action space of control
 * actions plus an optional, costly, exact measurement. Immutable once built
 * and safe to share across threads.
 */
class ram_mdp {
public:
    ram_mdp() = default;

    std::int32_t num_states() const { return num_states_; }
    std::int32_t num_actions() const { return num_actions_; }
    double measure_cost() const { return measure_cost_; }
    double discount() const { return discount_; }
    state_id initial_state() const { return initial_; }

    bool is_terminal(state_id s) const { return terminal_mask_[static_cast<std::size_t>(s)] != 0; }
    const std::vector<state_id>& terminal_states() const { return terminals_; }

    row_view row(state_id s, action_id a) const {
        const auto f = flat(s, a);
        const auto b = offsets_[static_cast<std::size_t>(f)];
        const auto e = offsets_[static_cast<std::size_t>(f) + 1];
        const auto n = static_cast<std::size_t>(e - b);
        return row_view{
            std::span<const state_id>(succ_.data() + b, n),
            lo_.empty() ? nullptr : lo_.data() + b,
            std::span<const double>(hi_.data() + b, n),
        };
    }

    double reward(state_id s, action_id a) const {
        return reward_[static_cast<std::size_t>(flat(s, a))];
    }

    std::int64_t num_entries() const { return static_cast<std::int64_t>(succ_.size()); }

    friend bool operator==(const ram_mdp& a, const ram_mdp& b);

private:
    std::int64_t flat(state_id s, action_id a) const {
        return static_cast<std::int64_t>(s) * num_actions_ + a;
    }

    std::int32_t num_states_ = 0, num_actions_ = 0;
    std::vector<std::int64_t> offsets_;
    std::vector<state_id> succ_;
    std::vector<double> lo_; // empty means all-zero lower bounds
    std::vector<double> hi_;
    std::vector<double> reward_;
    std::vector<std::uint8_t> terminal_mask_;
    std::vector<state_id> terminals_;
    double measure_cost_ = 0.0;
    double discount_ = 1.0;
    state_id initial_ = 0;

    friend class ram_mdp_builder;
    friend class point_model;
};

/// View over one row of a point (single transition function) model.
struct point_row_view {
    std::span<const state_id> succ;
    std::span<const double> prob;

    std::size_t size() const { return succ.size(); }
};

class point_model_builder {
public:
    point_model_builder(std::int32_t num_states, std::int32_t num_actions);

    void add_row(state_id s, action_id a, std::vector<std::pair<state_id, double>> entries,
                 double reward);
    void set_measure_cost(double c) { measure_cost_ = c; }
    void set_discount(double g) { discount_ = g; }
    void set_initial_state(state_id s) { initial_ = s; }
    void add_terminal(state_id s);

    point_model build() &&;

private:
    std::int32_t num_states_, num_actions_;
    std::int64_t next_flat_ = 0;
    std::vector<std::int64_t> offsets_;
    std::vector<state_id> succ_;
    std::vector<double> prob_;
    std::vector<double> reward_;
    std::vector<std::uint8_t> terminal_mask_;
    double measure_cost_ = 0.0;
    double discount_ = 1.0;
    state_id initial_ = 0;

    friend class point_model;
};

/**
 * A single transition function over the same state and action space as a
 * ram_mdp, carrying its own copy of rewards, discount and measuring cost.
 */
class point_model {
public:
    point_model() = default;

    std::int32_t num_states() const { return num_states_; }
    std::int32_t num_actions() const { return num_actions_; }
    double measure_cost() const { return measure_cost_; }
    double discount() const { return discount_; }
    state_id initial_state() const { return initial_; }
    bool is_terminal(state_id s) const { return terminal_mask_[static_cast<std::size_t>(s)] != 0; }
    const std::vector<state_id>& terminal_states() const { return terminals_; }

    point_row_view row(state_id s, action_id a) const {
        const auto f = flat(s, a);
        const auto b = offsets_[static_cast<std::size_t>(f)];
        const auto e = offsets_[static_cast<std::size_t>(f) + 1];
        const auto n = static_cast<std::size_t>(e - b);
        return point_row_view{
            std::span<const state_id>(succ_.data() + b, n),
            std::span<const double>(prob_.data() + b, n),
        };
    }

    double reward(state_id s, action_id a) const {
        return reward_[static_cast<std::size_t>(flat(s, a))];
    }

    /// Degenerate interval model with every row as [p, p].
    ram_mdp as_degenerate_ram_mdp() const;

private:
    std::int64_t flat(state_id s, action_id a) const {
        return static_cast<std::int64_t>(s) * num_actions_ + a;
    }

    std::int32_t num_states_ = 0, num_actions_ = 0;
    std::vector<std::int64_t> offsets_;
    std::vector<state_id> succ_;
    std::vector<double> prob_;
    std::vector<double> reward_;
    std::vector<std::uint8_t> terminal_mask_;
    std::vector<state_id> terminals_;
    double measure_cost_ = 0.0;
    double discount_ = 1.0;
    state_id initial_ = 0;

    friend class point_model_builder;
};

/**
 * Sparse probability distribution over states. Entries are sorted by state,
 * strictly positive, and sum to 1 within prob_eps.
 */
struct belief {
    std::vector<std::pair<state_id, double>> entries;

    static belief delta(state_id s) { return belief{{{s, 1.0}}}; }

    /// Builds from possibly unsorted entries: merges duplicates, prunes
    /// non-positive mass and rescales. Throws contract_error if the raw sum
    /// deviates from 1 by more than prob_eps.
    static belief from_entries(std::vector<std::pair<state_id, double>> raw);

    std::size_t size() const { return entries.size(); }
    bool is_delta() const { return entries.size() == 1; }
    double sum() const;
    double entropy() const;
    double at(state_id s) const; // 0 if absent
};

struct validation_issue {
    state_id s = -1; // -1 for model-level issues
    action_id a = -1;
    std::string message;
};

struct validation_report {
    std::vector<validation_issue> issues;
    bool ok() const { return issues.empty(); }
};

/// Checks every structural invariant; violations are data, not errors.
validation_report validate_model(const ram_mdp& m);

/**
 * Confidence-level uncertainty: every base transition probability p becomes
 * the interval [0, min(p / alpha, 1)]. Terminal self-loops stay [1, 1] so the
 * result remains a valid ram_mdp. Throws std::domain_error unless alpha is
 * in (0, 1].
 */
ram_mdp intervals_from_confidence(const point_model& base, double alpha);

struct average_model_result {
    point_model model;
    bool renormalized = false; // true if any row's midpoints had to be rescaled
};

/// Midpoint of every interval, rescaled uniformly per row when the midpoints
/// do not already sum to 1.
average_model_result average_point_model(const ram_mdp& m);

/// R(s, a) - c * [m = 1].
double scalarized_reward(const ram_mdp& m, state_id s, action_pair ap);

} // namespace ratm
