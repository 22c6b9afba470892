#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "ratm/model.hpp"

namespace ratm {

/**
 * A transition distribution chosen from an uncertain row, aligned with the
 * row's successor order, together with the expectation it achieves.
 */
struct worst_case_row {
    std::vector<double> dist;
    double value = 0.0;
};

/**
 * Distribution minimizing sum_i p_i * values[succ_i] over the row's interval
 * and simplex constraints. Solved greedily: every successor starts at its
 * lower bound and the remaining mass fills successors in ascending value
 * order up to each upper bound. Throws feasibility_error on infeasible rows.
 */
worst_case_row inner_worst_expectation(row_view row, std::span<const double> values);

/// Maximizing counterpart of inner_worst_expectation (descending value order).
worst_case_row inner_best_expectation(row_view row, std::span<const double> values);

enum class q_variant { robust, optimistic, exact };

/// Dense per-(state, control action) value table.
struct qtable {
    std::int32_t num_states = 0;
    std::int32_t num_actions = 0;
    std::vector<double> values; // state-major
    q_variant variant = q_variant::robust;

    double at(state_id s, action_id a) const {
        return values[static_cast<std::size_t>(s) * num_actions + a];
    }
    /// Header `s,a,value`; one line per pair.
    void write_csv(std::ostream& out) const;
};

struct solve_options {
    double tol = 1e-8;
    std::int64_t max_iter = 100000;
    int threads = 0; // 0 = hardware concurrency
};

/**
 * Fixed point of Q(s,a) = R(s,a) + gamma * inner(row(s,a), V) with
 * V(s') = max_a Q(s',a), where `inner` is the worst-case, best-case or exact
 * expectation depending on the variant. Terminal states are pinned to zero.
 * Transition rows realized at the converged values are available through
 * transition_row(); for the robust variant these are the worst-case rows the
 * planners and the adversarial simulator consume.
 */
class robust_solution {
public:
    const qtable& q() const { return q_; }
    const std::vector<double>& state_values() const { return v_; }
    q_variant variant() const { return q_.variant; }
    std::int64_t iterations() const { return iterations_; }

    /// Row realized against the converged state values.
    worst_case_row transition_row(state_id s, action_id a) const;

    /// Greedy policy argmax_a Q(s, a), lowest index on ties.
    const std::vector<action_id>& greedy_policy() const { return greedy_; }

    const ram_mdp* interval_model() const { return model_.get(); }
    const point_model* exact_model() const { return point_.get(); }

private:
    qtable q_;
    std::vector<double> v_;
    std::vector<action_id> greedy_;
    std::int64_t iterations_ = 0;
    std::shared_ptr<const ram_mdp> model_;
    std::shared_ptr<const point_model> point_;

    friend struct solution_access;
};

robust_solution solve_robust(std::shared_ptr<const ram_mdp> m, solve_options opts = {});
robust_solution solve_optimistic(std::shared_ptr<const ram_mdp> m, solve_options opts = {});
robust_solution solve_exact(std::shared_ptr<const point_model> m, solve_options opts = {});

/**
 * Expected next-step distribution b'(s') = sum_s b(s) * rows[i](s'), where
 * rows[i] is aligned with the model row (b.entries[i].first, a). The result
 * is pruned and normalized.
 */
belief robust_belief_update(const ram_mdp& m, const belief& b, action_id a,
                            std::span<const worst_case_row> rows);

/// Exact filtering under a point model.
belief point_belief_update(const point_model& pm, const belief& b, action_id a);

/**
 * The non-measuring worst case at belief b under control action a: nature
 * picks one distribution per support state (independently, within the
 * interval rows) to minimize the best single control action the agent can
 * commit to across the resulting successor mix. Solved exactly as the
 * epigraph linear program min over P of max over responses. Response ties
 * break toward the lowest action index.
 */
struct nomeasure_worst_case {
    double game_value = 0.0;
    action_id response = 0;
    std::vector<worst_case_row> rows; // one per belief support entry, aligned with b
};

nomeasure_worst_case worst_case_transition_nomeasure(const ram_mdp& m, const belief& b,
                                                     action_id a, const robust_solution& sol);

} // namespace ratm
