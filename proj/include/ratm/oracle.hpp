#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ratm/model.hpp"
#include "ratm/planners.hpp"
#include "ratm/simulation.hpp"
#include "ratm/solvers.hpp"

// Independent brute-force reference computations. Everything here must stay
// independent of the solver paths it is used to check: the inner problems
// are solved by vertex enumeration, the finite-horizon values by exhaustive
// search over action pairs and a nature grid.

namespace ratm::oracle {

/// All vertices of {lo <= p <= hi, sum p = 1} for one row. Intended for
/// rows with few successors; throws size_error above 16 successors.
std::vector<std::vector<double>> enumerate_row_vertices(row_view row);

worst_case_row inner_worst_by_enumeration(row_view row, std::span<const double> values);
worst_case_row inner_best_by_enumeration(row_view row, std::span<const double> values);

struct exact_params {
    int horizon = 2;
    double grid = 1e-3;                        // nature grid resolution per free dimension
    std::int64_t max_nature_points = 2000000; // per expanded node
    std::int64_t max_nodes = 500000;           // value evaluations across the search
};

struct branch_info {
    action_pair ap;
    double value = 0.0;
    // nature's minimizing choice, one distribution per belief support state,
    // aligned with the model rows
    std::vector<std::vector<double>> nature_rows;
};

struct policy_node {
    double value = 0.0;
    action_pair best;
    std::vector<branch_info> branches;
    // children under the best branch at the recorded nature minimizer:
    // measuring branches key by observation, non-measuring ones use key -1
    std::map<state_id, std::shared_ptr<policy_node>> children;
};

/**
 * Exact finite-horizon robust value from an initial belief, by exhaustive
 * search: the agent ranges over action pairs, nature over a grid (plus all
 * interval vertices) of every free row dimension, jointly across the belief
 * support. Accuracy is bounded by the grid resolution and improves
 * monotonically as it is refined. Throws size_error when the search exceeds
 * its budget.
 */
policy_node exact_finite_horizon_value(const ram_mdp& m, const belief& initial,
                                       const exact_params& params = {});

/// Measuring value of the two-branch environment before subtracting the
/// cost: 0.8 * (1 - 1/1.8).
double ab_optimal_threshold();

struct lucky_unlucky_result {
    bool measure = false;
    double value = 0.0;
};

/**
 * Closed-form optimum of the lucky-unlucky environment: the best of
 * committing to the risky action (1 - 2p), committing to the safe action
 * (0), and measuring then acting ((1 - p) - c), each under the worst-case
 * p = p_max. The measure flag mirrors the planner's tie convention
 * (measuring wins exact ties).
 */
lucky_unlucky_result lucky_unlucky_optimal(double p_max, double c);

/// c * (1 - gamma^horizon) / (1 - gamma); horizon < 0 means unbounded.
double ml_regret_bound(double c, double gamma, int horizon = -1);

struct bound_report {
    double bound = 0.0;          // regret bound for the configured horizon
    double bound_infinite = 0.0; // c / (1 - gamma)
    double estimate = 0.0;       // paired mean of base minus lenient returns
    double ci_half_width = 0.0;
    double margin = 0.0;         // bound + ci - estimate
    bool pass = false;
    int episodes = 0;
    std::string detail;
};

/**
 * Monte Carlo check that the lenient planner loses at most the measuring
 * cost stream: paired episodes under the given nature, asserting
 * estimate - ci <= bound.
 */
bound_report theorem1_bound_check(const ram_mdp& env, const planner& base_planner,
                                  const planner& ml_planner, const nature_model& nature,
                                  int n_episodes, std::uint64_t seed, int horizon_cap);

} // namespace ratm::oracle
