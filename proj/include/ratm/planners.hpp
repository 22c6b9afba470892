#pragma once

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "ratm/model.hpp"
#include "ratm/solvers.hpp"

namespace ratm {

enum class planner_kind { ratm, mlatm, atm };

/// Point-model flavor used by the measurement-lenient variants and the
/// non-robust baselines.
enum class model_flavor { average, pessimistic, optimistic };

enum class tie_break { lexicographic, seeded_random };

/// Which action evaluates the post-measurement continuation in the lenient
/// measuring value: the robust policy's per-state action (default) or the
/// lenient model's own optimum.
enum class ml_mv_mode { robust_actions, ml_optimal_actions };

struct planner_config {
    planner_kind kind = planner_kind::ratm;
    model_flavor flavor = model_flavor::average;
    tie_break ties = tie_break::lexicographic;
    ml_mv_mode mv_mode = ml_mv_mode::robust_actions;
    solve_options solve{};

    std::string name() const;
    /// Accepts: ratm, mlatm-avg, mlatm-pes, mlatm-opt, atm-avg, atm-pes.
    static planner_config from_name(std::string_view name);
};

/// One online decision together with the quantities that produced it.
struct decision {
    action_pair ap;
    double control_q = 0.0;
    double mv_robust = 0.0;
    std::optional<double> mv_ml;
    std::optional<action_id> chosen_response;
    std::vector<worst_case_row> nature_rows; // aligned with the belief support
};

/**
 * Online decision rule. Control actions maximize the belief-weighted
 * state-action values of the underlying robust MDP; a measurement is taken
 * when the value of acting on exact state information exceeds the value of
 * committing to one action across the uncertain successor mix. The
 * measurement-lenient variants additionally measure when a less pessimistic
 * model expects the robust policy's next action to leave value behind. The
 * baselines run the same rule on a degenerate (point) model.
 *
 * Planners are cheap to copy; the models and solved tables are shared.
 */
class planner {
public:
    planner(std::shared_ptr<const ram_mdp> model, planner_config cfg);

    const planner_config& config() const { return cfg_; }
    void reset(std::uint64_t tie_seed = 0);

    decision decide();
    void advance(const decision& d, std::optional<state_id> observation);

    const belief& robust_belief() const { return belief_r_; }
    const belief* ml_belief() const {
        return cfg_.kind == planner_kind::mlatm ? &belief_ml_ : nullptr;
    }
    const ram_mdp& planning_model() const { return *model_; }
    const robust_solution& robust() const { return *sol_; }
    const robust_solution* ml() const { return ml_sol_.get(); }

private:
    action_id argmax_belief_q(const belief& b, const qtable& q, double* value_out);

    planner_config cfg_;
    std::shared_ptr<const ram_mdp> model_;          // degenerate for the baselines
    std::shared_ptr<const robust_solution> sol_;
    std::shared_ptr<const point_model> ml_model_;   // lenient variants only
    std::shared_ptr<const robust_solution> ml_sol_;
    belief belief_r_;
    belief belief_ml_;
    std::mt19937_64 tie_rng_;
};

/// Point model realizing the solution's transition rows (zero entries
/// dropped), with rewards, cost and discount copied from the solved model.
point_model point_model_from_solution(const robust_solution& sol);

} // namespace ratm
