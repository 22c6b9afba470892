#include "ratm/planners.hpp"

#include <algorithm>
#include <cmath>

#include "ratm/kernels.hpp"

namespace ratm {

namespace {

constexpr double kTieEps = 1e-9;
// Measuring fires on MV >= 0; the tolerance keeps exact ties (which arise at
// closed-form thresholds) from being decided by rounding noise.
constexpr double kDecisionEps = 1e-9;

std::shared_ptr<const point_model> make_ml_model(const std::shared_ptr<const ram_mdp>& m,
                                                 model_flavor flavor,
                                                 const robust_solution& robust_sol,
                                                 const solve_options& opts) {
    switch (flavor) {
    case model_flavor::average:
        return std::make_shared<const point_model>(average_point_model(*m).model);
    case model_flavor::pessimistic:
        return std::make_shared<const point_model>(point_model_from_solution(robust_sol));
    case model_flavor::optimistic: {
        const auto opt = solve_optimistic(m, opts);
        return std::make_shared<const point_model>(point_model_from_solution(opt));
    }
    }
    throw std::logic_error("unknown model flavor");
}

} // namespace

point_model point_model_from_solution(const robust_solution& sol) {
    const ram_mdp* m = sol.interval_model();
    if (m == nullptr) throw contract_error("solution does not wrap an interval model");
    point_model_builder b(m->num_states(), m->num_actions());
    b.set_measure_cost(m->measure_cost());
    b.set_discount(m->discount());
    b.set_initial_state(m->initial_state());
    for (state_id t : m->terminal_states()) b.add_terminal(t);
    for (state_id s = 0; s < m->num_states(); ++s) {
        for (action_id a = 0; a < m->num_actions(); ++a) {
            const auto row = m->row(s, a);
            const auto realized = sol.transition_row(s, a);
            std::vector<std::pair<state_id, double>> entries;
            for (std::size_t j = 0; j < row.size(); ++j)
                if (realized.dist[j] > 0.0) entries.emplace_back(row.succ[j], realized.dist[j]);
            b.add_row(s, a, std::move(entries), m->reward(s, a));
        }
    }
    return std::move(b).build();
}

std::string planner_config::name() const {
    switch (kind) {
    case planner_kind::ratm:
        return "ratm";
    case planner_kind::mlatm:
        switch (flavor) {
        case model_flavor::average: return "mlatm-avg";
        case model_flavor::pessimistic: return "mlatm-pes";
        case model_flavor::optimistic: return "mlatm-opt";
        }
        break;
    case planner_kind::atm:
        switch (flavor) {
        case model_flavor::average: return "atm-avg";
        case model_flavor::pessimistic: return "atm-pes";
        case model_flavor::optimistic: break;
        }
        break;
    }
    throw std::logic_error("unnameable planner configuration");
}

planner_config planner_config::from_name(std::string_view name) {
    planner_config cfg;
    if (name == "ratm") {
        cfg.kind = planner_kind::ratm;
    } else if (name == "mlatm-avg" || name == "mlatm-pes" || name == "mlatm-opt") {
        cfg.kind = planner_kind::mlatm;
        cfg.flavor = name == "mlatm-avg" ? model_flavor::average
                     : name == "mlatm-pes" ? model_flavor::pessimistic
                                           : model_flavor::optimistic;
    } else if (name == "atm-avg" || name == "atm-pes") {
        cfg.kind = planner_kind::atm;
        cfg.flavor = name == "atm-avg" ? model_flavor::average : model_flavor::pessimistic;
    } else {
        throw config_error("unknown planner: " + std::string(name));
    }
    return cfg;
}

planner::planner(std::shared_ptr<const ram_mdp> model, planner_config cfg) : cfg_(cfg) {
    if (!model) throw std::invalid_argument("planner needs a model");
    switch (cfg_.kind) {
    case planner_kind::ratm:
        model_ = std::move(model);
        sol_ = std::make_shared<const robust_solution>(solve_robust(model_, cfg_.solve));
        break;
    case planner_kind::mlatm: {
        model_ = std::move(model);
        sol_ = std::make_shared<const robust_solution>(solve_robust(model_, cfg_.solve));
        ml_model_ = make_ml_model(model_, cfg_.flavor, *sol_, cfg_.solve);
        ml_sol_ = std::make_shared<const robust_solution>(solve_exact(ml_model_, cfg_.solve));
        break;
    }
    case planner_kind::atm: {
        // plan on a single transition function: the interval midpoints or the
        // fully observable worst case
        std::shared_ptr<const point_model> pm;
        if (cfg_.flavor == model_flavor::average) {
            pm = std::make_shared<const point_model>(average_point_model(*model).model);
        } else {
            const auto robust_sol = solve_robust(model, cfg_.solve);
            pm = std::make_shared<const point_model>(point_model_from_solution(robust_sol));
        }
        model_ = std::make_shared<const ram_mdp>(pm->as_degenerate_ram_mdp());
        sol_ = std::make_shared<const robust_solution>(solve_robust(model_, cfg_.solve));
        break;
    }
    }
    reset();
}

void planner::reset(std::uint64_t tie_seed) {
    belief_r_ = belief::delta(model_->initial_state());
    belief_ml_ = belief_r_;
    tie_rng_.seed(tie_seed);
}

action_id planner::argmax_belief_q(const belief& b, const qtable& q, double* value_out) {
    const auto num_actions = static_cast<std::size_t>(q.num_actions);
    std::vector<double> vals(num_actions, 0.0);
    for (const auto& [s, w] : b.entries)
        kernels::axpy(vals.data(),
                      q.values.data() + static_cast<std::size_t>(s) * num_actions, w,
                      num_actions);
    const double best = kernels::max_value(vals.data(), num_actions);
    if (value_out != nullptr) *value_out = best;
    if (cfg_.ties == tie_break::lexicographic) {
        for (std::size_t a = 0; a < num_actions; ++a)
            if (vals[a] >= best - kTieEps) return static_cast<action_id>(a);
    }
    std::vector<action_id> tied;
    for (std::size_t a = 0; a < num_actions; ++a)
        if (vals[a] >= best - kTieEps) tied.push_back(static_cast<action_id>(a));
    return tied[static_cast<std::size_t>(tie_rng_() % tied.size())];
}

decision planner::decide() {
    const ram_mdp& m = *model_;
    const double gamma = m.discount();
    const double cost = m.measure_cost();

    decision d;
    d.ap.control = argmax_belief_q(belief_r_, sol_->q(), &d.control_q);

    // value of measuring: act per observed state after the worst-case rows
    double measured_continuation = 0.0;
    for (const auto& [s, w] : belief_r_.entries)
        measured_continuation += w * sol_->transition_row(s, d.ap.control).value;

    // value of not measuring: commit to one response across the mix
    auto game = worst_case_transition_nomeasure(m, belief_r_, d.ap.control, *sol_);
    d.mv_robust = (-cost + gamma * measured_continuation) - gamma * game.game_value;
    d.chosen_response = game.response;
    d.nature_rows = std::move(game.rows);

    if (cfg_.kind == planner_kind::mlatm) {
        const belief next_r = robust_belief_update(m, belief_r_, d.ap.control, d.nature_rows);
        const action_id robust_next = argmax_belief_q(next_r, sol_->q(), nullptr);
        const belief next_ml = point_belief_update(*ml_model_, belief_ml_, d.ap.control);
        const auto& qml = ml_sol_->q();
        const auto& continuation_policy = cfg_.mv_mode == ml_mv_mode::robust_actions
                                              ? sol_->greedy_policy()
                                              : ml_sol_->greedy_policy();
        double regret = 0.0;
        for (const auto& [sp, w] : next_ml.entries)
            regret += w * (qml.at(sp, continuation_policy[static_cast<std::size_t>(sp)]) -
                           qml.at(sp, robust_next));
        const double mv_ml = -cost + gamma * regret;
        d.mv_ml = mv_ml;
        d.ap.measure = mv_ml >= -kDecisionEps || d.mv_robust >= -kDecisionEps;
    } else {
        d.ap.measure = d.mv_robust >= -kDecisionEps;
    }
    return d;
}

void planner::advance(const decision& d, std::optional<state_id> observation) {
    if (d.ap.measure) {
        if (!observation) throw contract_error("measurement taken but no observation given");
        belief_r_ = belief::delta(*observation);
        belief_ml_ = belief_r_;
        return;
    }
    if (observation) throw contract_error("observation given without a measurement");
    belief_r_ = robust_belief_update(*model_, belief_r_, d.ap.control, d.nature_rows);
    if (cfg_.kind == planner_kind::mlatm)
        belief_ml_ = point_belief_update(*ml_model_, belief_ml_, d.ap.control);
}

} // namespace ratm
