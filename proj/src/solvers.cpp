#include "ratm/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include "ratm/kernels.hpp"
#include "ratm/simplex.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace ratm {

// grants the solver routines write access while construction stays internal
struct solution_access {
    static qtable& q(robust_solution& s) { return s.q_; }
    static std::vector<double>& v(robust_solution& s) { return s.v_; }
    static std::vector<action_id>& greedy(robust_solution& s) { return s.greedy_; }
    static std::int64_t& iterations(robust_solution& s) { return s.iterations_; }
    static std::shared_ptr<const ram_mdp>& model(robust_solution& s) { return s.model_; }
    static std::shared_ptr<const point_model>& point(robust_solution& s) { return s.point_; }
};

namespace {

struct greedy_scratch {
    std::vector<double> vals;
    std::vector<std::int32_t> order;
    std::vector<double> dist;
};

thread_local greedy_scratch tl_scratch;

// Greedy interval fill: start at the lower bounds and move the remaining
// mass through successors ordered by value (ascending to minimize,
// descending to maximize). Writes the distribution into scratch.dist.
double inner_extreme(row_view row, const double* values, bool maximize, greedy_scratch& sc) {
    const std::size_t n = row.size();
    if (n == 0) throw feasibility_error("empty transition row");
    sc.vals.resize(n);
    sc.order.resize(n);
    sc.dist.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        sc.vals[i] = values[row.succ[i]];
        sc.order[i] = static_cast<std::int32_t>(i);
    }
    const double* v = sc.vals.data();
    if (maximize)
        std::stable_sort(sc.order.begin(), sc.order.end(),
                         [v](std::int32_t x, std::int32_t y) { return v[x] > v[y]; });
    else
        std::stable_sort(sc.order.begin(), sc.order.end(),
                         [v](std::int32_t x, std::int32_t y) { return v[x] < v[y]; });

    double remaining = 1.0;
    if (row.lo != nullptr) {
        for (std::size_t i = 0; i < n; ++i) {
            sc.dist[i] = row.lo[i];
            remaining -= row.lo[i];
        }
        if (remaining < -prob_eps) throw feasibility_error("row lower bounds exceed 1");
        if (remaining < 0.0) remaining = 0.0;
    } else {
        std::fill(sc.dist.begin(), sc.dist.end(), 0.0);
    }
    for (std::size_t k = 0; k < n && remaining > 0.0; ++k) {
        const auto i = static_cast<std::size_t>(sc.order[k]);
        const double room = row.hi[i] - sc.dist[i];
        const double add = room < remaining ? room : remaining;
        sc.dist[i] += add;
        remaining -= add;
    }
    if (remaining > prob_eps) throw feasibility_error("row upper bounds sum below 1");
    return kernels::dot_indexed(values, row.succ.data(), sc.dist.data(), n);
}

worst_case_row inner_extreme_row(row_view row, std::span<const double> values, bool maximize) {
    greedy_scratch sc;
    worst_case_row out;
    out.value = inner_extreme(row, values.data(), maximize, sc);
    out.dist = std::move(sc.dist);
    return out;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Shared Jacobi iteration. backup(s, a, v_old) computes one Q entry.
template <typename Backup>
std::int64_t run_value_iteration(std::int32_t num_states, std::int32_t num_actions,
                                 const std::vector<std::uint8_t>& skip, double tol,
                                 std::int64_t max_iter, int threads, Backup&& backup,
                                 std::vector<double>& q, std::vector<double>& v) {
    q.assign(static_cast<std::size_t>(num_states) * num_actions, 0.0);
    v.assign(static_cast<std::size_t>(num_states), 0.0);
    std::vector<double> v_next(v.size(), 0.0);
#if !defined(_OPENMP)
    (void)threads;
#endif

    for (std::int64_t iter = 1; iter <= max_iter; ++iter) {
        double delta = 0.0;
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) reduction(max : delta) num_threads(threads)
#endif
        for (std::int32_t s = 0; s < num_states; ++s) {
            if (skip[static_cast<std::size_t>(s)]) continue;
            double* qrow = q.data() + static_cast<std::size_t>(s) * num_actions;
            for (std::int32_t a = 0; a < num_actions; ++a) {
                const double next = backup(s, a, v.data());
                const double change = std::abs(next - qrow[a]);
                if (change > delta) delta = change;
                qrow[a] = next;
            }
            v_next[static_cast<std::size_t>(s)] =
                kernels::max_value(qrow, static_cast<std::size_t>(num_actions));
        }
        v.swap(v_next);
        if (delta < tol) return iter;
    }
    throw divergence_error("value iteration did not reach tolerance " + std::to_string(tol));
}

std::vector<action_id> greedy_from_q(const qtable& q) {
    std::vector<action_id> pol(static_cast<std::size_t>(q.num_states), 0);
    for (state_id s = 0; s < q.num_states; ++s) {
        action_id best = 0;
        for (action_id a = 1; a < q.num_actions; ++a)
            if (q.at(s, a) > q.at(s, best)) best = a;
        pol[static_cast<std::size_t>(s)] = best;
    }
    return pol;
}

std::vector<std::uint8_t> terminal_mask_of(const ram_mdp& m) {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(m.num_states()), 0);
    for (state_id t : m.terminal_states()) mask[static_cast<std::size_t>(t)] = 1;
    return mask;
}

robust_solution solve_interval(std::shared_ptr<const ram_mdp> m, bool maximize,
                               solve_options opts) {
    if (opts.tol <= 0.0) throw std::invalid_argument("tolerance must be positive");
    robust_solution sol;
    solution_access::model(sol) = std::move(m);
    const auto& mdp = *solution_access::model(sol);
    auto& q = solution_access::q(sol);
    q.num_states = mdp.num_states();
    q.num_actions = mdp.num_actions();
    q.variant = maximize ? q_variant::optimistic : q_variant::robust;
    const double gamma = mdp.discount();
    const auto skip = terminal_mask_of(mdp);
    solution_access::iterations(sol) = run_value_iteration(
        mdp.num_states(), mdp.num_actions(), skip, opts.tol, opts.max_iter,
        resolve_threads(opts.threads),
        [&mdp, gamma, maximize](state_id s, action_id a, const double* v) {
            return mdp.reward(s, a) +
                   gamma * inner_extreme(mdp.row(s, a), v, maximize, tl_scratch);
        },
        q.values, solution_access::v(sol));
    solution_access::greedy(sol) = greedy_from_q(q);
    return sol;
}

} // namespace

worst_case_row inner_worst_expectation(row_view row, std::span<const double> values) {
    return inner_extreme_row(row, values, false);
}

worst_case_row inner_best_expectation(row_view row, std::span<const double> values) {
    return inner_extreme_row(row, values, true);
}

void qtable::write_csv(std::ostream& out) const {
    out << "s,a,value\n";
    char buf[64];
    for (state_id s = 0; s < num_states; ++s)
        for (action_id a = 0; a < num_actions; ++a) {
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", s, a, at(s, a));
            out << buf;
        }
}

robust_solution solve_robust(std::shared_ptr<const ram_mdp> m, solve_options opts) {
    return solve_interval(std::move(m), false, opts);
}

robust_solution solve_optimistic(std::shared_ptr<const ram_mdp> m, solve_options opts) {
    return solve_interval(std::move(m), true, opts);
}

robust_solution solve_exact(std::shared_ptr<const point_model> m, solve_options opts) {
    if (opts.tol <= 0.0) throw std::invalid_argument("tolerance must be positive");
    robust_solution sol;
    solution_access::point(sol) = std::move(m);
    const auto& pm = *solution_access::point(sol);
    auto& q = solution_access::q(sol);
    q.num_states = pm.num_states();
    q.num_actions = pm.num_actions();
    q.variant = q_variant::exact;
    const double gamma = pm.discount();
    std::vector<std::uint8_t> skip(static_cast<std::size_t>(pm.num_states()), 0);
    for (state_id t : pm.terminal_states()) skip[static_cast<std::size_t>(t)] = 1;
    solution_access::iterations(sol) = run_value_iteration(
        pm.num_states(), pm.num_actions(), skip, opts.tol, opts.max_iter,
        resolve_threads(opts.threads),
        [&pm, gamma](state_id s, action_id a, const double* v) {
            const auto row = pm.row(s, a);
            return pm.reward(s, a) + gamma * kernels::dot_indexed(v, row.succ.data(),
                                                                  row.prob.data(), row.size());
        },
        q.values, solution_access::v(sol));
    solution_access::greedy(sol) = greedy_from_q(q);
    return sol;
}

worst_case_row robust_solution::transition_row(state_id s, action_id a) const {
    switch (q_.variant) {
    case q_variant::robust:
        return inner_worst_expectation(model_->row(s, a), v_);
    case q_variant::optimistic:
        return inner_best_expectation(model_->row(s, a), v_);
    case q_variant::exact: {
        const auto row = point_->row(s, a);
        worst_case_row out;
        out.dist.assign(row.prob.begin(), row.prob.end());
        out.value = kernels::dot_indexed(v_.data(), row.succ.data(), row.prob.data(), row.size());
        return out;
    }
    }
    throw std::logic_error("unknown variant");
}

belief robust_belief_update(const ram_mdp& m, const belief& b, action_id a,
                            std::span<const worst_case_row> rows) {
    if (rows.size() != b.size())
        throw contract_error("one transition row is required per belief support state");
    std::vector<std::pair<state_id, double>> acc;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const auto [s, w] = b.entries[i];
        const auto row = m.row(s, a);
        if (rows[i].dist.size() != row.size())
            throw contract_error("transition row not aligned with model row");
        for (std::size_t j = 0; j < row.size(); ++j)
            if (rows[i].dist[j] > 0.0) acc.emplace_back(row.succ[j], w * rows[i].dist[j]);
    }
    return belief::from_entries(std::move(acc));
}

belief point_belief_update(const point_model& pm, const belief& b, action_id a) {
    std::vector<std::pair<state_id, double>> acc;
    for (const auto& [s, w] : b.entries) {
        const auto row = pm.row(s, a);
        for (std::size_t j = 0; j < row.size(); ++j)
            if (row.prob[j] > 0.0) acc.emplace_back(row.succ[j], w * row.prob[j]);
    }
    return belief::from_entries(std::move(acc));
}

namespace {

// True when the row's feasible set is a single point; writes it to dist.
bool unique_feasible_point(row_view row, std::vector<double>& dist) {
    double sum_hi = 0.0, sum_lo = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        sum_hi += row.hi[i];
        sum_lo += row.lo_at(i);
    }
    if (std::abs(sum_hi - 1.0) <= prob_eps) {
        dist.assign(row.hi.begin(), row.hi.end());
        return true;
    }
    if (std::abs(sum_lo - 1.0) <= prob_eps) {
        dist.resize(row.size());
        for (std::size_t i = 0; i < row.size(); ++i) dist[i] = row.lo_at(i);
        return true;
    }
    return false;
}

} // namespace

nomeasure_worst_case worst_case_transition_nomeasure(const ram_mdp& m, const belief& b,
                                                     action_id a, const robust_solution& sol) {
    const auto num_actions = static_cast<std::size_t>(m.num_actions());
    const auto& q = sol.q();
    const std::size_t k = b.size();

    nomeasure_worst_case out;
    out.rows.resize(k);

    bool all_unique = true;
    for (std::size_t i = 0; i < k; ++i) {
        if (!unique_feasible_point(m.row(b.entries[i].first, a), out.rows[i].dist)) {
            all_unique = false;
            break;
        }
    }

    if (!all_unique) {
        // Epigraph LP: variables are the stacked row probabilities, the game
        // value t and one slack per response action.
        std::vector<row_view> views(k);
        std::size_t total_p = 0;
        for (std::size_t i = 0; i < k; ++i) {
            views[i] = m.row(b.entries[i].first, a);
            total_p += views[i].size();
        }
        double qmin = 0.0, qmax = 0.0;
        bool first = true;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < views[i].size(); ++j) {
                const double* qrow =
                    q.values.data() + static_cast<std::size_t>(views[i].succ[j]) * num_actions;
                for (std::size_t ab = 0; ab < num_actions; ++ab) {
                    if (first || qrow[ab] < qmin) qmin = qrow[ab];
                    if (first || qrow[ab] > qmax) qmax = qrow[ab];
                    first = false;
                }
            }
        const double pad = 1e-6 * (1.0 + qmax - qmin);
        const std::size_t t_col = total_p;
        const std::size_t slack0 = total_p + 1;

        lp_problem lp;
        lp.rows = num_actions + k;
        lp.cols = total_p + 1 + num_actions;
        lp.a.assign(lp.rows * lp.cols, 0.0);
        lp.b.assign(lp.rows, 0.0);
        lp.c.assign(lp.cols, 0.0);
        lp.lower.assign(lp.cols, 0.0);
        lp.upper.assign(lp.cols, 0.0);
        lp.c[t_col] = 1.0;
        lp.lower[t_col] = qmin - pad;
        lp.upper[t_col] = qmax + pad;
        for (std::size_t ab = 0; ab < num_actions; ++ab) {
            lp.lower[slack0 + ab] = 0.0;
            lp.upper[slack0 + ab] = (qmax - qmin) + 2.0 * pad;
        }

        std::size_t col = 0;
        for (std::size_t i = 0; i < k; ++i) {
            const double w = b.entries[i].second;
            for (std::size_t j = 0; j < views[i].size(); ++j, ++col) {
                lp.lower[col] = views[i].lo_at(j);
                lp.upper[col] = views[i].hi[j];
                const double* qrow =
                    q.values.data() + static_cast<std::size_t>(views[i].succ[j]) * num_actions;
                for (std::size_t ab = 0; ab < num_actions; ++ab)
                    lp.at(ab, col) = w * qrow[ab];
                lp.at(num_actions + i, col) = 1.0;
            }
        }
        for (std::size_t ab = 0; ab < num_actions; ++ab) {
            lp.at(ab, t_col) = -1.0;
            lp.at(ab, slack0 + ab) = 1.0;
        }
        for (std::size_t i = 0; i < k; ++i) lp.b[num_actions + i] = 1.0;

        const auto lps = solve_lp(lp);

        // Nature's minimizer need not be unique (the agent's best response
        // can neutralize a whole face). Refine within the optimal face
        // toward the fully observable worst case: fix the game value and
        // minimize the expected state value.
        lp_problem refine;
        refine.rows = num_actions + k;
        refine.cols = total_p + num_actions;
        refine.a.assign(refine.rows * refine.cols, 0.0);
        refine.b.assign(refine.rows, 0.0);
        refine.c.assign(refine.cols, 0.0);
        refine.lower.assign(refine.cols, 0.0);
        refine.upper.assign(refine.cols, 0.0);
        const double t_star = lps.x[t_col];
        const double face_pad = 1e-7 * (1.0 + std::abs(t_star));
        col = 0;
        for (std::size_t i = 0; i < k; ++i) {
            const double w = b.entries[i].second;
            for (std::size_t j = 0; j < views[i].size(); ++j, ++col) {
                refine.lower[col] = views[i].lo_at(j);
                refine.upper[col] = views[i].hi[j];
                const double* qrow =
                    q.values.data() + static_cast<std::size_t>(views[i].succ[j]) * num_actions;
                for (std::size_t ab = 0; ab < num_actions; ++ab)
                    refine.at(ab, col) = w * qrow[ab];
                refine.at(num_actions + i, col) = 1.0;
                refine.c[col] = w * sol.state_values()[static_cast<std::size_t>(
                                        views[i].succ[j])];
            }
        }
        for (std::size_t ab = 0; ab < num_actions; ++ab) {
            refine.at(ab, total_p + ab) = 1.0;
            refine.b[ab] = t_star + face_pad;
            refine.lower[total_p + ab] = 0.0;
            refine.upper[total_p + ab] = (qmax - qmin) + 2.0 * pad + 2.0 * face_pad;
        }
        for (std::size_t i = 0; i < k; ++i) refine.b[num_actions + i] = 1.0;

        const auto refined = solve_lp(refine);
        col = 0;
        for (std::size_t i = 0; i < k; ++i) {
            out.rows[i].dist.resize(views[i].size());
            for (std::size_t j = 0; j < views[i].size(); ++j, ++col)
                out.rows[i].dist[j] =
                    std::clamp(refined.x[col], views[i].lo_at(j), views[i].hi[j]);
        }
    }

    // best single response against the returned rows; lowest index on ties
    std::vector<double> resp(num_actions, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        const auto row = m.row(b.entries[i].first, a);
        const double w = b.entries[i].second;
        for (std::size_t j = 0; j < row.size(); ++j) {
            const double mass = w * out.rows[i].dist[j];
            if (mass == 0.0) continue;
            kernels::axpy(resp.data(),
                          q.values.data() + static_cast<std::size_t>(row.succ[j]) * num_actions,
                          mass, num_actions);
        }
        out.rows[i].value =
            kernels::dot_indexed(sol.state_values().data(), row.succ.data(),
                                 out.rows[i].dist.data(), row.size());
    }
    out.response = 0;
    for (std::size_t ab = 1; ab < num_actions; ++ab)
        if (resp[ab] > resp[out.response]) out.response = static_cast<action_id>(ab);
    out.game_value = resp[out.response];
    return out;
}

} // namespace ratm
