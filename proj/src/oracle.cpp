#include "ratm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "ratm/kernels.hpp"

namespace ratm::oracle {

std::vector<std::vector<double>> enumerate_row_vertices(row_view row) {
    const std::size_t n = row.size();
    if (n > 16) throw size_error("vertex enumeration limited to 16 successors");
    std::vector<std::vector<double>> out;
    std::vector<double> p(n);
    // at a vertex, all but (at most) one coordinate sits on a bound
    for (std::size_t free = 0; free < n; ++free) {
        const std::size_t others = n - 1;
        for (std::size_t mask = 0; mask < (1ULL << others); ++mask) {
            double fixed = 0.0;
            std::size_t bit = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (i == free) continue;
                p[i] = (mask >> bit & 1U) ? row.hi[i] : row.lo_at(i);
                fixed += p[i];
                ++bit;
            }
            const double rest = 1.0 - fixed;
            if (rest < row.lo_at(free) - prob_eps || rest > row.hi[free] + prob_eps) continue;
            p[free] = std::clamp(rest, row.lo_at(free), row.hi[free]);
            const bool duplicate = std::any_of(out.begin(), out.end(), [&](const auto& q) {
                for (std::size_t i = 0; i < n; ++i)
                    if (std::abs(q[i] - p[i]) > 1e-12) return false;
                return true;
            });
            if (!duplicate) out.push_back(p);
        }
    }
    if (out.empty()) throw feasibility_error("row admits no distribution");
    return out;
}

namespace {

worst_case_row extreme_by_enumeration(row_view row, std::span<const double> values,
                                      bool maximize) {
    const auto vertices = enumerate_row_vertices(row);
    worst_case_row best;
    bool first = true;
    for (const auto& p : vertices) {
        const double v = kernels::scalar::dot_indexed(values.data(), row.succ.data(), p.data(),
                                                      row.size());
        if (first || (maximize ? v > best.value : v < best.value)) {
            best.value = v;
            best.dist = p;
            first = false;
        }
    }
    return best;
}

} // namespace

worst_case_row inner_worst_by_enumeration(row_view row, std::span<const double> values) {
    return extreme_by_enumeration(row, values, false);
}

worst_case_row inner_best_by_enumeration(row_view row, std::span<const double> values) {
    return extreme_by_enumeration(row, values, true);
}

namespace {

// Candidate nature choices for one row: a grid over the free dimensions plus
// every vertex.
std::vector<std::vector<double>> row_candidates(row_view row, double grid,
                                                std::int64_t budget) {
    const std::size_t n = row.size();
    auto out = enumerate_row_vertices(row);
    std::vector<double> p(n);
    std::function<void(std::size_t, double)> rec = [&](std::size_t i, double used) {
        if (static_cast<std::int64_t>(out.size()) > budget)
            throw size_error("nature grid exceeds its budget");
        if (i + 1 == n) {
            const double rest = 1.0 - used;
            if (rest < row.lo_at(i) - prob_eps || rest > row.hi[i] + prob_eps) return;
            p[i] = std::clamp(rest, row.lo_at(i), row.hi[i]);
            out.push_back(p);
            return;
        }
        const double lo = row.lo_at(i);
        const double hi = std::min(row.hi[i], 1.0 - used);
        if (hi < lo - prob_eps) return;
        const auto steps = std::max<std::int64_t>(
            1, static_cast<std::int64_t>(std::ceil((hi - lo) / grid)));
        for (std::int64_t k = 0; k <= steps; ++k) {
            p[i] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps);
            rec(i + 1, used + p[i]);
        }
    };
    if (n > 1) rec(0, 0.0);
    return out;
}

struct exact_solver {
    const ram_mdp& m;
    exact_params params;
    std::int64_t nodes = 0;

    std::shared_ptr<policy_node> solve(const belief& b, int horizon) {
        if (++nodes > params.max_nodes) throw size_error("belief tree exceeds its budget");
        auto node = std::make_shared<policy_node>();
        if (horizon == 0) return node;

        const auto num_actions = m.num_actions();
        node->value = -std::numeric_limits<double>::infinity();
        // measuring branches first so exact ties resolve toward measuring,
        // mirroring the planners' MV >= 0 convention
        for (action_id a = 0; a < num_actions; ++a) {
            for (int measure = 1; measure >= 0; --measure) {
                branch_info branch;
                branch.ap = {a, measure == 1};
                double reward = 0.0;
                for (const auto& [s, w] : b.entries) reward += w * m.reward(s, a);
                if (measure == 1) reward -= m.measure_cost();

                // nature minimizes jointly over the support rows
                const std::size_t k = b.size();
                std::vector<std::vector<std::vector<double>>> cands(k);
                std::int64_t combos = 1;
                for (std::size_t i = 0; i < k; ++i) {
                    cands[i] = row_candidates(m.row(b.entries[i].first, a), params.grid,
                                              params.max_nature_points);
                    combos *= static_cast<std::int64_t>(cands[i].size());
                    if (combos > params.max_nature_points)
                        throw size_error("nature grid exceeds its budget");
                }
                double worst = std::numeric_limits<double>::infinity();
                std::vector<std::size_t> pick(k, 0), worst_pick(k, 0);
                for (std::int64_t c = 0; c < combos; ++c) {
                    std::int64_t rem = c;
                    for (std::size_t i = 0; i < k; ++i) {
                        pick[i] = static_cast<std::size_t>(
                            rem % static_cast<std::int64_t>(cands[i].size()));
                        rem /= static_cast<std::int64_t>(cands[i].size());
                    }
                    const double cont = continuation(b, a, measure == 1, cands, pick, horizon);
                    if (cont < worst) {
                        worst = cont;
                        worst_pick = pick;
                    }
                }
                branch.value = reward + m.discount() * worst;
                branch.nature_rows.reserve(k);
                for (std::size_t i = 0; i < k; ++i)
                    branch.nature_rows.push_back(cands[i][worst_pick[i]]);
                if (branch.value > node->value + 1e-15 ||
                    (node->branches.empty() && branch.value >= node->value)) {
                    node->value = branch.value;
                    node->best = branch.ap;
                }
                node->branches.push_back(std::move(branch));
            }
        }

        // expand the children of the best branch at its recorded minimizer
        const auto& best = *std::find_if(node->branches.begin(), node->branches.end(),
                                         [&](const branch_info& br) {
                                             return br.ap == node->best;
                                         });
        const belief next = apply_rows(b, node->best.control, best.nature_rows);
        if (horizon > 1) {
            if (node->best.measure) {
                for (const auto& [sp, w] : next.entries)
                    node->children[sp] = solve(belief::delta(sp), horizon - 1);
            } else {
                node->children[-1] = solve(next, horizon - 1);
            }
        }
        return node;
    }

    belief apply_rows(const belief& b, action_id a,
                      const std::vector<std::vector<double>>& rows) const {
        std::vector<std::pair<state_id, double>> acc;
        for (std::size_t i = 0; i < b.size(); ++i) {
            const auto row = m.row(b.entries[i].first, a);
            for (std::size_t j = 0; j < row.size(); ++j)
                if (rows[i][j] > 0.0)
                    acc.emplace_back(row.succ[j], b.entries[i].second * rows[i][j]);
        }
        return belief::from_entries(std::move(acc));
    }

    double continuation(const belief& b, action_id a, bool measured,
                        const std::vector<std::vector<std::vector<double>>>& cands,
                        const std::vector<std::size_t>& pick, int horizon) {
        std::vector<std::vector<double>> rows(pick.size());
        for (std::size_t i = 0; i < pick.size(); ++i) rows[i] = cands[i][pick[i]];
        const belief next = apply_rows(b, a, rows);
        if (measured) {
            double v = 0.0;
            for (const auto& [sp, w] : next.entries) v += w * value(belief::delta(sp), horizon - 1);
            return v;
        }
        return value(next, horizon - 1);
    }

    // value-only recursion (no tree construction) for inner evaluations
    double value(const belief& b, int horizon) {
        if (horizon == 0) return 0.0;
        if (++nodes > params.max_nodes) throw size_error("belief tree exceeds its budget");
        double best = -std::numeric_limits<double>::infinity();
        for (action_id a = 0; a < m.num_actions(); ++a) {
            for (int measure = 1; measure >= 0; --measure) {
                double reward = 0.0;
                for (const auto& [s, w] : b.entries) reward += w * m.reward(s, a);
                if (measure == 1) reward -= m.measure_cost();

                const std::size_t k = b.size();
                std::vector<std::vector<std::vector<double>>> cands(k);
                std::int64_t combos = 1;
                for (std::size_t i = 0; i < k; ++i) {
                    cands[i] = row_candidates(m.row(b.entries[i].first, a), params.grid,
                                              params.max_nature_points);
                    combos *= static_cast<std::int64_t>(cands[i].size());
                    if (combos > params.max_nature_points)
                        throw size_error("nature grid exceeds its budget");
                }
                double worst = std::numeric_limits<double>::infinity();
                std::vector<std::size_t> pick(k, 0);
                for (std::int64_t c = 0; c < combos; ++c) {
                    std::int64_t rem = c;
                    for (std::size_t i = 0; i < k; ++i) {
                        pick[i] = static_cast<std::size_t>(
                            rem % static_cast<std::int64_t>(cands[i].size()));
                        rem /= static_cast<std::int64_t>(cands[i].size());
                    }
                    worst = std::min(worst,
                                     continuation(b, a, measure == 1, cands, pick, horizon));
                }
                best = std::max(best, reward + m.discount() * worst);
            }
        }
        return best;
    }
};

} // namespace

policy_node exact_finite_horizon_value(const ram_mdp& m, const belief& initial,
                                       const exact_params& params) {
    if (params.horizon < 0 || params.horizon > 3)
        throw std::domain_error("exhaustive search supports horizons 0 through 3");
    exact_solver solver{m, params};
    return *solver.solve(initial, params.horizon);
}

double ab_optimal_threshold() { return 0.8 * (1.0 - 1.0 / 1.8); }

lucky_unlucky_result lucky_unlucky_optimal(double p_max, double c) {
    if (p_max < 0.0 || p_max > 1.0) throw std::domain_error("p_max must lie in [0, 1]");
    if (c < 0.0) throw std::domain_error("measuring cost must be non-negative");
    const double always_risky = 1.0 - 2.0 * p_max;
    const double always_safe = 0.0;
    const double measure_then_act = (1.0 - p_max) - c;
    lucky_unlucky_result r;
    // ties side with measuring (the planners' MV >= 0 convention); the
    // tolerance keeps exact ties from rounding noise
    r.measure = measure_then_act >= std::max(always_risky, always_safe) - 1e-9;
    r.value = std::max({always_risky, always_safe, measure_then_act});
    return r;
}

double ml_regret_bound(double c, double gamma, int horizon) {
    if (gamma <= 0.0 || gamma > 1.0) throw std::domain_error("discount must lie in (0, 1]");
    if (horizon < 0) {
        if (gamma >= 1.0) return std::numeric_limits<double>::infinity();
        return c / (1.0 - gamma);
    }
    double bound = 0.0, g = 1.0;
    for (int t = 0; t < horizon; ++t) {
        bound += g * c;
        g *= gamma;
    }
    return bound;
}

bound_report theorem1_bound_check(const ram_mdp& env, const planner& base_planner,
                                  const planner& ml_planner, const nature_model& nature,
                                  int n_episodes, std::uint64_t seed, int horizon_cap) {
    bound_report rep;
    rep.episodes = n_episodes;
    rep.bound = ml_regret_bound(env.measure_cost(), env.discount(), horizon_cap);
    rep.bound_infinite = ml_regret_bound(env.measure_cost(), env.discount(), -1);

    const auto base = run_episodes(env, base_planner, nature, n_episodes, seed, horizon_cap);
    const auto lenient = run_episodes(env, ml_planner, nature, n_episodes, seed, horizon_cap);
    std::vector<double> diffs(static_cast<std::size_t>(n_episodes));
    for (int i = 0; i < n_episodes; ++i)
        diffs[static_cast<std::size_t>(i)] =
            base[static_cast<std::size_t>(i)].scalarized_return -
            lenient[static_cast<std::size_t>(i)].scalarized_return;
    const auto stat = summarize(diffs);
    rep.estimate = stat.mean;
    rep.ci_half_width = stat.ci_half_width;
    rep.margin = rep.bound + rep.ci_half_width - rep.estimate;
    rep.pass = rep.estimate - rep.ci_half_width <= rep.bound;
    rep.detail = base_planner.config().name() + " vs " + ml_planner.config().name();
    return rep;
}

} // namespace ratm::oracle
