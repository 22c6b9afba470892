#include <doctest.h>

#include <memory>
#include <random>
#include <sstream>

#include "ratm/environments.hpp"
#include "ratm/kernels.hpp"
#include "ratm/oracle.hpp"
#include "ratm/solvers.hpp"
#include "test_util.hpp"

using namespace ratm;

namespace {

ram_mdp row_holder(std::vector<row_entry> entries, std::int32_t num_states) {
    // wraps one uncertain row so it can be viewed through the model API
    ram_mdp_builder b(num_states, 1);
    b.add_row(0, 0, std::move(entries), 0.0);
    for (state_id s = 1; s < num_states; ++s) b.add_row(s, 0, {{s, 1.0, 1.0}}, 0.0);
    return std::move(b).build();
}

std::shared_ptr<const ram_mdp> shared(ram_mdp m) {
    return std::make_shared<const ram_mdp>(std::move(m));
}

} // namespace

TEST_CASE("the greedy worst case routes mass to the cheapest successors") {
    const auto m = row_holder({{1, 0.0, 0.6}, {2, 0.0, 0.6}, {3, 0.0, 0.6}}, 4);
    const std::vector<double> values{0.0, 1.0, 0.0, 0.5};
    const auto wc = inner_worst_expectation(m.row(0, 0), values);
    CHECK(wc.value == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(wc.dist[0] == doctest::Approx(0.0));
    CHECK(wc.dist[1] == doctest::Approx(0.6));
    CHECK(wc.dist[2] == doctest::Approx(0.4));
    const auto ref = oracle::inner_worst_by_enumeration(m.row(0, 0), values);
    CHECK(wc.value == doctest::Approx(ref.value).epsilon(1e-12));
}

TEST_CASE("the greedy best case mirrors the worst case") {
    const auto m = row_holder({{1, 0.0, 0.6}, {2, 0.0, 0.6}, {3, 0.0, 0.6}}, 4);
    const std::vector<double> values{0.0, 1.0, 0.0, 0.5};
    const auto bc = inner_best_expectation(m.row(0, 0), values);
    CHECK(bc.value == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(bc.dist[0] == doctest::Approx(0.6));
    CHECK(bc.dist[2] == doctest::Approx(0.4));
}

TEST_CASE("point intervals leave nature no freedom") {
    const auto m = row_holder({{1, 0.25, 0.25}, {2, 0.75, 0.75}}, 3);
    const std::vector<double> values{0.0, 2.0, -1.0};
    const double expected = 0.25 * 2.0 + 0.75 * -1.0;
    CHECK(inner_worst_expectation(m.row(0, 0), values).value == doctest::Approx(expected));
    CHECK(inner_best_expectation(m.row(0, 0), values).value == doctest::Approx(expected));
}

TEST_CASE("a constant value function makes every feasible row equivalent") {
    const auto m = row_holder({{1, 0.1, 0.9}, {2, 0.1, 0.9}}, 3);
    const std::vector<double> values{3.0, 3.0, 3.0};
    CHECK(inner_best_expectation(m.row(0, 0), values).value == doctest::Approx(3.0));
    CHECK(inner_worst_expectation(m.row(0, 0), values).value == doctest::Approx(3.0));
}

TEST_CASE("the uncertain split sends the largest allowed mass to the bad branch") {
    const auto m = row_holder({{1, 0.0, 0.6}, {2, 0.0, 1.0}}, 3);
    const std::vector<double> values{0.0, -1.0, 1.0};
    const auto wc = inner_worst_expectation(m.row(0, 0), values);
    CHECK(wc.dist[0] == doctest::Approx(0.6));
    CHECK(wc.dist[1] == doctest::Approx(0.4));
}

TEST_CASE("infeasible rows raise a feasibility error") {
    const std::vector<double> values{0.0, 0.0, 0.0};
    const auto too_low = row_holder({{1, 0.0, 0.3}, {2, 0.0, 0.3}}, 3);
    CHECK_THROWS_AS(inner_worst_expectation(too_low.row(0, 0), values), feasibility_error);
    const auto too_high = row_holder({{1, 0.7, 0.9}, {2, 0.7, 0.9}}, 3);
    CHECK_THROWS_AS(inner_worst_expectation(too_high.row(0, 0), values), feasibility_error);
}

TEST_CASE("greedy inner solutions equal exhaustive vertex enumeration") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> val(-2.0, 2.0);
    for (int trial = 0; trial < 300; ++trial) {
        const auto entries = test::random_feasible_row(rng, 6, 4);
        const auto m = row_holder(entries, 6);
        std::vector<double> values(6);
        for (auto& v : values) v = val(rng);
        const auto row = m.row(0, 0);
        const auto worst = inner_worst_expectation(row, values);
        const auto best = inner_best_expectation(row, values);
        CHECK(worst.value ==
              doctest::Approx(oracle::inner_worst_by_enumeration(row, values).value)
                  .epsilon(1e-9));
        CHECK(best.value ==
              doctest::Approx(oracle::inner_best_by_enumeration(row, values).value)
                  .epsilon(1e-9));

        // every sampled feasible point sits between the two extremes
        for (int draw = 0; draw < 20; ++draw) {
            const auto p = test::random_feasible_point(rng, row);
            const double e =
                kernels::scalar::dot_indexed(values.data(), row.succ.data(), p.data(), p.size());
            CHECK(e >= worst.value - 1e-9);
            CHECK(e <= best.value + 1e-9);
        }
    }
}

TEST_CASE("robust values of the two-branch environment match enumeration") {
    const auto m = shared(envs::build_ab(0.2));
    const auto sol = solve_robust(m);

    // independent two-step reference: terminal values are zero, the branch
    // states pay their best action, and the split row is minimized over its
    // vertices
    const double v_low = std::max(0.8, 0.0);
    const double v_high = std::max(0.0, 1.0);
    double q0 = std::numeric_limits<double>::infinity();
    for (const auto& p : oracle::enumerate_row_vertices(m->row(0, 0)))
        q0 = std::min(q0, p[0] * v_low + p[1] * v_high);

    CHECK(sol.q().at(1, 0) == doctest::Approx(0.8));
    CHECK(sol.q().at(1, 1) == doctest::Approx(0.0));
    CHECK(sol.q().at(2, 0) == doctest::Approx(0.0));
    CHECK(sol.q().at(2, 1) == doctest::Approx(1.0));
    CHECK(sol.q().at(0, 0) == doctest::Approx(q0));
    CHECK(sol.q().at(0, 0) == doctest::Approx(0.8));
    CHECK(sol.q().at(3, 0) == 0.0); // terminal pinned to zero
    CHECK(sol.state_values()[0] == doctest::Approx(0.8));

    // the realized worst-case row routes everything to the low branch
    const auto wc = sol.transition_row(0, 0);
    CHECK(wc.dist[0] == doctest::Approx(1.0));
    CHECK(wc.dist[1] == doctest::Approx(0.0));
}

TEST_CASE("degenerate intervals make all three solvers agree") {
    std::mt19937_64 rng(17);
    // random point model wrapped as [p, p] intervals
    const auto interval = test::random_model(rng, 6, 2, 0.9, 3);
    const auto avg = average_point_model(interval);
    const auto degenerate = shared(avg.model.as_degenerate_ram_mdp());
    const auto robust = solve_robust(degenerate);
    const auto optimistic = solve_optimistic(degenerate);
    const auto exact = solve_exact(std::make_shared<const point_model>(avg.model));
    for (std::size_t i = 0; i < robust.q().values.size(); ++i) {
        CHECK(robust.q().values[i] == doctest::Approx(optimistic.q().values[i]).epsilon(1e-8));
        CHECK(robust.q().values[i] == doctest::Approx(exact.q().values[i]).epsilon(1e-8));
    }
}

TEST_CASE("a two-state chain reaches the scalar fixed point") {
    // advance with probability in [0.5, 1] to a state paying 1, else stay
    ram_mdp_builder b(3, 1);
    b.set_discount(0.9);
    b.add_terminal(2);
    b.add_row(0, 0, {{0, 0.0, 0.5}, {1, 0.5, 1.0}}, 0.0);
    b.add_row(1, 0, {{2, 1.0, 1.0}}, 1.0);
    b.add_row(2, 0, {{2, 1.0, 1.0}}, 0.0);
    const auto sol = solve_robust(shared(std::move(b).build()));

    double ref = 0.0; // scalar fixed-point iteration of x = 0.9 (0.5 * 1 + 0.5 x)
    for (int i = 0; i < 400; ++i) ref = 0.9 * (0.5 * 1.0 + 0.5 * ref);
    CHECK(sol.state_values()[0] == doctest::Approx(ref).epsilon(1e-7));
    CHECK(sol.state_values()[1] == doctest::Approx(1.0));
}

TEST_CASE("undiscounted models without terminal access fail loudly") {
    ram_mdp_builder b(1, 1);
    b.set_discount(1.0);
    b.add_row(0, 0, {{0, 1.0, 1.0}}, 1.0);
    solve_options opts;
    opts.max_iter = 64;
    CHECK_THROWS_AS(solve_robust(shared(std::move(b).build()), opts), divergence_error);
}

TEST_CASE("value iteration contracts monotonically under discounting") {
    std::mt19937_64 rng(23);
    const auto m = test::random_model(rng, 8, 3, 0.9);
    // re-run the backup loop through the public inner op and watch the
    // sup-norm change shrink
    std::vector<double> v(8, 0.0), v_next(8, 0.0);
    double prev_delta = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 30; ++iter) {
        double delta = 0.0;
        for (state_id s = 0; s < 8; ++s) {
            if (m.is_terminal(s)) continue;
            double best = -std::numeric_limits<double>::infinity();
            for (action_id a = 0; a < 3; ++a)
                best = std::max(best, m.reward(s, a) +
                                          0.9 * inner_worst_expectation(m.row(s, a), v).value);
            delta = std::max(delta, std::abs(best - v[s]));
            v_next[static_cast<std::size_t>(s)] = best;
        }
        v = v_next;
        CHECK(delta <= prev_delta + 1e-12);
        prev_delta = delta;
    }
}

TEST_CASE("pessimistic, average and optimistic values are ordered") {
    std::mt19937_64 rng(29);
    int checked = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = shared(test::random_model(rng, 7, 2, 0.85));
        const auto avg = average_point_model(*m);

        // ordering only holds when the averaged model stays inside the rows
        bool feasible = true;
        for (state_id s = 0; s < m->num_states() && feasible; ++s)
            for (action_id a = 0; a < m->num_actions() && feasible; ++a) {
                const auto row = m->row(s, a);
                const auto prow = avg.model.row(s, a);
                for (std::size_t i = 0; i < row.size(); ++i)
                    if (prow.prob[i] < row.lo_at(i) - 1e-12 ||
                        prow.prob[i] > row.hi[i] + 1e-12)
                        feasible = false;
            }
        if (!feasible) continue;
        ++checked;
        const auto robust = solve_robust(m);
        const auto exact = solve_exact(std::make_shared<const point_model>(avg.model));
        const auto optimistic = solve_optimistic(m);
        for (std::size_t i = 0; i < robust.q().values.size(); ++i) {
            CHECK(robust.q().values[i] <= exact.q().values[i] + 1e-7);
            CHECK(exact.q().values[i] <= optimistic.q().values[i] + 1e-7);
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("belief transport through deterministic rows is exact") {
    const auto m = envs::build_belief_dep();
    const belief b = belief::delta(0);
    const auto row = inner_worst_expectation(m.row(0, 0), std::vector<double>(5, 0.0));
    const auto next = robust_belief_update(m, b, 0, std::span(&row, 1));
    REQUIRE(next.size() == 1);
    CHECK(next.entries[0].first == 2);
    CHECK(next.entries[0].second == 1.0);
}

TEST_CASE("the equalizing worst case yields the anchored next belief") {
    const auto m = shared(envs::build_ab(0.2));
    const auto sol = solve_robust(m);
    const auto game = worst_case_transition_nomeasure(*m, belief::delta(0), 0, sol);
    CHECK(game.game_value == doctest::Approx(0.8 / 1.8).epsilon(1e-9));
    const auto next = robust_belief_update(*m, belief::delta(0), 0, game.rows);
    REQUIRE(next.size() == 2);
    CHECK(next.entries[0].first == 1);
    CHECK(next.entries[0].second == doctest::Approx(1.0 / 1.8).epsilon(1e-9));
    CHECK(next.entries[1].second == doctest::Approx(0.8 / 1.8).epsilon(1e-9));
}

TEST_CASE("mixing identical rows is the same as transporting one of them") {
    // two states sharing the same uncertain row under the worst case
    ram_mdp_builder b(4, 1);
    b.set_discount(1.0);
    b.add_terminal(3);
    const std::vector<row_entry> split{{2, 0.25, 0.25}, {3, 0.75, 0.75}};
    b.add_row(0, 0, split, 0.0);
    b.add_row(1, 0, split, 0.0);
    b.add_row(2, 0, {{3, 1.0, 1.0}}, 0.0);
    b.add_row(3, 0, {{3, 1.0, 1.0}}, 0.0);
    const auto m = std::move(b).build();

    const std::vector<double> values(4, 0.0);
    const auto single = inner_worst_expectation(m.row(0, 0), values);
    std::vector<worst_case_row> rows{single, single};
    const auto mixed = robust_belief_update(m, belief::from_entries({{0, 0.5}, {1, 0.5}}), 0,
                                            rows);
    REQUIRE(mixed.size() == 2);
    CHECK(mixed.at(2) == doctest::Approx(0.25));
    CHECK(mixed.at(3) == doctest::Approx(0.75));
}

TEST_CASE("point rows collapse the game to a plain best response") {
    std::mt19937_64 rng(31);
    const auto base = average_point_model(test::random_model(rng, 6, 3, 0.9)).model;
    const auto m = shared(base.as_degenerate_ram_mdp());
    const auto sol = solve_robust(m);
    const belief b = belief::from_entries({{0, 0.5}, {1, 0.5}});
    const auto game = worst_case_transition_nomeasure(*m, b, 0, sol);

    // the unique feasible rows are the point rows themselves
    for (std::size_t i = 0; i < b.size(); ++i) {
        const auto row = m->row(b.entries[i].first, 0);
        for (std::size_t j = 0; j < row.size(); ++j)
            CHECK(game.rows[i].dist[j] == doctest::Approx(row.hi[j]));
    }
    double best = -std::numeric_limits<double>::infinity();
    for (action_id ab = 0; ab < m->num_actions(); ++ab) {
        double v = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i) {
            const auto row = m->row(b.entries[i].first, 0);
            for (std::size_t j = 0; j < row.size(); ++j)
                v += b.entries[i].second * row.hi[j] * sol.q().at(row.succ[j], ab);
        }
        best = std::max(best, v);
    }
    CHECK(game.game_value == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("the uncertain split game equalizes or saturates") {
    const auto m = shared(envs::build_lucky_unlucky(0.6, 0.2));
    const auto sol = solve_robust(m);
    const auto game = worst_case_transition_nomeasure(*m, belief::delta(0), 0, sol);
    CHECK(game.game_value == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("the game is a saddle point on random instances") {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 40; ++trial) {
        const auto m = shared(test::random_model(rng, 7, 3, 0.9));
        const auto sol = solve_robust(m);
        std::vector<std::pair<state_id, double>> raw;
        const int support = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < support; ++i)
            raw.emplace_back(static_cast<state_id>(rng() % 6), 1.0);
        for (auto& e : raw) e.second = 1.0 / static_cast<double>(raw.size());
        belief b;
        try {
            b = belief::from_entries(std::move(raw));
        } catch (const contract_error&) {
            continue;
        }
        const action_id a = static_cast<action_id>(rng() % 3);
        const auto game = worst_case_transition_nomeasure(*m, b, a, sol);

        // the reported value is the best response against the returned rows
        std::vector<double> resp(3, 0.0);
        for (std::size_t i = 0; i < b.size(); ++i) {
            const auto row = m->row(b.entries[i].first, a);
            for (std::size_t j = 0; j < row.size(); ++j)
                for (action_id ab = 0; ab < 3; ++ab)
                    resp[static_cast<std::size_t>(ab)] += b.entries[i].second *
                                                          game.rows[i].dist[j] *
                                                          sol.q().at(row.succ[j], ab);
        }
        const double best_resp = *std::max_element(resp.begin(), resp.end());
        CHECK(game.game_value == doctest::Approx(best_resp).epsilon(1e-6));

        // no sampled nature choice lets the agent do worse
        for (int draw = 0; draw < 50; ++draw) {
            std::vector<double> sampled(3, 0.0);
            for (std::size_t i = 0; i < b.size(); ++i) {
                const auto row = m->row(b.entries[i].first, a);
                const auto p = test::random_feasible_point(rng, row);
                for (std::size_t j = 0; j < row.size(); ++j)
                    for (action_id ab = 0; ab < 3; ++ab)
                        sampled[static_cast<std::size_t>(ab)] +=
                            b.entries[i].second * p[j] * sol.q().at(row.succ[j], ab);
            }
            const double sampled_best = *std::max_element(sampled.begin(), sampled.end());
            CHECK(game.game_value <= sampled_best + 1e-6);
        }

        // fully observable worst case, evaluated per state, is an upper bound
        double decomposed = 0.0;
        for (const auto& [s, w] : b.entries) {
            const auto wc = sol.transition_row(s, a);
            const auto row = m->row(s, a);
            double best = -std::numeric_limits<double>::infinity();
            for (action_id ab = 0; ab < 3; ++ab) {
                double v = 0.0;
                for (std::size_t j = 0; j < row.size(); ++j)
                    v += wc.dist[j] * sol.q().at(row.succ[j], ab);
                best = std::max(best, v);
            }
            decomposed += w * best;
        }
        CHECK(game.game_value <= decomposed + 1e-6);
    }
}

TEST_CASE("q-tables export as csv") {
    const auto sol = solve_robust(shared(envs::build_ab(0.1)));
    std::ostringstream out;
    sol.q().write_csv(out);
    const auto text = out.str();
    CHECK(text.rfind("s,a,value\n", 0) == 0);
    CHECK(text.find("1,1,0\n") != std::string::npos);
    CHECK(text.find("2,1,1\n") != std::string::npos);
}
