#include <doctest.h>

#include <cmath>

#include "ratm/environments.hpp"
#include "ratm/model.hpp"

using namespace ratm;

namespace {

ram_mdp tiny_model(std::vector<row_entry> row0, std::vector<row_entry> row1 = {}) {
    // two states, one action, state 1 absorbing terminal
    ram_mdp_builder b(2, 1);
    b.add_terminal(1);
    b.add_row(0, 0, std::move(row0), 0.0);
    if (row1.empty()) row1 = {{1, 1.0, 1.0}};
    b.add_row(1, 0, std::move(row1), 0.0);
    return std::move(b).build();
}

point_model two_state_point(double p0, double p1) {
    point_model_builder b(2, 1);
    b.add_terminal(1);
    b.add_row(0, 0, {{0, p0}, {1, p1}}, 0.0);
    b.add_row(1, 0, {{1, 1.0}}, 0.0);
    return std::move(b).build();
}

} // namespace

TEST_CASE("validation accepts the two-branch environment") {
    CHECK(validate_model(envs::build_ab(0.2)).ok());
}

TEST_CASE("validation flags a row whose lower bounds exceed one") {
    const auto m = tiny_model({{0, 0.6, 0.7}, {1, 0.6, 0.7}});
    const auto rep = validate_model(m);
    REQUIRE_FALSE(rep.ok());
    bool found = false;
    for (const auto& issue : rep.issues)
        if (issue.message == "row infeasible" && issue.s == 0) found = true;
    CHECK(found);
}

TEST_CASE("validation flags inverted intervals") {
    const auto m = tiny_model({{0, 0.5, 0.4}, {1, 0.0, 1.0}});
    const auto rep = validate_model(m);
    REQUIRE_FALSE(rep.ok());
    bool found = false;
    for (const auto& issue : rep.issues)
        if (issue.message == "lo>hi") found = true;
    CHECK(found);
}

TEST_CASE("validation flags terminal states without absorbing self-loops") {
    ram_mdp_builder b(2, 1);
    b.add_terminal(1);
    b.add_row(0, 0, {{1, 1.0, 1.0}}, 0.0);
    b.add_row(1, 0, {{0, 0.0, 1.0}, {1, 0.0, 1.0}}, 0.0);
    const auto m = std::move(b).build();
    const auto rep = validate_model(m);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.issues.front().message == "terminal state lacks a [1,1] self-loop");
}

TEST_CASE("confidence intervals match the hand-computed values") {
    SUBCASE("alpha one keeps the base probability as the upper bound") {
        const auto m = intervals_from_confidence(two_state_point(0.68, 0.32), 1.0);
        const auto row = m.row(0, 0);
        CHECK(row.lo_at(0) == 0.0);
        CHECK(row.hi[0] == doctest::Approx(0.68).epsilon(1e-15));
    }
    SUBCASE("upper bounds clamp at one") {
        const auto m = intervals_from_confidence(two_state_point(0.6, 0.4), 0.5);
        CHECK(m.row(0, 0).hi[0] == 1.0);
    }
    SUBCASE("p=0.14 at alpha=0.7 gives 0.2") {
        const auto m = intervals_from_confidence(two_state_point(0.14, 0.86), 0.7);
        CHECK(m.row(0, 0).hi[0] == doctest::Approx(0.2).epsilon(1e-12));
    }
    SUBCASE("alpha outside (0, 1] is rejected") {
        CHECK_THROWS_AS(intervals_from_confidence(two_state_point(0.5, 0.5), 0.0),
                        std::domain_error);
        CHECK_THROWS_AS(intervals_from_confidence(two_state_point(0.5, 0.5), 1.5),
                        std::domain_error);
        CHECK_THROWS_AS(intervals_from_confidence(two_state_point(0.5, 0.5), -0.2),
                        std::domain_error);
    }
}

TEST_CASE("the base distribution stays feasible inside its confidence intervals") {
    for (double alpha : {1.0, 0.8, 0.5, 0.3}) {
        const auto base = two_state_point(0.14, 0.86);
        const auto m = intervals_from_confidence(base, alpha);
        const auto row = m.row(0, 0);
        const auto prow = base.row(0, 0);
        double total = 0.0;
        for (std::size_t i = 0; i < row.size(); ++i) {
            CHECK(prow.prob[i] >= row.lo_at(i));
            CHECK(prow.prob[i] <= row.hi[i] + 1e-15);
            total += prow.prob[i];
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("confidence widening keeps terminal rows absorbing") {
    const auto m = intervals_from_confidence(two_state_point(0.5, 0.5), 0.4);
    CHECK(validate_model(m).ok());
    const auto row = m.row(1, 0);
    CHECK(row.lo_at(0) == 1.0);
    CHECK(row.hi[0] == 1.0);
}

TEST_CASE("interval midpoints of a symmetric row average to the uniform split") {
    const auto m = tiny_model({{0, 0.0, 1.0}, {1, 0.0, 1.0}});
    const auto avg = average_point_model(m);
    const auto row = avg.model.row(0, 0);
    CHECK(row.prob[0] == doctest::Approx(0.5));
    CHECK(row.prob[1] == doctest::Approx(0.5));
}

TEST_CASE("averaging point intervals is the identity") {
    const auto m = tiny_model({{0, 0.3, 0.3}, {1, 0.7, 0.7}});
    const auto avg = average_point_model(m);
    CHECK_FALSE(avg.renormalized);
    CHECK(avg.model.row(0, 0).prob[0] == 0.3);
    CHECK(avg.model.row(0, 0).prob[1] == 0.7);
}

TEST_CASE("averaging renormalizes and reports it when midpoints do not sum to one") {
    // [0, p] rows have midpoints p/2; rescaling must restore the base
    const auto m = intervals_from_confidence(two_state_point(0.68, 0.32), 1.0);
    const auto avg = average_point_model(m);
    CHECK(avg.renormalized);
    CHECK(avg.model.row(0, 0).prob[0] == doctest::Approx(0.68).epsilon(1e-12));
    CHECK(avg.model.row(0, 0).prob[1] == doctest::Approx(0.32).epsilon(1e-12));
}

TEST_CASE("averaging the uncertain split keeps the row a distribution") {
    const auto m = envs::build_lucky_unlucky(0.6, 0.2);
    const auto avg = average_point_model(m);
    const auto row = avg.model.row(0, 0);
    CHECK(row.prob[0] == doctest::Approx(0.3));
    CHECK(row.prob[1] == doctest::Approx(0.7));
    double total = 0.0;
    for (double p : row.prob) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("scalarized rewards subtract the cost only when measuring") {
    const auto m = envs::build_lucky_unlucky(1.0, 0.2);
    CHECK(scalarized_reward(m, 2, {0, true}) == doctest::Approx(0.8));
    CHECK(scalarized_reward(m, 0, {0, false}) == 0.0);

    ram_mdp_builder b(2, 1);
    b.set_measure_cost(0.01);
    b.add_terminal(1);
    b.add_row(0, 0, {{1, 1.0, 1.0}}, -0.01);
    b.add_row(1, 0, {{1, 1.0, 1.0}}, 0.0);
    const auto maze_like = std::move(b).build();
    CHECK(scalarized_reward(maze_like, 0, {0, true}) == doctest::Approx(-0.02));
}

TEST_CASE("beliefs reject mass away from one and prune zeros") {
    CHECK_THROWS_AS(belief::from_entries({{0, 0.5}, {1, 0.4}}), contract_error);
    const auto b = belief::from_entries({{1, 0.5}, {0, 0.5}, {2, 0.0}});
    REQUIRE(b.size() == 2);
    CHECK(b.entries[0].first == 0);
    CHECK(b.at(2) == 0.0);
    CHECK(b.sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("belief entropy of a delta is zero") {
    CHECK(belief::delta(3).entropy() == 0.0);
    const auto b = belief::from_entries({{0, 0.5}, {1, 0.5}});
    CHECK(b.entropy() == doctest::Approx(std::log(2.0)));
}

TEST_CASE("builders reject malformed input") {
    ram_mdp_builder b(2, 1);
    CHECK_THROWS_AS(b.add_row(1, 0, {{0, 0.0, 1.0}}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(b.add_row(0, 0, {{0, 0.0, 1.0}, {0, 0.0, 1.0}}, 0.0),
                    std::invalid_argument);
    ram_mdp_builder c(2, 1);
    c.add_row(0, 0, {{1, 1.0, 1.0}}, 0.0);
    CHECK_THROWS_AS(std::move(c).build(), std::invalid_argument);
}
