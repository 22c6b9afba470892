#include "ratm/environments.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace ratm::envs {

namespace {

std::vector<row_entry> absorbing(state_id s) { return {{s, 1.0, 1.0}}; }

} // namespace

ram_mdp build_ab(double measure_cost) {
    if (measure_cost < 0.0) throw std::invalid_argument("measuring cost must be non-negative");
    // states: 0 = start, 1 = low branch, 2 = high branch, 3 = terminal
    // actions: 0 = a, 1 = b (the start state ignores the choice)
    ram_mdp_builder b(4, 2);
    b.set_measure_cost(measure_cost);
    b.set_discount(1.0);
    b.set_initial_state(0);
    b.add_terminal(3);
    for (action_id a = 0; a < 2; ++a)
        b.add_row(0, a, {{1, 0.0, 1.0}, {2, 0.0, 1.0}}, 0.0);
    b.add_row(1, 0, absorbing(3), 0.8);
    b.add_row(1, 1, absorbing(3), 0.0);
    b.add_row(2, 0, absorbing(3), 0.0);
    b.add_row(2, 1, absorbing(3), 1.0);
    for (action_id a = 0; a < 2; ++a) b.add_row(3, a, absorbing(3), 0.0);
    return std::move(b).build();
}

ram_mdp build_lucky_unlucky(double p_max, double measure_cost, double reward_scale) {
    if (p_max < 0.0 || p_max > 1.0) throw std::invalid_argument("p_max must lie in [0, 1]");
    if (measure_cost < 0.0) throw std::invalid_argument("measuring cost must be non-negative");
    // states: 0 = start, 1 = unlucky, 2 = lucky, 3 = terminal
    ram_mdp_builder b(4, 2);
    b.set_measure_cost(measure_cost);
    b.set_discount(1.0);
    b.set_initial_state(0);
    b.add_terminal(3);
    for (action_id a = 0; a < 2; ++a)
        b.add_row(0, a, {{1, 0.0, p_max}, {2, 1.0 - p_max, 1.0}}, 0.0);
    b.add_row(1, 0, absorbing(3), -reward_scale);
    b.add_row(1, 1, absorbing(3), 0.0);
    b.add_row(2, 0, absorbing(3), reward_scale);
    b.add_row(2, 1, absorbing(3), 0.0);
    for (action_id a = 0; a < 2; ++a) b.add_row(3, a, absorbing(3), 0.0);
    return std::move(b).build();
}

ram_mdp build_belief_dep() {
    // states: 0, 1 = initial pair, 2 = s-, 3 = s+, 4 = terminal
    ram_mdp_builder b(5, 2);
    b.set_measure_cost(0.2);
    b.set_discount(1.0);
    b.set_initial_state(0);
    b.add_terminal(4);
    for (action_id a = 0; a < 2; ++a) b.add_row(0, a, {{2, 1.0, 1.0}}, 0.0);
    for (action_id a = 0; a < 2; ++a)
        b.add_row(1, a, {{2, 0.0, 1.0}, {3, 0.0, 1.0}}, 0.0);
    b.add_row(2, 0, absorbing(4), 1.0);
    b.add_row(2, 1, absorbing(4), 0.0);
    b.add_row(3, 0, absorbing(4), 0.0);
    b.add_row(3, 1, absorbing(4), 1.0);
    for (action_id a = 0; a < 2; ++a) b.add_row(4, a, absorbing(4), 0.0);
    return std::move(b).build();
}

point_model snakemaze_base_model(const snakemaze_params& p) {
    const int cells = p.width * p.height;
    if (cells < 2) throw std::invalid_argument("maze needs at least two cells");
    const state_id goal = cells - 1;
    const state_id terminal = cells;
    // actions: 0 = safe forward, 1 = safe backward, 2 = risky forward,
    // 3 = risky backward
    point_model_builder b(cells + 1, 4);
    b.set_measure_cost(p.measure_cost);
    b.set_discount(p.gamma);
    b.set_initial_state(0);
    b.add_terminal(terminal);

    auto clamped = [cells](int pos) { return std::clamp(pos, 0, cells - 1); };
    for (state_id s = 0; s <= terminal; ++s) {
        for (action_id a = 0; a < 4; ++a) {
            if (s == terminal) {
                b.add_row(s, a, {{terminal, 1.0}}, 0.0);
                continue;
            }
            if (s == goal) {
                b.add_row(s, a, {{terminal, 1.0}}, 1.0);
                continue;
            }
            const int dir = (a == 0 || a == 2) ? 1 : -1;
            std::vector<std::pair<state_id, double>> entries;
            auto push = [&](int pos, double prob) {
                const state_id sp = clamped(pos);
                for (auto& e : entries)
                    if (e.first == sp) {
                        e.second += prob;
                        return;
                    }
                entries.emplace_back(sp, prob);
            };
            if (a < 2) { // safe: one or two cells
                push(s + dir, 0.5);
                push(s + 2 * dir, 0.5);
            } else { // risky: three cells or stay
                push(s + 3 * dir, 0.6);
                push(s, 0.4);
            }
            b.add_row(s, a, std::move(entries), -p.step_penalty);
        }
    }
    return std::move(b).build();
}

ram_mdp build_snakemaze(const snakemaze_params& p) {
    return intervals_from_confidence(snakemaze_base_model(p), p.alpha);
}

namespace {

constexpr int kVMax = 5;
constexpr int kAMax = 2;

constexpr std::array<std::pair<int, double>, 5> kPerturbations{{
    {-2, 0.02},
    {-1, 0.14},
    {0, 0.68},
    {1, 0.14},
    {2, 0.02},
}};

int floor_div2(int v) { return v >= 0 ? v / 2 : (v - 1) / 2; }

// cell indices in (y, x) scan order over the corridor
struct corridor_table {
    std::array<std::array<int, 30>, 30> index;
    corridor_table() {
        int next = 0;
        for (int y = 0; y < 30; ++y)
            for (int x = 0; x < 30; ++x)
                index[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] =
                    drone_in_corridor(x, y) ? next++ : -1;
    }
};

const corridor_table& corridor() {
    static const corridor_table t;
    return t;
}

} // namespace

bool drone_in_corridor(int x, int y) {
    if (x < 0 || y < 0) return false;
    return (x < 30 && y < 6) || (x < 6 && y < 30);
}

state_id drone_state_index(int x, int y, int vx, int vy) {
    const int cell = corridor().index[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
    return static_cast<state_id>((cell * drone_velocities + (vx + kVMax)) * drone_velocities +
                                 (vy + kVMax));
}

std::vector<axis_outcome> drone_axis_outcomes(int velocity, int accel) {
    std::vector<axis_outcome> out;
    for (const auto& [w, prob] : kPerturbations) {
        const int v_next = std::clamp(velocity + accel + w, -kVMax, kVMax);
        const int disp = floor_div2(velocity + v_next);
        bool merged = false;
        for (auto& o : out)
            if (o.velocity == v_next && o.displacement == disp) {
                o.prob += prob;
                merged = true;
                break;
            }
        if (!merged) out.push_back({v_next, disp, prob});
    }
    std::sort(out.begin(), out.end(), [](const axis_outcome& a, const axis_outcome& b) {
        return a.velocity != b.velocity ? a.velocity < b.velocity
                                        : a.displacement < b.displacement;
    });
    return out;
}

point_model drone_base_model(const drone_params& p) {
    const state_id sink = drone_states;
    point_model_builder b(drone_states + 1, drone_actions);
    b.set_measure_cost(p.measure_cost);
    b.set_discount(p.gamma);
    b.set_initial_state(drone_state_index(29, 2, 0, 0));
    b.add_terminal(sink);

    // per-axis outcome table over (velocity, acceleration)
    std::array<std::vector<axis_outcome>, drone_velocities * 5> axis;
    for (int v = -kVMax; v <= kVMax; ++v)
        for (int a = -kAMax; a <= kAMax; ++a)
            axis[static_cast<std::size_t>((v + kVMax) * 5 + (a + kAMax))] =
                drone_axis_outcomes(v, a);

    std::vector<std::pair<state_id, double>> entries;
    for (int y = 0; y < 30; ++y) {
        for (int x = 0; x < 30; ++x) {
            if (!drone_in_corridor(x, y)) continue;
            const bool goal = y > 27;
            for (int vx = -kVMax; vx <= kVMax; ++vx) {
                for (int vy = -kVMax; vy <= kVMax; ++vy) {
                    for (int ax = -kAMax; ax <= kAMax; ++ax) {
                        for (int ay = -kAMax; ay <= kAMax; ++ay) {
                            const auto a = static_cast<action_id>((ax + kAMax) * 5 +
                                                                  (ay + kAMax));
                            const auto s = drone_state_index(x, y, vx, vy);
                            if (goal) {
                                b.add_row(s, a, {{sink, 1.0}}, 1.0);
                                continue;
                            }
                            entries.clear();
                            double sink_mass = 0.0;
                            const auto& ox =
                                axis[static_cast<std::size_t>((vx + kVMax) * 5 + (ax + kAMax))];
                            const auto& oy =
                                axis[static_cast<std::size_t>((vy + kVMax) * 5 + (ay + kAMax))];
                            for (const auto& exo : ox) {
                                for (const auto& eyo : oy) {
                                    const double prob = exo.prob * eyo.prob;
                                    const int nx = x + exo.displacement;
                                    const int ny = y + eyo.displacement;
                                    if (!drone_in_corridor(nx, ny)) {
                                        sink_mass += prob;
                                        continue;
                                    }
                                    entries.emplace_back(
                                        drone_state_index(nx, ny, exo.velocity, eyo.velocity),
                                        prob);
                                }
                            }
                            if (sink_mass > 0.0) entries.emplace_back(sink, sink_mass);
                            b.add_row(s, a, entries, -p.step_penalty);
                        }
                    }
                }
            }
        }
    }
    for (action_id a = 0; a < drone_actions; ++a) b.add_row(sink, a, {{sink, 1.0}}, 0.0);
    return std::move(b).build();
}

ram_mdp build_drone(const drone_params& p) {
    return intervals_from_confidence(drone_base_model(p), p.alpha);
}

} // namespace ratm::envs
