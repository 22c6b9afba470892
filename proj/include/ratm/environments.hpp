#pragma once

#include "ratm/model.hpp"

namespace ratm::envs {

/// Two-branch environment where the worst case depends on whether the agent
/// measures: an uncertain split into a low-reward state (best action pays
/// 0.8) and a high-reward state (best action pays 1). gamma = 1.
ram_mdp build_ab(double measure_cost);

/// Uncertain split into an unlucky state (risky action pays -reward_scale)
/// and a lucky state (risky action pays +reward_scale); the safe action pays
/// 0 in both. p_max bounds the probability of the unlucky branch. gamma = 1.
ram_mdp build_lucky_unlucky(double p_max, double measure_cost, double reward_scale = 1.0);

/// Two initial states with different rows feeding the same pair of next
/// states with opposite optimal actions; the worst-case transition for a
/// mixed initial belief lies strictly inside the interval.
ram_mdp build_belief_dep();

struct snakemaze_params {
    int width = 10;
    int height = 10;
    double alpha = 1.0;
    double measure_cost = 0.01;
    double step_penalty = 0.01;
    double gamma = 0.95;
};

/// Corridor maze flattened to a path of width*height cells. Safe actions
/// advance 1 or 2 cells (p = 0.5 each); risky actions advance 3 (p = 0.6) or
/// stay (p = 0.4). Backward variants exist for each. Reaching the last cell
/// pays 1 and leads to the terminal state; every other step pays
/// -step_penalty. Uncertainty comes from the confidence level alpha.
ram_mdp build_snakemaze(const snakemaze_params& p);

/// Base transition function of the maze (no uncertainty applied).
point_model snakemaze_base_model(const snakemaze_params& p);

struct drone_params {
    double alpha = 1.0;
    double measure_cost = 0.01;
    double step_penalty = 0.01;
    double gamma = 0.95;
};

/// Discretized second-order motion through an L-shaped corridor of two
/// overlapping 6x30 rectangles. States are (x, y, vx, vy) with velocities in
/// [-5, 5]; actions are accelerations in [-2, 2] per axis; per-axis integer
/// perturbations {0: 0.68, +-1: 0.14, +-2: 0.02} multiply into at most 25
/// successors. Leaving the corridor leads to the sink; cells with y > 27 pay
/// 1 and end the episode. 39,204 states plus the sink.
ram_mdp build_drone(const drone_params& p);

point_model drone_base_model(const drone_params& p);

struct axis_outcome {
    int velocity;     // clamped next velocity
    int displacement; // cells moved along the axis
    double prob;
};

/// Per-axis outcomes for one (velocity, acceleration) pair, aggregated over
/// the perturbation distribution and sorted by (velocity, displacement).
std::vector<axis_outcome> drone_axis_outcomes(int velocity, int accel);

inline constexpr int drone_cells = 324;
inline constexpr int drone_velocities = 11; // per axis, [-5, 5]
inline constexpr int drone_states = drone_cells * drone_velocities * drone_velocities;
inline constexpr int drone_actions = 25;

bool drone_in_corridor(int x, int y);
state_id drone_state_index(int x, int y, int vx, int vy);

} // namespace ratm::envs
