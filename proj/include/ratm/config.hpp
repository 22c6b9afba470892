#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ratm/exceptions.hpp"

namespace ratm {

/**
 * One experiment: an environment, a single parameter sweep, a planner list
 * and the batch settings. Loaded from a TOML file of flat `key = value`
 * pairs (strings, numbers, booleans and single-line arrays).
 *
 * Keys: env, sweep ("c" | "p_max" | "alpha" | "misspec"), values,
 * planners, episodes, seed, horizon, jobs, nature ("rmdp-worst" |
 * "average"), output, planning_alpha (misspec only) and the environment
 * parameters c, p_max, reward_scale, width, height, alpha, step_penalty,
 * gamma.
 */
struct experiment_config {
    std::string env;
    std::string sweep;
    std::vector<double> values;
    std::vector<std::string> planners;
    int episodes = 50;
    std::uint64_t seed = 1;
    int horizon = 0; // 0 = environment default
    int jobs = 0;    // 0 = hardware concurrency
    std::string nature = "rmdp-worst";
    std::string output;
    double planning_alpha = 0.0;

    // environment parameters
    double c = 0.0;
    double p_max = 1.0;
    double reward_scale = 1.0;
    int width = 10;
    int height = 10;
    double alpha = 1.0;
    double step_penalty = 0.01;
    double gamma = 0.95;

    /// Parses and validates; throws config_error with a diagnostic.
    static experiment_config load_file(const std::string& path);
    static experiment_config parse(const std::string& text);

    void validate() const;
};

} // namespace ratm
