#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "ratm/model.hpp"
#include "ratm/planners.hpp"
#include "ratm/solvers.hpp"

namespace ratm {

/// splitmix64 mix of a base seed and a stream tag.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Deterministic uniform stream; sampling walks an explicit CDF so results
/// do not depend on the standard library's distribution implementations.
struct rng_stream {
    explicit rng_stream(std::uint64_t seed) : gen(seed) {}
    double uniform() {
        // 53-bit mantissa in [0, 1)
        return static_cast<double>(gen() >> 11) * 0x1.0p-53;
    }
    std::mt19937_64 gen;
};

/**
 * The transition law the episode actually follows. The adversarial variant
 * samples from the worst-case rows of the true model (solved once at
 * construction); the average variant samples interval midpoints; a point
 * model can be supplied directly.
 */
class nature_model {
public:
    static nature_model rmdp_worst(std::shared_ptr<const ram_mdp> true_model,
                                   solve_options opts = {});
    static nature_model average(std::shared_ptr<const ram_mdp> true_model);
    static nature_model point(std::shared_ptr<const point_model> pm);

    state_id sample(state_id s, action_id a, rng_stream& rng) const;

private:
    nature_model() = default;
    std::shared_ptr<const robust_solution> sol_;
    std::shared_ptr<const point_model> pm_;
};

struct step_record {
    int t = 0;
    action_id control = 0;
    bool measure = false;
    double mv_robust = 0.0;
    double mv_ml = 0.0; // NaN when the planner tracks no lenient value
    double reward = 0.0;
    double cost = 0.0;
    double belief_entropy = 0.0;
};

struct episode_result {
    double scalarized_return = 0.0;    // discounted rewards minus measuring costs
    double nonscalarized_return = 0.0; // discounted rewards only
    int num_measurements = 0;
    int steps = 0;
    std::vector<step_record> trace;
    std::uint64_t seed = 0;
};

/// Serializes one trace as CSV:
/// t,control,measure,mv_robust,mv_ml,reward,cost,belief_entropy
void write_trace_csv(std::ostream& out, const std::vector<step_record>& trace);

/**
 * Runs one episode of the planner against the environment under the given
 * nature. Nature randomness and tie-breaking randomness come from two
 * independent streams derived from the seed, so planners fed the same seed
 * see the same world. Throws std::domain_error when horizon_cap <= 0.
 */
episode_result run_episode(const ram_mdp& env, const planner& proto, const nature_model& nature,
                           std::uint64_t seed, int horizon_cap, bool record_trace = false);

struct batch_stats {
    std::string planner;
    double mean_return = 0.0, ci_return = 0.0;
    double mean_nonscalarized = 0.0, ci_nonscalarized = 0.0;
    double mean_measurements = 0.0, ci_measurements = 0.0;
    int n = 0;
};

/**
 * Per planner: n_episodes paired episodes (episode i uses seed base_seed + i
 * for every planner) with mean and 95% normal-approximation confidence
 * intervals. Episodes may run on several threads; aggregation is ordered by
 * episode index, so output is independent of the thread count.
 */
std::vector<batch_stats> run_batch(const ram_mdp& env,
                                   const std::shared_ptr<const ram_mdp>& planning_model,
                                   const std::vector<planner_config>& configs,
                                   const nature_model& nature, int n_episodes,
                                   std::uint64_t base_seed, int horizon_cap, int jobs = 0);

/// Episode results for one prototype planner over paired seeds.
std::vector<episode_result> run_episodes(const ram_mdp& env, const planner& proto,
                                         const nature_model& nature, int n_episodes,
                                         std::uint64_t base_seed, int horizon_cap,
                                         int jobs = 0, bool record_trace = false);

struct mean_ci {
    double mean = 0.0;
    double ci_half_width = 0.0;
};

mean_ci summarize(const std::vector<double>& xs);

} // namespace ratm
