#include "ratm/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <thread>

namespace ratm {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

nature_model nature_model::rmdp_worst(std::shared_ptr<const ram_mdp> true_model,
                                      solve_options opts) {
    nature_model n;
    n.sol_ = std::make_shared<const robust_solution>(solve_robust(std::move(true_model), opts));
    return n;
}

nature_model nature_model::average(std::shared_ptr<const ram_mdp> true_model) {
    nature_model n;
    n.pm_ = std::make_shared<const point_model>(average_point_model(*true_model).model);
    return n;
}

nature_model nature_model::point(std::shared_ptr<const point_model> pm) {
    nature_model n;
    n.pm_ = std::move(pm);
    return n;
}

namespace {

template <typename Succ>
state_id sample_walk(const Succ& succ, const double* prob, std::size_t n, double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += prob[i];
        if (u < acc) return succ[i];
    }
    return succ[n - 1];
}

} // namespace

state_id nature_model::sample(state_id s, action_id a, rng_stream& rng) const {
    const double u = rng.uniform();
    if (sol_ != nullptr) {
        const auto row = sol_->interval_model()->row(s, a);
        const auto wc = sol_->transition_row(s, a);
        return sample_walk(row.succ, wc.dist.data(), row.size(), u);
    }
    const auto row = pm_->row(s, a);
    return sample_walk(row.succ, row.prob.data(), row.size(), u);
}

void write_trace_csv(std::ostream& out, const std::vector<step_record>& trace) {
    out << "t,control,measure,mv_robust,mv_ml,reward,cost,belief_entropy\n";
    char buf[192];
    for (const auto& r : trace) {
        std::snprintf(buf, sizeof buf, "%d,%d,%d,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.t,
                      r.control, r.measure ? 1 : 0, r.mv_robust, r.mv_ml, r.reward, r.cost,
                      r.belief_entropy);
        out << buf;
    }
}

episode_result run_episode(const ram_mdp& env, const planner& proto, const nature_model& nature,
                           std::uint64_t seed, int horizon_cap, bool record_trace) {
    if (horizon_cap <= 0) throw std::domain_error("horizon cap must be positive");

    planner pl = proto;
    pl.reset(derive_seed(seed, 1));
    rng_stream nature_rng(derive_seed(seed, 0));

    episode_result res;
    res.seed = seed;
    state_id s = env.initial_state();
    double discount_t = 1.0;
    double reward_sum = 0.0, cost_sum = 0.0;

    for (int t = 0; t < horizon_cap && !env.is_terminal(s); ++t) {
        const double entropy = pl.robust_belief().entropy();
        const decision d = pl.decide();
        const double r = env.reward(s, d.ap.control);
        const double c = d.ap.measure ? env.measure_cost() : 0.0;
        reward_sum += discount_t * r;
        cost_sum += discount_t * c;
        res.num_measurements += d.ap.measure ? 1 : 0;
        ++res.steps;

        const state_id next = nature.sample(s, d.ap.control, nature_rng);
        if (record_trace)
            res.trace.push_back({t, d.ap.control, d.ap.measure, d.mv_robust,
                                 d.mv_ml.value_or(std::numeric_limits<double>::quiet_NaN()), r,
                                 c, entropy});
        pl.advance(d, d.ap.measure ? std::optional<state_id>(next) : std::nullopt);
        s = next;
        discount_t *= env.discount();
    }
    res.nonscalarized_return = reward_sum;
    res.scalarized_return = reward_sum - cost_sum;
    return res;
}

std::vector<episode_result> run_episodes(const ram_mdp& env, const planner& proto,
                                         const nature_model& nature, int n_episodes,
                                         std::uint64_t base_seed, int horizon_cap, int jobs,
                                         bool record_trace) {
    if (n_episodes < 1) throw std::domain_error("need at least one episode");
    std::vector<episode_result> results(static_cast<std::size_t>(n_episodes));
    int threads = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    threads = std::min(threads, n_episodes);

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int i = next.fetch_add(1); i < n_episodes; i = next.fetch_add(1))
            results[static_cast<std::size_t>(i)] =
                run_episode(env, proto, nature, base_seed + static_cast<std::uint64_t>(i),
                            horizon_cap, record_trace);
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return results;
}

mean_ci summarize(const std::vector<double>& xs) {
    mean_ci out;
    const auto n = static_cast<double>(xs.size());
    if (xs.empty()) return out;
    double sum = 0.0;
    for (double x : xs) sum += x;
    out.mean = sum / n;
    if (xs.size() < 2) return out; // degenerate interval
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    out.ci_half_width = 1.96 * sd / std::sqrt(n);
    return out;
}

std::vector<batch_stats> run_batch(const ram_mdp& env,
                                   const std::shared_ptr<const ram_mdp>& planning_model,
                                   const std::vector<planner_config>& configs,
                                   const nature_model& nature, int n_episodes,
                                   std::uint64_t base_seed, int horizon_cap, int jobs) {
    if (n_episodes < 1) throw std::domain_error("need at least one episode");
    std::vector<batch_stats> out;
    out.reserve(configs.size());
    for (const auto& cfg : configs) {
        planner proto(planning_model, cfg);
        const auto episodes =
            run_episodes(env, proto, nature, n_episodes, base_seed, horizon_cap, jobs);
        std::vector<double> ret, nonscal, meas;
        ret.reserve(episodes.size());
        for (const auto& e : episodes) {
            ret.push_back(e.scalarized_return);
            nonscal.push_back(e.nonscalarized_return);
            meas.push_back(static_cast<double>(e.num_measurements));
        }
        batch_stats st;
        st.planner = cfg.name();
        st.n = n_episodes;
        const auto r = summarize(ret);
        const auto s = summarize(nonscal);
        const auto m = summarize(meas);
        st.mean_return = r.mean;
        st.ci_return = r.ci_half_width;
        st.mean_nonscalarized = s.mean;
        st.ci_nonscalarized = s.ci_half_width;
        st.mean_measurements = m.mean;
        st.ci_measurements = m.ci_half_width;
        out.push_back(std::move(st));
    }
    return out;
}

} // namespace ratm
