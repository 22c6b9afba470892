// Experiment front end: parameter sweeps to CSV, reference-value reports and
// model export.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ratm/config.hpp"
#include "ratm/environments.hpp"
#include "ratm/model_io.hpp"
#include "ratm/oracle.hpp"
#include "ratm/planners.hpp"
#include "ratm/simulation.hpp"

namespace {

using namespace ratm;

struct env_params {
    std::string env;
    double c = 0.0;
    double p_max = 1.0;
    double reward_scale = 1.0;
    int width = 10;
    int height = 10;
    double alpha = 1.0;
    double step_penalty = 0.01;
    double gamma = 0.95;
};

ram_mdp build_env(const env_params& p) {
    if (p.env == "ab") return envs::build_ab(p.c);
    if (p.env == "lucky-unlucky") return envs::build_lucky_unlucky(p.p_max, p.c, p.reward_scale);
    if (p.env == "belief-dep") return envs::build_belief_dep();
    if (p.env == "snakemaze")
        return envs::build_snakemaze(
            {p.width, p.height, p.alpha, p.c, p.step_penalty, p.gamma});
    if (p.env == "drone") return envs::build_drone({p.alpha, p.c, p.step_penalty, p.gamma});
    throw config_error("unknown env: " + p.env);
}

int default_horizon(const std::string& env) {
    return (env == "snakemaze" || env == "drone") ? 100 : 2;
}

env_params params_from_config(const experiment_config& cfg) {
    env_params p;
    p.env = cfg.env;
    p.c = cfg.c;
    p.p_max = cfg.p_max;
    p.reward_scale = cfg.reward_scale;
    p.width = cfg.width;
    p.height = cfg.height;
    p.alpha = cfg.alpha;
    p.step_penalty = cfg.step_penalty;
    p.gamma = cfg.gamma;
    return p;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

int cmd_run(const std::string& config_path, std::uint64_t* seed_override,
            int* episodes_override, int* jobs_override, std::string* output_override) {
    auto cfg = experiment_config::load_file(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (episodes_override) cfg.episodes = *episodes_override;
    if (jobs_override) cfg.jobs = *jobs_override;
    if (output_override) cfg.output = *output_override;
    const int horizon = cfg.horizon > 0 ? cfg.horizon : default_horizon(cfg.env);

    std::vector<planner_config> planner_cfgs;
    for (const auto& name : cfg.planners) planner_cfgs.push_back(planner_config::from_name(name));

    const auto out_dir = std::filesystem::path(cfg.output).parent_path();
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
    std::ofstream out(cfg.output);
    if (!out) throw io_error("cannot open " + cfg.output + " for writing");
    out << "env,planner,param_name,param_value,mean_return,ci_return,mean_nonscalarized,"
           "ci_nonscalarized,mean_measurements,ci_measurements,n,planning_alpha\n";

    const std::string param_name = cfg.sweep == "misspec" ? "alpha" : cfg.sweep;
    for (double value : cfg.values) {
        env_params nature_params = params_from_config(cfg);
        env_params planner_params = params_from_config(cfg);
        if (cfg.sweep == "c") {
            nature_params.c = planner_params.c = value;
        } else if (cfg.sweep == "p_max") {
            nature_params.p_max = planner_params.p_max = value;
        } else if (cfg.sweep == "alpha") {
            nature_params.alpha = planner_params.alpha = value;
        } else { // misspec: plan at the fixed level, deploy at the swept one
            nature_params.alpha = value;
            planner_params.alpha = cfg.planning_alpha;
        }

        const auto true_env = std::make_shared<const ram_mdp>(build_env(nature_params));
        std::shared_ptr<const ram_mdp> plan_env = true_env;
        if (cfg.sweep == "misspec")
            plan_env = std::make_shared<const ram_mdp>(build_env(planner_params));

        const auto nature = cfg.nature == "average" ? nature_model::average(true_env)
                                                    : nature_model::rmdp_worst(true_env);
        const auto stats = run_batch(*true_env, plan_env, planner_cfgs, nature, cfg.episodes,
                                     cfg.seed, horizon, cfg.jobs);
        for (const auto& st : stats) {
            out << cfg.env << ',' << st.planner << ',' << param_name << ','
                << fmt_double(value) << ',' << fmt_double(st.mean_return) << ','
                << fmt_double(st.ci_return) << ',' << fmt_double(st.mean_nonscalarized) << ','
                << fmt_double(st.ci_nonscalarized) << ',' << fmt_double(st.mean_measurements)
                << ',' << fmt_double(st.ci_measurements) << ',' << st.n << ','
                << (cfg.sweep == "misspec" ? fmt_double(cfg.planning_alpha) : std::string())
                << '\n';
        }
    }
    out.flush();
    if (!out) throw io_error("failed while writing " + cfg.output);
    std::cout << "wrote " << cfg.output << "\n";
    return 0;
}

int cmd_oracle_ab(double c) {
    const double threshold = oracle::ab_optimal_threshold();
    std::cout << "measuring pays iff cost <= " << fmt_double(threshold) << "\n";

    const auto model = std::make_shared<const ram_mdp>(envs::build_ab(c));
    const auto root = oracle::exact_finite_horizon_value(*model, belief::delta(0), {});
    std::cout << "exact optimal value at c=" << fmt_double(c) << ": " << fmt_double(root.value)
              << " (best action measures: " << (root.best.measure ? "yes" : "no") << ")\n";

    planner pl(model, planner_config::from_name("ratm"));
    pl.reset();
    const auto d = pl.decide();
    std::cout << "planner measuring value at the initial belief: " << fmt_double(d.mv_robust)
              << " (threshold minus cost: " << fmt_double(threshold - c) << ")\n";

    int disagreements = 0;
    for (int k = 0; k <= 50; ++k) {
        const double cost = 0.01 * k;
        planner sweep_pl(std::make_shared<const ram_mdp>(envs::build_ab(cost)),
                         planner_config::from_name("ratm"));
        sweep_pl.reset();
        const bool measures = sweep_pl.decide().ap.measure;
        if (measures != (cost <= threshold)) ++disagreements;
    }
    std::cout << "cost sweep agreement with the closed form: "
              << (disagreements == 0 ? "exact" : std::to_string(disagreements) + " mismatches")
              << "\n";
    return disagreements == 0 ? 0 : 1;
}

int cmd_oracle_lucky(double p_max, double c) {
    const auto opt = oracle::lucky_unlucky_optimal(p_max, c);
    std::cout << "optimal: measure=" << (opt.measure ? "true" : "false")
              << " value=" << fmt_double(opt.value) << "\n";
    planner pl(std::make_shared<const ram_mdp>(envs::build_lucky_unlucky(p_max, c)),
               planner_config::from_name("ratm"));
    pl.reset();
    const auto d = pl.decide();
    std::cout << "planner measures: " << (d.ap.measure ? "true" : "false")
              << " (mv=" << fmt_double(d.mv_robust) << ")\n";
    std::cout << "agreement: " << (d.ap.measure == opt.measure ? "yes" : "NO") << "\n";
    return d.ap.measure == opt.measure ? 0 : 1;
}

int cmd_oracle_belief_dep() {
    const auto model = envs::build_belief_dep();
    const belief b = belief::from_entries({{0, 0.2}, {1, 0.8}});
    const auto root = oracle::exact_finite_horizon_value(model, b, {});
    for (const auto& br : root.branches) {
        if (br.ap.measure || br.ap.control != 0) continue;
        std::cout << "non-measuring branch value: " << fmt_double(br.value) << "\n";
        // the second support state owns the only free row
        const auto& row = br.nature_rows[1];
        std::cout << "nature minimizer on the uncertain row: p(s-)=" << fmt_double(row[0])
                  << ", p(s+)=" << fmt_double(row[1]) << "\n";
    }
    std::cout << "optimal value: " << fmt_double(root.value) << "\n";
    return 0;
}

int cmd_oracle_bound(const std::string& env_name, double alpha, double c, int episodes,
                     std::uint64_t seed, int jobs) {
    (void)jobs;
    std::shared_ptr<const ram_mdp> model;
    int horizon = default_horizon(env_name);
    if (env_name == "snakemaze") {
        model = std::make_shared<const ram_mdp>(
            envs::build_snakemaze({10, 10, alpha, c, 0.01, 0.95}));
    } else if (env_name == "drone") {
        model = std::make_shared<const ram_mdp>(envs::build_drone({alpha, c, 0.01, 0.95}));
    } else {
        throw size_error("bound report supports snakemaze and drone");
    }
    const auto nature = nature_model::rmdp_worst(model);
    planner base(model, planner_config::from_name("ratm"));
    bool all_pass = true;
    for (const char* variant : {"mlatm-opt", "mlatm-pes", "mlatm-avg"}) {
        planner lenient(model, planner_config::from_name(variant));
        const auto rep =
            oracle::theorem1_bound_check(*model, base, lenient, nature, episodes, seed, horizon);
        std::cout << rep.detail << ": estimate=" << fmt_double(rep.estimate) << " +-"
                  << fmt_double(rep.ci_half_width) << " bound=" << fmt_double(rep.bound)
                  << " (unbounded-horizon bound " << fmt_double(rep.bound_infinite) << ")"
                  << " margin=" << fmt_double(rep.margin) << " -> "
                  << (rep.pass ? "PASS" : "FAIL") << "\n";
        all_pass = all_pass && rep.pass;
    }
    return all_pass ? 0 : 1;
}

int cmd_export(const env_params& p, const std::string& out_path) {
    const auto model = build_env(p);
    const auto out_dir = std::filesystem::path(out_path).parent_path();
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
    write_model_file(out_path, model);
    std::cout << "wrote " << out_path << " (" << model.num_states() << " states, "
              << model.num_actions() << " actions)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Planning and experiment harness for interval-uncertain MDPs with costly "
                 "exact measurements"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run a sweep config and write CSV results");
    std::string config_path;
    run->add_option("config", config_path, "TOML experiment config")->required();
    std::uint64_t seed_val = 0;
    int episodes_val = 0, jobs_val = 0;
    std::string output_val;
    auto* seed_opt = run->add_option("--seed", seed_val, "Override the base seed");
    auto* episodes_opt = run->add_option("--episodes", episodes_val, "Override episode count");
    auto* jobs_opt = run->add_option("--jobs", jobs_val, "Worker threads (0 = hardware)");
    auto* output_opt = run->add_option("--output", output_val, "Override the output path");

    // oracle
    auto* orc = app.add_subcommand("oracle", "Reference values and planner agreement");
    std::string oracle_env;
    orc->add_option("env", oracle_env, "ab | lucky-unlucky | belief-dep | bound")->required();
    double orc_c = 0.2, orc_pmax = 0.5, orc_alpha = 0.6;
    std::string orc_bound_env = "snakemaze";
    int orc_episodes = 500;
    std::uint64_t orc_seed = 1;
    int orc_jobs = 0;
    orc->add_option("--c", orc_c, "Measuring cost");
    orc->add_option("--pmax", orc_pmax, "Upper bound on the unlucky branch");
    orc->add_option("--alpha", orc_alpha, "Confidence level");
    orc->add_option("--env", orc_bound_env, "Environment for the bound report");
    orc->add_option("--episodes", orc_episodes, "Paired episodes for the bound report");
    orc->add_option("--seed", orc_seed, "Base seed");
    orc->add_option("--jobs", orc_jobs, "Worker threads");

    // export-model
    auto* exp = app.add_subcommand("export-model", "Build an environment and write it as JSON");
    env_params ep;
    exp->add_option("env", ep.env, "ab | lucky-unlucky | belief-dep | snakemaze | drone")
        ->required();
    std::string export_out;
    exp->add_option("--out", export_out, "Output path")->required();
    exp->add_option("--c", ep.c, "Measuring cost");
    exp->add_option("--pmax", ep.p_max, "Upper bound on the unlucky branch");
    exp->add_option("--scale", ep.reward_scale, "Reward scale");
    exp->add_option("--alpha", ep.alpha, "Confidence level");
    exp->add_option("--width", ep.width, "Maze width");
    exp->add_option("--height", ep.height, "Maze height");
    exp->add_option("--step-penalty", ep.step_penalty, "Per-step penalty");
    exp->add_option("--gamma", ep.gamma, "Discount factor");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed())
            return cmd_run(config_path, seed_opt->count() ? &seed_val : nullptr,
                           episodes_opt->count() ? &episodes_val : nullptr,
                           jobs_opt->count() ? &jobs_val : nullptr,
                           output_opt->count() ? &output_val : nullptr);
        if (orc->parsed()) {
            if (oracle_env == "ab") return cmd_oracle_ab(orc_c);
            if (oracle_env == "lucky-unlucky") return cmd_oracle_lucky(orc_pmax, orc_c);
            if (oracle_env == "belief-dep") return cmd_oracle_belief_dep();
            if (oracle_env == "bound")
                return cmd_oracle_bound(orc_bound_env, orc_alpha, orc_c, orc_episodes, orc_seed,
                                        orc_jobs);
            throw config_error("unknown oracle env: " + oracle_env);
        }
        if (exp->parsed()) return cmd_export(ep, export_out);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const size_error& e) {
        std::cerr << "unsupported at this scale: " << e.what() << "\n";
        return 2;
    } catch (const divergence_error& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const feasibility_error& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const io_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
