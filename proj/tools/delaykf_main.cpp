// Command-line front end: train / evaluate / sweep / check-stability /
// show-config. All outputs are deterministic for a fixed config and seed.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "delaykf/config.hpp"
#include "delaykf/csv.hpp"
#include "delaykf/errors.hpp"
#include "delaykf/eval.hpp"
#include "delaykf/policy.hpp"
#include "delaykf/ppo.hpp"
#include "delaykf/stability.hpp"

namespace {

// Exit codes (also documented in the README).
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitCheckpoint = 4;

struct CommonArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int runs = 0;  // 0 = use config value
};

delaykf::ExperimentConfig load_config(const CommonArgs& args) {
    delaykf::ExperimentConfig config;
    if (!args.config_path.empty())
        config = delaykf::ExperimentConfig::from_file(args.config_path);
    if (args.seed_set) config.master_seed = args.seed;
    if (args.runs > 0) config.n_runs = args.runs;
    config.validate();
    return config;
}

void write_learning_curve(const std::vector<delaykf::IterationLog>& curve,
                          const std::string& path) {
    delaykf::CsvWriter csv(path);
    csv.write_row({"iteration", "steps", "mean_episode_reward", "policy_loss", "value_loss",
                   "entropy"});
    for (std::size_t i = 0; i < curve.size(); ++i) {
        csv.write_row({delaykf::format_int(static_cast<long long>(i) + 1),
                       delaykf::format_int(curve[i].steps_done),
                       delaykf::format_double(curve[i].mean_episode_reward),
                       delaykf::format_double(curve[i].policy_loss),
                       delaykf::format_double(curve[i].value_loss),
                       delaykf::format_double(curve[i].entropy)});
    }
}

std::vector<std::unique_ptr<delaykf::Policy>> build_policies(
    const std::vector<std::string>& names, const std::string& checkpoint) {
    std::vector<std::unique_ptr<delaykf::Policy>> policies;
    for (const auto& name : names) {
        if (name == "ppo") {
            if (checkpoint.empty())
                throw delaykf::UsageError("policy 'ppo' requires --checkpoint");
            auto ckpt = delaykf::load_policy_checkpoint(checkpoint);
            policies.push_back(std::make_unique<delaykf::MlpPolicy>(
                std::move(ckpt.actor), /*stochastic=*/false));
        } else {
            policies.push_back(delaykf::make_baseline_policy(name));
        }
    }
    return policies;
}

int run_train(const CommonArgs& common, const std::string& out_dir, long total_steps_override,
              bool full_budget) {
    delaykf::ExperimentConfig config = load_config(common);
    if (total_steps_override > 0) config.ppo.total_steps = total_steps_override;
    if (full_budget) config.ppo.total_steps = 1000000;

    std::filesystem::create_directories(out_dir);
    const delaykf::EnvConfig base = delaykf::build_env_config(config, "standard");
    const std::uint64_t seed = config.master_seed;
    const auto factory = [&base, seed](int index) {
        delaykf::EnvConfig cfg = base;
        cfg.seed = delaykf::split_seed(seed, "train-env-" + std::to_string(index));
        return delaykf::Environment(cfg);
    };

    const delaykf::TrainResult result = delaykf::train_ppo(factory, config.ppo, seed);
    write_learning_curve(result.curve, out_dir + "/learning_curve.csv");
    if (result.halted_divergence) {
        std::cerr << "training halted: " << result.diagnostic << "\n";
        return kExitUsage;
    }
    delaykf::save_policy_checkpoint(out_dir + "/checkpoint.bin", result.actor, result.critic,
                                    seed);
    std::cout << "trained " << config.ppo.total_steps << " steps; checkpoint and curve in "
              << out_dir << "\n";
    return kExitOk;
}

int run_evaluate(const CommonArgs& common, const std::string& out_dir,
                 const std::vector<std::string>& policy_names, const std::string& checkpoint) {
    delaykf::ExperimentConfig config = load_config(common);
    std::filesystem::create_directories(out_dir);
    auto policies = build_policies(policy_names, checkpoint);

    const delaykf::EnvConfig base = delaykf::build_env_config(config, "standard");
    std::vector<delaykf::EvalResult> results;
    for (auto& policy : policies)
        results.push_back(delaykf::evaluate_policy(base, *policy, config.n_runs,
                                                   config.master_seed, "standard"));
    delaykf::emit_summary(results, out_dir + "/summary.csv");
    delaykf::emit_per_step(results, out_dir + "/per_step.csv");
    for (const auto& r : results)
        std::cout << r.policy << ": objective " << delaykf::format_double(r.mean_objective)
                  << " +- " << delaykf::format_double(r.std_objective) << " (" << r.n_runs
                  << " runs)\n";
    return kExitOk;
}

int run_sweep(const CommonArgs& common, const std::string& out_dir,
              const std::vector<std::string>& policy_names, const std::string& checkpoint) {
    delaykf::ExperimentConfig config = load_config(common);
    std::filesystem::create_directories(out_dir);
    auto policies = build_policies(policy_names, checkpoint);

    std::vector<delaykf::EvalResult> results;
    for (const auto& variation : delaykf::variation_names()) {
        const delaykf::EnvConfig base = delaykf::build_env_config(config, variation);
        for (auto& policy : policies)
            results.push_back(delaykf::evaluate_policy(base, *policy, config.n_runs,
                                                       config.master_seed, variation));
    }
    delaykf::emit_summary(results, out_dir + "/sweep_summary.csv");
    std::cout << "sweep complete: " << results.size() << " (policy, variation) rows in "
              << out_dir << "/sweep_summary.csv\n";
    return kExitOk;
}

int run_check_stability(const CommonArgs& common) {
    const delaykf::ExperimentConfig config = load_config(common);
    const delaykf::EnvConfig base = delaykf::build_env_config(config, "standard");
    const delaykf::SpectralSplit split = delaykf::spectral_split(base.model.a());
    const delaykf::StabilityReport report = delaykf::check_feasibility(base.sensors, split);
    std::cout << delaykf::describe(report);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delay-aware remote state estimation: simulator, stability checker and "
                 "PPO scheduler"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string out_dir = "out";
    std::vector<std::string> policy_names = {"random", "greedy", "idle"};
    std::string checkpoint;
    long total_steps_override = 0;
    bool full_budget = false;

    const auto add_common = [&common](CLI::App* cmd) {
        cmd->add_option("--config", common.config_path, "Config file (key = value)");
        cmd->add_option("--seed", common.seed, "Master seed (overrides config)")
            ->each([&common](const std::string&) { common.seed_set = true; });
        cmd->add_option("--runs", common.runs, "Monte Carlo runs (overrides config)");
    };

    CLI::App* train = app.add_subcommand("train", "Train the PPO scheduler");
    add_common(train);
    train->add_option("--out", out_dir, "Output directory");
    train->add_option("--total-steps", total_steps_override, "Override training budget");
    train->add_flag("--full-budget", full_budget, "Use the full 1e6-step budget");

    CLI::App* evaluate = app.add_subcommand("evaluate", "Evaluate policies with paired seeds");
    add_common(evaluate);
    evaluate->add_option("--out", out_dir, "Output directory");
    evaluate->add_option("--policies,--policy", policy_names,
                         "Policies: random, greedy, idle, ppo")
        ->delimiter(',');
    evaluate->add_option("--checkpoint", checkpoint, "Checkpoint for the ppo policy");

    CLI::App* sweep = app.add_subcommand("sweep", "Parameter-variation sweep");
    add_common(sweep);
    sweep->add_option("--out", out_dir, "Output directory");
    sweep->add_option("--policies,--policy", policy_names, "Policies: random, greedy, idle, ppo")
        ->delimiter(',');
    sweep->add_option("--checkpoint", checkpoint, "Checkpoint for the ppo policy");

    CLI::App* stability = app.add_subcommand("check-stability",
                                             "Stability feasibility of the generated system");
    add_common(stability);

    CLI::App* show = app.add_subcommand("show-config", "Print the effective configuration");
    add_common(show);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (train->parsed())
            return run_train(common, out_dir, total_steps_override, full_budget);
        if (evaluate->parsed()) return run_evaluate(common, out_dir, policy_names, checkpoint);
        if (sweep->parsed()) return run_sweep(common, out_dir, policy_names, checkpoint);
        if (stability->parsed()) return run_check_stability(common);
        if (show->parsed()) {
            std::cout << load_config(common).to_text();
            return kExitOk;
        }
    } catch (const delaykf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const delaykf::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        const std::string what = e.what();
        return what.find("checkpoint") != std::string::npos ||
                       what.find("reading") != std::string::npos
                   ? kExitCheckpoint
                   : kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
