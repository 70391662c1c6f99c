#include "delaykf/eval.hpp"

#include <cmath>

#include "delaykf/csv.hpp"
#include "delaykf/errors.hpp"

namespace delaykf {

EpisodeStats run_episode(Environment& env, Policy& policy, Rng& policy_rng) {
    env.reset();
    EpisodeStats stats;
    stats.transcript.reserve(env.horizon());
    double objective_sum = 0.0;
    while (!env.done()) {
        const int action = policy.select_action(env, policy_rng);
        const StepOutcome out = env.step(action);
        objective_sum += -out.reward;  // u_hat + beta * e_hat
        stats.total_energy_joules += out.info.energy_joules;
        stats.transcript.push_back(TranscriptRow{env.time(), action, out.info.delay_used,
                                                 out.info.trace_cov, out.info.energy_joules,
                                                 out.reward});
    }
    stats.objective = objective_sum / env.horizon();
    stats.final_trace = env.belief().cov.trace();
    return stats;
}

EvalResult evaluate_policy(const EnvConfig& base, Policy& policy, int n_runs,
                           std::uint64_t master_seed, const std::string& variation) {
    if (n_runs < 1) throw UsageError("evaluate_policy: n_runs must be >= 1");

    EvalResult res;
    res.policy = policy.name();
    res.variation = variation;
    res.n_runs = n_runs;
    res.seed = master_seed;
    res.step_trace_mean.assign(base.horizon, 0.0);
    res.step_energy_mean.assign(base.horizon, 0.0);

    std::vector<double> objectives;
    objectives.reserve(n_runs);
    for (int r = 0; r < n_runs; ++r) {
        EnvConfig cfg = base;
        cfg.seed = split_seed(master_seed, "episode-" + std::to_string(r));
        Environment env(cfg);
        Rng policy_rng(
            split_seed(master_seed, "policy-" + policy.name() + "-" + std::to_string(r)));
        const EpisodeStats stats = run_episode(env, policy, policy_rng);
        objectives.push_back(stats.objective);
        res.mean_trace_final += stats.final_trace;
        res.mean_energy_total += stats.total_energy_joules;
        for (std::size_t k = 0; k < stats.transcript.size(); ++k) {
            res.step_trace_mean[k] += stats.transcript[k].trace_cov;
            res.step_energy_mean[k] += stats.transcript[k].energy_joules;
        }
    }

    const double inv = 1.0 / n_runs;
    res.mean_trace_final *= inv;
    res.mean_energy_total *= inv;
    for (auto& v : res.step_trace_mean) v *= inv;
    for (auto& v : res.step_energy_mean) v *= inv;

    double mean = 0.0;
    for (double o : objectives) mean += o;
    mean *= inv;
    res.mean_objective = mean;
    if (n_runs > 1) {
        double ss = 0.0;
        for (double o : objectives) ss += (o - mean) * (o - mean);
        res.std_objective = std::sqrt(ss / (n_runs - 1));
    }
    return res;
}

void emit_summary(const std::vector<EvalResult>& results, const std::string& path) {
    if (results.empty()) throw UsageError("emit_summary: no completed runs");
    CsvWriter csv(path);
    csv.write_row({"policy", "variation", "mean_objective", "std_objective", "mean_trace_final",
                   "mean_energy_total", "n_runs", "seed"});
    for (const auto& r : results) {
        csv.write_row({r.policy, r.variation, format_double(r.mean_objective),
                       format_double(r.std_objective), format_double(r.mean_trace_final),
                       format_double(r.mean_energy_total), format_int(r.n_runs),
                       format_uint(r.seed)});
    }
}

void emit_per_step(const std::vector<EvalResult>& results, const std::string& path) {
    if (results.empty()) throw UsageError("emit_per_step: no completed runs");
    CsvWriter csv(path);
    csv.write_row({"policy", "variation", "k", "mean_trace", "mean_energy_joules"});
    for (const auto& r : results) {
        for (std::size_t k = 0; k < r.step_trace_mean.size(); ++k) {
            csv.write_row({r.policy, r.variation, format_int(static_cast<long long>(k) + 1),
                           format_double(r.step_trace_mean[k]),
                           format_double(r.step_energy_mean[k])});
        }
    }
}

void emit_transcript(const std::vector<TranscriptRow>& rows, const std::string& path) {
    CsvWriter csv(path);
    csv.write_row({"k", "action", "delay", "trace_P", "energy", "reward"});
    for (const auto& row : rows) {
        csv.write_row({format_int(row.k), format_int(row.action), format_double(row.delay),
                       format_double(row.trace_cov), format_double(row.energy_joules),
                       format_double(row.reward)});
    }
}

}  // namespace delaykf
