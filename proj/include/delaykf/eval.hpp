#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "delaykf/env.hpp"
#include "delaykf/policy.hpp"

namespace delaykf {

struct TranscriptRow {
    int k = 0;
    int action = 0;
    double delay = 0.0;
    double trace_cov = 0.0;
    double energy_joules = 0.0;
    double reward = 0.0;
};

struct EpisodeStats {
    double objective = 0.0;  // (1/T) sum_k [trace(P_k)/trace(P_0) + beta e_hat_k]
    double total_energy_joules = 0.0;
    double final_trace = 0.0;
    std::vector<TranscriptRow> transcript;
};

/// Runs one full episode on a fresh (reset) environment.
EpisodeStats run_episode(Environment& env, Policy& policy, Rng& policy_rng);

struct EvalResult {
    std::string policy;
    std::string variation = "standard";
    int n_runs = 0;
    std::uint64_t seed = 0;
    double mean_objective = 0.0;
    double std_objective = 0.0;  // sample std (0 for a single run)
    double mean_trace_final = 0.0;
    double mean_energy_total = 0.0;              // joules per episode
    std::vector<double> step_trace_mean;         // averaged across runs, per k
    std::vector<double> step_energy_mean;        // joules, per k
};

/// Evaluates one policy over n_runs paired-seed episodes: run r uses
/// environment seed split(master_seed, "episode-<r>"), so different policies
/// evaluated with the same master seed see identical noise, sampling and
/// delay realizations.
EvalResult evaluate_policy(const EnvConfig& base, Policy& policy, int n_runs,
                           std::uint64_t master_seed, const std::string& variation = "standard");

/// summary.csv: policy, variation, mean_objective, std_objective,
/// mean_trace_final, mean_energy_total, n_runs, seed.
void emit_summary(const std::vector<EvalResult>& results, const std::string& path);

/// per_step.csv: policy, variation, k, mean_trace, mean_energy_joules.
void emit_per_step(const std::vector<EvalResult>& results, const std::string& path);

/// transcript.csv: k, action, delay, trace_P, energy, reward.
void emit_transcript(const std::vector<TranscriptRow>& rows, const std::string& path);

}  // namespace delaykf
