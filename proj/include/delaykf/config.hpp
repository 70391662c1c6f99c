#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "delaykf/env.hpp"
#include "delaykf/link_energy.hpp"
#include "delaykf/linmodel.hpp"
#include "delaykf/ppo.hpp"

namespace delaykf {

/// Everything one experiment needs, loadable from a `key = value` text file
/// ('#' starts a comment; unknown keys are rejected). Defaults reproduce the
/// standard simulation setup.
struct ExperimentConfig {
    std::uint64_t master_seed = 1;

    // System generation
    int n_states = 5;
    int n_sensors = 20;
    GenerationRanges ranges;

    // Link budget (dB-scaled fields are converted when the budget is built)
    double bits_per_packet = 280.0;
    double bandwidth_hz = 2e6;
    double wavelength_m = 0.125;
    double antenna_gain_tx = 1.0;
    double antenna_gain_rx = 1.0;
    double noise_density_dbm_hz = -174.0;
    double min_snr_db = 10.0;
    double pa_efficiency = 0.8;
    double circuit_power_w = 0.01;
    double tx_power_w = 0.01;
    bool snr_calibration = false;

    // Environment
    int horizon = 100;
    double beta = 0.1;
    int history_len = 10;
    double log_eps = 1e-8;
    int buffer_len = 32;

    // PPO
    PpoConfig ppo;

    // Experiment
    int n_runs = 1000;

    static ExperimentConfig from_file(const std::string& path);
    /// Applies one key/value pair; throws ConfigError on unknown keys or
    /// unparsable values.
    void set(const std::string& key, const std::string& value);
    /// Renders the full configuration in config-file syntax.
    std::string to_text() const;

    LinkBudget link_budget() const;
    void validate() const;
};

/// The parameter-variation grid: standard plus two-sided p, q and r range
/// overrides.
const std::vector<std::string>& variation_names();
GenerationRanges ranges_for_variation(const GenerationRanges& base, const std::string& name);

/// Generates the system for a variation (split master seed, labeled
/// "system"), assigns link energies, and packages an EnvConfig. The per-run
/// environment seed is filled in later by the evaluation loop.
EnvConfig build_env_config(const ExperimentConfig& config, const std::string& variation);

}  // namespace delaykf
