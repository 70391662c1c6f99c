#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "delaykf/delay_fusion.hpp"
#include "delaykf/kalman.hpp"
#include "delaykf/link_energy.hpp"
#include "delaykf/linmodel.hpp"
#include "delaykf/rng.hpp"

namespace delaykf {

struct EnvConfig {
    ProcessModel model;
    std::vector<SensorModel> sensors;  // energies must be assigned already
    LinkBudget budget;
    int horizon = 100;       // T
    double beta = 0.1;       // energy weight in the reward
    int history_len = 10;    // nu, number of (sensor, delay) pairs in the state
    double log_eps = 1e-8;   // epsilon inside log(diag(P) + eps)
    int buffer_len = 32;     // belief buffer capacity (> max expected delay)
    std::uint64_t seed = 0;

    void validate() const;
};

/// MDP state: log of the covariance diagonal plus the nu most recent
/// (sensor id, delay) pairs, most recent first; id 0 with delay 0 pads.
struct MdpState {
    Eigen::VectorXd log_diag;
    std::vector<std::pair<int, double>> history;

    /// Flat encoding of length N + 2*nu: [log_diag; id_1, delay_1, ...].
    Eigen::VectorXd encode() const;
};

struct StepInfo {
    double trace_cov = 0.0;      // trace(P_k) after the update
    double energy_norm = 0.0;    // e_hat, E^a / max E (0 when idle)
    double energy_joules = 0.0;
    double delay_used = 0.0;     // delay recorded in the history this step
    double info_gain = 0.0;      // trace improvement from the fused sample
    bool stale_drop = false;
};

struct StepOutcome {
    MdpState next_state;
    double reward = 0.0;
    StepInfo info;
};

/// One scheduling episode: each step the truth advances, sensors sample with
/// their probabilities, the estimator predicts, and the chosen sensor's held
/// (possibly delayed) measurement is fused. Reward is
/// -trace(P_k)/trace(P_0) - beta * E/max E. Sequential; one Rng stream per
/// instance, so independent instances can run concurrently.
class Environment {
  public:
    explicit Environment(EnvConfig config);

    MdpState reset();
    /// Reset onto a different random stream (e.g. per-episode seeds during
    /// training). Subsequent reset() calls reuse the new seed.
    MdpState reset(std::uint64_t seed);
    StepOutcome step(int action);

    int time() const { return k_; }
    int horizon() const { return cfg_.horizon; }
    bool done() const { return k_ >= cfg_.horizon; }
    int n_sensors() const { return static_cast<int>(cfg_.sensors.size()); }
    int n_actions() const { return n_sensors() + 1; }
    int state_dim() const { return cfg_.model.dim() + 2 * cfg_.history_len; }

    const MdpState& state() const { return state_; }
    const BeliefState& belief() const { return belief_; }
    const BeliefBuffer& buffer() const { return buffer_; }
    const std::optional<Sample>& held_sample(int sensor_index) const {
        return held_.at(sensor_index);
    }
    const std::vector<SensorModel>& sensors() const { return cfg_.sensors; }
    const ProcessModel& model() const { return cfg_.model; }
    const Eigen::VectorXd& truth() const { return x_; }
    double beta() const { return cfg_.beta; }
    double trace_p0() const { return trace_p0_; }
    double max_energy() const { return max_energy_; }

  private:
    MdpState make_state() const;

    EnvConfig cfg_;
    Rng rng_;
    Eigen::VectorXd x_;
    std::vector<std::optional<Sample>> held_;
    BeliefState belief_;
    BeliefBuffer buffer_;
    std::vector<std::pair<int, double>> history_;  // most recent first
    MdpState state_;
    int k_ = 0;
    double trace_p0_ = 1.0;
    double max_energy_ = 1.0;
};

}  // namespace delaykf
