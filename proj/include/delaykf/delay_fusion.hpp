#pragma once

#include <Eigen/Dense>
#include <deque>
#include <optional>
#include <vector>

#include "delaykf/kalman.hpp"
#include "delaykf/linmodel.hpp"

namespace delaykf {

/// A measurement generated at gen_time that arrives delay steps later.
struct DelayedMeasurement {
    int sensor_id = 0;  // 1-based
    int gen_time = 0;
    Eigen::VectorXd value;
    int delay = 0;  // k - gen_time, >= 0
};

/// Ring of the last L per-step belief pairs (prior, posterior) plus the id of
/// the sensor fused at each step (0 when none). Times are contiguous.
class BeliefBuffer {
  public:
    explicit BeliefBuffer(int capacity = 32);

    void clear();
    /// Appends the entry for time prior.time (must be latest_time()+1 when
    /// non-empty). Posterior starts equal to the prior until a fusion lands.
    void push(const BeliefState& prior);
    /// Overwrites the posterior at time t and records which sensor was fused.
    void record_fusion(int t, const BeliefState& posterior, int sensor_id);

    bool empty() const { return entries_.empty(); }
    int size() const { return static_cast<int>(entries_.size()); }
    int capacity() const { return capacity_; }
    bool contains(int t) const;
    int earliest_time() const;
    int latest_time() const;

    const BeliefState& prior_at(int t) const;
    const BeliefState& posterior_at(int t) const;
    int fused_at(int t) const;

    int stale_drops() const { return stale_drops_; }
    void count_stale_drop() { ++stale_drops_; }

  private:
    struct Entry {
        BeliefState prior;
        BeliefState posterior;
        int fused_sensor = 0;
    };

    const Entry& entry_at(int t) const;

    std::deque<Entry> entries_;
    int capacity_ = 32;
    int stale_drops_ = 0;
};

/// Merges a forward-propagated branch with the system posterior of the same
/// step, treating the posterior as a virtual Gaussian observation:
/// K = P^p (P^p + P)^{-1}, mean' = x^p + K (x - x^p), cov' = (I - K) P^p.
/// A singular P^p + P is regularized with 1e-9 I (with a warning counter).
BeliefState fuse_posteriors(const BeliefState& propagated, const BeliefState& system);

/// Number of times fuse_posteriors had to regularize a singular sum.
int fusion_regularizations();

/// Incorporates a delayed measurement: update the stored prior at gen_time,
/// then step forward to the buffer's latest time, fusing with the stored
/// system posterior wherever a fusion is recorded. On success the corrected
/// belief replaces the buffered posterior at the latest time and is returned.
/// Returns nullopt (stale drop) when gen_time is no longer buffered.
std::optional<BeliefState> apply_delayed(BeliefBuffer& buffer, const DelayedMeasurement& meas,
                                         const SensorModel& sensor, const ProcessModel& model);

/// Exact re-filtering oracle: starting from a posterior, replays every logged
/// measurement at its true generation time (predict/update in temporal
/// order) up to end_time. The optimum the fusion pipeline approximates.
BeliefState replay_exact(const BeliefState& start_posterior,
                         std::vector<DelayedMeasurement> log, const ProcessModel& model,
                         const std::vector<SensorModel>& sensors, int end_time);

/// Delay-dependent information gain: trace(P_prior) - trace(P_fused).
double info_gain(double prior_trace, const BeliefState& fused);

}  // namespace delaykf
