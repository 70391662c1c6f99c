#include "delaykf/delay_fusion.hpp"

#include <algorithm>
#include <atomic>

#include "delaykf/errors.hpp"

namespace delaykf {

namespace {
std::atomic<int> g_fusion_regularizations{0};
}

BeliefBuffer::BeliefBuffer(int capacity) : capacity_(capacity) {
    if (capacity < 1) throw ConfigError("BeliefBuffer: capacity must be >= 1");
}

void BeliefBuffer::clear() {
    entries_.clear();
    stale_drops_ = 0;
}

void BeliefBuffer::push(const BeliefState& prior) {
    if (!entries_.empty() && prior.time != latest_time() + 1)
        throw UsageError("BeliefBuffer::push: non-contiguous time index");
    entries_.push_back(Entry{prior, prior, 0});
    if (size() > capacity_) entries_.pop_front();
}

void BeliefBuffer::record_fusion(int t, const BeliefState& posterior, int sensor_id) {
    if (!contains(t)) throw UsageError("BeliefBuffer::record_fusion: time not buffered");
    Entry& e = entries_[t - earliest_time()];
    e.posterior = posterior;
    e.fused_sensor = sensor_id;
}

bool BeliefBuffer::contains(int t) const {
    return !entries_.empty() && t >= earliest_time() && t <= latest_time();
}

int BeliefBuffer::earliest_time() const {
    if (entries_.empty()) throw UsageError("BeliefBuffer: empty");
    return entries_.front().prior.time;
}

int BeliefBuffer::latest_time() const {
    if (entries_.empty()) throw UsageError("BeliefBuffer: empty");
    return entries_.back().prior.time;
}

const BeliefBuffer::Entry& BeliefBuffer::entry_at(int t) const {
    if (!contains(t)) throw UsageError("BeliefBuffer: time not buffered");
    return entries_[t - earliest_time()];
}

const BeliefState& BeliefBuffer::prior_at(int t) const { return entry_at(t).prior; }
const BeliefState& BeliefBuffer::posterior_at(int t) const { return entry_at(t).posterior; }
int BeliefBuffer::fused_at(int t) const { return entry_at(t).fused_sensor; }

BeliefState fuse_posteriors(const BeliefState& propagated, const BeliefState& system) {
    if (propagated.time != system.time)
        throw UsageError("fuse_posteriors: mismatched time indices");
    const int n = static_cast<int>(propagated.mean.size());

    Eigen::MatrixXd sum = symmetrize(propagated.cov + system.cov);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(sum);
    // K = P^p (P^p + P)^{-1}; solve (P^p + P) K^T = P^p.
    Eigen::MatrixXd gain = ldlt.solve(propagated.cov).transpose();
    if (ldlt.info() != Eigen::Success || !gain.allFinite()) {
        ++g_fusion_regularizations;
        sum += 1e-9 * Eigen::MatrixXd::Identity(n, n);
        gain = sum.ldlt().solve(propagated.cov).transpose();
        if (!gain.allFinite()) throw FilterError("fuse_posteriors: singular covariance sum");
    }

    BeliefState out;
    out.mean = propagated.mean + gain * (system.mean - propagated.mean);
    out.cov = symmetrize((Eigen::MatrixXd::Identity(n, n) - gain) * propagated.cov);
    out.time = propagated.time;
    out.kind = BeliefKind::kPosterior;
    return out;
}

int fusion_regularizations() { return g_fusion_regularizations.load(); }

std::optional<BeliefState> apply_delayed(BeliefBuffer& buffer, const DelayedMeasurement& meas,
                                         const SensorModel& sensor, const ProcessModel& model) {
    if (meas.delay < 0) throw UsageError("apply_delayed: negative delay");
    if (buffer.empty()) throw UsageError("apply_delayed: empty buffer");
    const int k = buffer.latest_time();
    if (meas.gen_time + meas.delay != k)
        throw UsageError("apply_delayed: gen_time + delay must equal the buffered current time");
    if (!buffer.contains(meas.gen_time)) {
        buffer.count_stale_drop();
        return std::nullopt;
    }

    // Update at the generation time from the stored prior, then walk forward,
    // re-merging the branch with the system posterior wherever one landed.
    // The generation slot itself counts: a fusion recorded at gen_time carries
    // information the branch must not discard.
    BeliefState branch = update(buffer.prior_at(meas.gen_time), sensor, meas.value);
    if (buffer.fused_at(meas.gen_time) != 0)
        branch = fuse_posteriors(branch, buffer.posterior_at(meas.gen_time));
    for (int j = meas.gen_time + 1; j <= k; ++j) {
        branch = predict(branch, model);
        if (buffer.fused_at(j) != 0) branch = fuse_posteriors(branch, buffer.posterior_at(j));
    }

    buffer.record_fusion(k, branch, meas.sensor_id);
    return branch;
}

BeliefState replay_exact(const BeliefState& start_posterior, std::vector<DelayedMeasurement> log,
                         const ProcessModel& model, const std::vector<SensorModel>& sensors,
                         int end_time) {
    if (end_time < start_posterior.time)
        throw UsageError("replay_exact: end_time precedes the start posterior");
    std::stable_sort(log.begin(), log.end(),
                     [](const DelayedMeasurement& a, const DelayedMeasurement& b) {
                         return a.gen_time < b.gen_time;
                     });

    BeliefState belief = start_posterior;
    std::size_t next = 0;
    // Measurements at the start time update the starting posterior directly.
    while (next < log.size() && log[next].gen_time == belief.time) {
        belief = update(belief, sensors.at(log[next].sensor_id - 1), log[next].value);
        ++next;
    }
    for (int t = start_posterior.time + 1; t <= end_time; ++t) {
        belief = predict(belief, model);
        while (next < log.size() && log[next].gen_time == t) {
            belief = update(belief, sensors.at(log[next].sensor_id - 1), log[next].value);
            ++next;
        }
    }
    return belief;
}

double info_gain(double prior_trace, const BeliefState& fused) {
    return prior_trace - fused.cov.trace();
}

}  // namespace delaykf
