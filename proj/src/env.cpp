#include "delaykf/env.hpp"

#include <cmath>

#include "delaykf/errors.hpp"

namespace delaykf {

void EnvConfig::validate() const {
    if (horizon < 1) throw ConfigError("EnvConfig: horizon must be >= 1");
    if (beta < 0.0) throw ConfigError("EnvConfig: beta must be >= 0");
    if (history_len < 1) throw ConfigError("EnvConfig: history_len must be >= 1");
    if (buffer_len < 1) throw ConfigError("EnvConfig: buffer_len must be >= 1");
    if (!(log_eps > 0.0)) throw ConfigError("EnvConfig: log_eps must be positive");
    if (sensors.empty()) throw ConfigError("EnvConfig: need at least one sensor");
    for (const auto& s : sensors) {
        if (s.state_dim() != model.dim()) throw ConfigError("EnvConfig: sensor dim mismatch");
        if (!(s.energy() > 0.0))
            throw ConfigError("EnvConfig: sensor energies must be assigned before use");
    }
    budget.validate();
}

Eigen::VectorXd MdpState::encode() const {
    Eigen::VectorXd out(log_diag.size() + 2 * static_cast<Eigen::Index>(history.size()));
    out.head(log_diag.size()) = log_diag;
    Eigen::Index at = log_diag.size();
    for (const auto& [id, delay] : history) {
        out(at++) = static_cast<double>(id);
        out(at++) = delay;
    }
    return out;
}

Environment::Environment(EnvConfig config)
    : cfg_(std::move(config)), rng_(cfg_.seed), buffer_(cfg_.buffer_len) {
    cfg_.validate();
    max_energy_ = ::delaykf::max_energy(cfg_.sensors);
    reset();
}

MdpState Environment::make_state() const {
    MdpState s;
    s.log_diag = (belief_.cov.diagonal().array() + cfg_.log_eps).log().matrix();
    s.history = history_;
    return s;
}

MdpState Environment::reset(std::uint64_t seed) {
    cfg_.seed = seed;
    return reset();
}

MdpState Environment::reset() {
    const int n = cfg_.model.dim();
    rng_ = Rng(cfg_.seed);
    k_ = 0;

    // x_0 ~ N(0, P_0) with P_0 = I.
    x_.resize(n);
    for (int i = 0; i < n; ++i) x_(i) = rng_.normal();

    belief_.mean = Eigen::VectorXd::Zero(n);
    belief_.cov = Eigen::MatrixXd::Identity(n, n);
    belief_.time = 0;
    belief_.kind = BeliefKind::kPosterior;
    trace_p0_ = belief_.cov.trace();

    buffer_.clear();
    buffer_.push(belief_);

    held_.assign(cfg_.sensors.size(), std::nullopt);
    history_.assign(cfg_.history_len, {0, 0.0});
    state_ = make_state();
    return state_;
}

StepOutcome Environment::step(int action) {
    if (done()) throw UsageError("Environment::step: episode exhausted");
    if (action < 0 || action > n_sensors()) throw UsageError("Environment::step: bad action");
    ++k_;

    // Truth advances and every sensor draws a sampling opportunity.
    x_ = step_truth(cfg_.model, x_, rng_);
    for (std::size_t i = 0; i < cfg_.sensors.size(); ++i) {
        if (auto s = maybe_sample(cfg_.sensors[i], x_, k_, rng_)) held_[i] = std::move(s);
    }

    const BeliefState prior = predict(belief_, cfg_.model);
    buffer_.push(prior);

    StepInfo info;
    int history_id = 0;
    double history_delay = 0.0;
    belief_ = prior;

    if (action > 0) {
        const SensorModel& sensor = cfg_.sensors[action - 1];
        // The invitation costs energy whether or not a useful packet arrives.
        info.energy_joules = sensor.energy();
        info.energy_norm = sensor.energy() / max_energy_;
        history_id = action;
        const auto& held = held_[action - 1];
        if (held.has_value()) {
            const int delta = k_ - held->gen_time;
            history_delay = static_cast<double>(delta);
            info.delay_used = history_delay;
            DelayedMeasurement meas{action, held->gen_time, held->value, delta};
            if (auto fused = apply_delayed(buffer_, meas, sensor, cfg_.model)) {
                info.info_gain = info_gain(prior.cov.trace(), *fused);
                belief_ = *fused;
            } else {
                info.stale_drop = true;  // sample predates the buffer; discarded
            }
        } else {
            history_delay = static_cast<double>(cfg_.horizon);  // sentinel: nothing to send
            info.delay_used = history_delay;
        }
    }

    history_.insert(history_.begin(), {history_id, history_delay});
    history_.resize(cfg_.history_len);

    info.trace_cov = belief_.cov.trace();
    const double u_hat = info.trace_cov / trace_p0_;
    const double reward = -u_hat - cfg_.beta * info.energy_norm;

    state_ = make_state();
    return StepOutcome{state_, reward, info};
}

}  // namespace delaykf
