#include "delaykf/policy.hpp"

#include <cmath>

#include "delaykf/errors.hpp"

namespace delaykf {

int RandomPolicy::select_action(const Environment& env, Rng& rng) {
    return rng.uniform_int(0, env.n_sensors());
}

std::vector<double> hypothetical_gains(const Environment& env) {
    std::vector<double> gains(env.sensors().size(), 0.0);
    const BeliefState next_prior = predict(env.belief(), env.model());
    for (std::size_t i = 0; i < env.sensors().size(); ++i) {
        const auto& held = env.held_sample(static_cast<int>(i));
        if (!held.has_value()) continue;
        const int delta = next_prior.time - held->gen_time;
        BeliefBuffer scratch = env.buffer();  // dry run; the real buffer is untouched
        scratch.push(next_prior);
        DelayedMeasurement meas{static_cast<int>(i) + 1, held->gen_time, held->value, delta};
        if (auto fused = apply_delayed(scratch, meas, env.sensors()[i], env.model()))
            gains[i] = info_gain(next_prior.cov.trace(), *fused);
    }
    return gains;
}

int GreedyPolicy::select_action(const Environment& env, Rng&) {
    const std::vector<double> gains = hypothetical_gains(env);
    const double beta = env.beta();
    const double max_e = env.max_energy();
    const double trace_p0 = env.trace_p0();

    int best = 0;
    double best_ratio = 0.0;
    for (std::size_t i = 0; i < gains.size(); ++i) {
        if (gains[i] <= 0.0) continue;
        const double energy = env.sensors()[i].energy();
        // Reward-improving only: the normalized gain must beat the energy term.
        if (gains[i] / trace_p0 <= beta * energy / max_e) continue;
        const double ratio = gains[i] / (beta * energy);
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best = static_cast<int>(i) + 1;
        }
    }
    return best;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    const double m = logits.maxCoeff();
    Eigen::VectorXd e = (logits.array() - m).exp();
    return e / e.sum();
}

int sample_categorical(const Eigen::VectorXd& probs, Rng& rng) {
    const double u = rng.uniform(0.0, 1.0);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        acc += probs(i);
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
}

MlpPolicy::MlpPolicy(Mlp actor, bool stochastic, std::string label)
    : actor_(std::move(actor)), stochastic_(stochastic), label_(std::move(label)) {}

int MlpPolicy::select_action(const Environment& env, Rng& rng) {
    const Eigen::VectorXd logits = actor_.forward(env.state().encode());
    if (!stochastic_) {
        Eigen::Index best = 0;
        logits.maxCoeff(&best);
        return static_cast<int>(best);
    }
    return sample_categorical(softmax(logits), rng);
}

std::unique_ptr<Policy> make_baseline_policy(const std::string& name) {
    if (name == "idle") return std::make_unique<IdlePolicy>();
    if (name == "random") return std::make_unique<RandomPolicy>();
    if (name == "greedy") return std::make_unique<GreedyPolicy>();
    throw ConfigError("unknown baseline policy: " + name);
}

}  // namespace delaykf
