#include "delaykf/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "delaykf/errors.hpp"
#include "delaykf/gae.hpp"
#include "delaykf/policy.hpp"

namespace delaykf {

void PpoConfig::validate() const {
    if (!(clip > 0.0)) throw ConfigError("PpoConfig: clip must be positive");
    if (!(discount > 0.0 && discount <= 1.0)) throw ConfigError("PpoConfig: gamma in (0,1]");
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
        throw ConfigError("PpoConfig: gae_lambda in [0,1]");
    if (learning_rate < 0.0) throw ConfigError("PpoConfig: negative learning rate");
    if (n_envs < 1 || n_steps < 1 || n_minibatches < 1 || update_epochs < 1)
        throw ConfigError("PpoConfig: counts must be >= 1");
    if (n_minibatches > batch_size())
        throw ConfigError("PpoConfig: more minibatches than samples");
    if (total_steps < 1) throw ConfigError("PpoConfig: total_steps must be >= 1");
    for (int h : hidden)
        if (h < 1) throw ConfigError("PpoConfig: hidden sizes must be positive");
}

Eigen::VectorXd normalize_advantages(const Eigen::VectorXd& advantages) {
    const double mean = advantages.mean();
    const double var = (advantages.array() - mean).square().mean();
    return (advantages.array() - mean) / (std::sqrt(var) + 1e-8);
}

double clipped_surrogate(double ratio, double advantage, double clip) {
    const double unclipped = ratio * advantage;
    const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip) * advantage;
    return -std::min(unclipped, clipped);
}

std::vector<int> balanced_partition(int total, int parts) {
    if (parts < 1 || total < parts) throw UsageError("balanced_partition: bad arguments");
    const int base = total / parts;
    const int extra = total % parts;
    std::vector<int> sizes(parts, base);
    for (int i = 0; i < extra; ++i) sizes[i] += 1;
    return sizes;
}

PpoDiagnostics ppo_loss(const RolloutBatch& batch, const std::vector<int>& indices,
                        const Mlp& actor, const Mlp& critic, const PpoConfig& cfg,
                        Gradients* actor_grads, Gradients* critic_grads) {
    const int b = static_cast<int>(indices.size());
    if (b == 0) throw UsageError("ppo_loss: empty minibatch");
    const int n_actions = actor.output_dim();

    Eigen::MatrixXd obs(batch.observations.rows(), b);
    Eigen::VectorXd adv(b), old_logp(b), returns(b);
    std::vector<int> actions(b);
    for (int j = 0; j < b; ++j) {
        const int idx = indices[j];
        obs.col(j) = batch.observations.col(idx);
        adv(j) = batch.advantages(idx);
        old_logp(j) = batch.log_probs(idx);
        returns(j) = batch.returns(idx);
        actions[j] = batch.actions[idx];
    }
    adv = normalize_advantages(adv);

    GradTape actor_tape;
    const Eigen::MatrixXd logits = actor.forward_batch(obs, actor_grads ? &actor_tape : nullptr);

    PpoDiagnostics diag;
    Eigen::MatrixXd dlogits;
    if (actor_grads) dlogits.setZero(n_actions, b);

    const double inv_b = 1.0 / b;
    for (int j = 0; j < b; ++j) {
        const Eigen::VectorXd col = logits.col(j);
        const double m = col.maxCoeff();
        const Eigen::VectorXd shifted = col.array() - m;
        const double lse = m + std::log(shifted.array().exp().sum());
        const Eigen::VectorXd logp = col.array() - lse;
        const Eigen::VectorXd probs = logp.array().exp();

        const double log_ratio = logp(actions[j]) - old_logp(j);
        const double ratio = std::exp(log_ratio);
        if (!std::isfinite(ratio))
            throw FilterError("ppo_loss: non-finite probability ratio, update aborted");

        const double a = adv(j);
        const double unclipped = ratio * a;
        const double clipped = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip) * a;
        diag.policy_loss += clipped_surrogate(ratio, a, cfg.clip) * inv_b;

        const double entropy_j = -(probs.array() * logp.array()).sum();
        diag.entropy += entropy_j * inv_b;
        diag.approx_kl += ((ratio - 1.0) - log_ratio) * inv_b;
        if (std::abs(ratio - 1.0) > cfg.clip) diag.clip_fraction += inv_b;

        if (actor_grads) {
            // Surrogate branch gradient: zero when the clipped branch is
            // active and saturated.
            const double coeff = (unclipped <= clipped) ? -a * ratio : 0.0;
            Eigen::VectorXd g = (-coeff) * probs;
            g(actions[j]) += coeff;
            // Entropy bonus: dH/dlogits = -p (logp + H).
            g += cfg.entropy_coef * (probs.array() * (logp.array() + entropy_j)).matrix();
            dlogits.col(j) = g * inv_b;
        }
    }

    GradTape critic_tape;
    const Eigen::MatrixXd value_row =
        critic.forward_batch(obs, critic_grads ? &critic_tape : nullptr);
    const Eigen::VectorXd vdiff = value_row.row(0).transpose() - returns;
    diag.value_loss = vdiff.squaredNorm() * inv_b;

    diag.total_loss =
        diag.policy_loss + cfg.value_coef * diag.value_loss - cfg.entropy_coef * diag.entropy;

    if (actor_grads) actor.backward(actor_tape, dlogits, *actor_grads);
    if (critic_grads) {
        const Eigen::MatrixXd dvalue =
            (2.0 * cfg.value_coef * inv_b) * vdiff.transpose();
        critic.backward(critic_tape, dvalue, *critic_grads);
    }
    return diag;
}

TrainResult train_ppo(const EnvFactory& make_env, const PpoConfig& cfg, std::uint64_t seed) {
    cfg.validate();

    std::vector<Environment> envs;
    envs.reserve(cfg.n_envs);
    for (int e = 0; e < cfg.n_envs; ++e) envs.push_back(make_env(e));
    const int state_dim = envs[0].state_dim();
    const int n_actions = envs[0].n_actions();

    Rng init_rng(split_seed(seed, "policy-init"));
    std::vector<int> actor_sizes{state_dim};
    actor_sizes.insert(actor_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    actor_sizes.push_back(n_actions);
    std::vector<int> critic_sizes{state_dim};
    critic_sizes.insert(critic_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    critic_sizes.push_back(1);

    TrainResult result;
    result.actor = Mlp::with_random_init(actor_sizes, init_rng);
    result.critic = Mlp::with_random_init(critic_sizes, init_rng);
    AdamState actor_opt = AdamState::for_net(result.actor);
    AdamState critic_opt = AdamState::for_net(result.critic);
    Gradients actor_grads = result.actor.zero_gradients();
    Gradients critic_grads = result.critic.zero_gradients();

    Rng action_rng(split_seed(seed, "rollout-actions"));
    Rng shuffle_rng(split_seed(seed, "minibatch-shuffle"));
    Rng reseed_rng(split_seed(seed, "episode-reseed"));

    const int batch = cfg.batch_size();
    RolloutBatch roll;
    roll.observations.resize(state_dim, batch);
    roll.actions.assign(batch, 0);
    roll.log_probs.resize(batch);
    roll.rewards.resize(batch);
    roll.values.resize(batch);
    roll.dones.assign(batch, 0);
    roll.advantages.resize(batch);
    roll.returns.resize(batch);

    Eigen::MatrixXd current_obs(state_dim, cfg.n_envs);
    std::vector<double> episode_return(cfg.n_envs, 0.0);
    for (int e = 0; e < cfg.n_envs; ++e) current_obs.col(e) = envs[e].reset().encode();

    std::vector<int> order(batch);
    std::iota(order.begin(), order.end(), 0);

    long steps_done = 0;
    while (steps_done < cfg.total_steps) {
        // ---- rollout with the frozen policy ----
        std::vector<double> completed_returns;
        for (int t = 0; t < cfg.n_steps; ++t) {
            const Eigen::MatrixXd logits = result.actor.forward_batch(current_obs);
            const Eigen::MatrixXd values = result.critic.forward_batch(current_obs);
            for (int e = 0; e < cfg.n_envs; ++e) {
                const int col = t * cfg.n_envs + e;
                const Eigen::VectorXd probs = softmax(logits.col(e));
                const int action = sample_categorical(probs, action_rng);

                roll.observations.col(col) = current_obs.col(e);
                roll.actions[col] = action;
                roll.log_probs(col) = std::log(probs(action));
                roll.values(col) = values(0, e);

                const StepOutcome out = envs[e].step(action);
                roll.rewards(col) = out.reward;
                episode_return[e] += out.reward;
                const bool done = envs[e].done();
                roll.dones[col] = done ? 1 : 0;
                if (done) {
                    completed_returns.push_back(episode_return[e]);
                    episode_return[e] = 0.0;
                    current_obs.col(e) = envs[e].reset(reseed_rng.next()).encode();
                } else {
                    current_obs.col(e) = out.next_state.encode();
                }
            }
        }
        steps_done += batch;

        // ---- generalized advantage estimation, per environment ----
        const Eigen::MatrixXd boot = result.critic.forward_batch(current_obs);
        for (int e = 0; e < cfg.n_envs; ++e) {
            std::vector<double> rews(cfg.n_steps), vals(cfg.n_steps);
            std::vector<std::uint8_t> dns(cfg.n_steps);
            for (int t = 0; t < cfg.n_steps; ++t) {
                const int col = t * cfg.n_envs + e;
                rews[t] = roll.rewards(col);
                vals[t] = roll.values(col);
                dns[t] = roll.dones[col];
            }
            const GaeResult gae =
                compute_gae(rews, vals, dns, boot(0, e), cfg.discount, cfg.gae_lambda);
            for (int t = 0; t < cfg.n_steps; ++t) {
                const int col = t * cfg.n_envs + e;
                roll.advantages(col) = gae.advantages(t);
                roll.returns(col) = gae.returns(t);
            }
        }

        // Divergence guard on the critic.
        if (roll.values.cwiseAbs().mean() > 1e6) {
            result.halted_divergence = true;
            result.diagnostic = "value estimates diverged (mean |V| > 1e6), training halted";
            return result;
        }

        // ---- optimization epochs ----
        PpoDiagnostics last;
        const std::vector<int> sizes = balanced_partition(batch, cfg.n_minibatches);
        for (int epoch = 0; epoch < cfg.update_epochs; ++epoch) {
            for (int i = batch - 1; i > 0; --i)
                std::swap(order[i], order[shuffle_rng.uniform_int(0, i)]);
            int at = 0;
            for (int mb = 0; mb < cfg.n_minibatches; ++mb) {
                const std::vector<int> idx(order.begin() + at, order.begin() + at + sizes[mb]);
                at += sizes[mb];
                actor_grads.set_zero();
                critic_grads.set_zero();
                last = ppo_loss(roll, idx, result.actor, result.critic, cfg, &actor_grads,
                                &critic_grads);
                adam_step(result.actor, actor_grads, actor_opt, cfg.learning_rate);
                adam_step(result.critic, critic_grads, critic_opt, cfg.learning_rate);
            }
        }

        IterationLog log;
        log.steps_done = steps_done;
        log.mean_episode_reward =
            completed_returns.empty()
                ? 0.0
                : std::accumulate(completed_returns.begin(), completed_returns.end(), 0.0) /
                      static_cast<double>(completed_returns.size());
        log.policy_loss = last.policy_loss;
        log.value_loss = last.value_loss;
        log.entropy = last.entropy;
        result.curve.push_back(log);
    }
    return result;
}

}  // namespace delaykf
