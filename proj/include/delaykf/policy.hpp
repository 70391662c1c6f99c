#pragma once

#include <memory>
#include <string>

#include "delaykf/env.hpp"
#include "delaykf/nn.hpp"
#include "delaykf/rng.hpp"

namespace delaykf {

/// A scheduler: picks an action in {0..M} given the environment. Baselines
/// may inspect the environment directly; the learned policy only looks at
/// the encoded MDP state.
class Policy {
  public:
    virtual ~Policy() = default;
    virtual int select_action(const Environment& env, Rng& rng) = 0;
    virtual std::string name() const = 0;
};

class IdlePolicy final : public Policy {
  public:
    int select_action(const Environment&, Rng&) override { return 0; }
    std::string name() const override { return "idle"; }
};

class RandomPolicy final : public Policy {
  public:
    int select_action(const Environment& env, Rng& rng) override;
    std::string name() const override { return "random"; }
};

/// Information-per-joule heuristic: picks argmax_i gain_i / (beta E^i) among
/// reward-improving sensors, idle otherwise. Privileged: it dry-runs the
/// delayed fusion on a copy of the belief buffer to price each sensor's held
/// sample one step ahead.
class GreedyPolicy final : public Policy {
  public:
    int select_action(const Environment& env, Rng&) override;
    std::string name() const override { return "greedy"; }
};

/// Hypothetical one-step-ahead information gain for every sensor; entries are
/// zero for sensors holding no (or only stale) samples. Shared by the greedy
/// policy and its tests.
std::vector<double> hypothetical_gains(const Environment& env);

/// Learned actor. Samples from the categorical head during training;
/// evaluation uses the mode.
class MlpPolicy final : public Policy {
  public:
    MlpPolicy(Mlp actor, bool stochastic, std::string label = "ppo");
    int select_action(const Environment& env, Rng& rng) override;
    std::string name() const override { return label_; }
    const Mlp& actor() const { return actor_; }

  private:
    Mlp actor_;
    bool stochastic_;
    std::string label_;
};

/// Softmax probabilities of one logits column.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

/// Draws from a categorical distribution given probabilities.
int sample_categorical(const Eigen::VectorXd& probs, Rng& rng);

std::unique_ptr<Policy> make_baseline_policy(const std::string& name);

}  // namespace delaykf
