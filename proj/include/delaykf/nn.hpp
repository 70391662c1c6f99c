#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "delaykf/rng.hpp"

namespace delaykf {

struct Gradients {
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;

    void set_zero();
};

/// Recorded activations for one batched forward pass; consumed by backward.
struct GradTape {
    std::vector<Eigen::MatrixXd> activations;  // [input, hidden_1, ..., hidden_{L-1}]
    bool consumed = false;
};

/// Dense feed-forward net with tanh hidden layers and a linear output head.
/// Columns are samples in the batched entry points.
class Mlp {
  public:
    Mlp() = default;

    /// Uniform init on +-sqrt(6 / (fan_in + fan_out)), zero biases.
    static Mlp with_random_init(const std::vector<int>& sizes, Rng& rng);

    const std::vector<int>& sizes() const { return sizes_; }
    int input_dim() const { return sizes_.front(); }
    int output_dim() const { return sizes_.back(); }
    int layer_count() const { return static_cast<int>(w_.size()); }

    std::vector<Eigen::MatrixXd>& weights() { return w_; }
    std::vector<Eigen::VectorXd>& biases() { return b_; }
    const std::vector<Eigen::MatrixXd>& weights() const { return w_; }
    const std::vector<Eigen::VectorXd>& biases() const { return b_; }

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x, GradTape* tape = nullptr) const;

    /// Reverse pass for a recorded forward; accumulates parameter gradients.
    /// The tape is single-use: reuse raises UsageError.
    void backward(GradTape& tape, const Eigen::MatrixXd& dloss_doutput, Gradients& grads) const;

    Gradients zero_gradients() const;

  private:
    std::vector<int> sizes_;
    std::vector<Eigen::MatrixXd> w_;  // layer l maps sizes_[l] -> sizes_[l+1]
    std::vector<Eigen::VectorXd> b_;
};

struct AdamState {
    std::vector<Eigen::MatrixXd> m_w, v_w;
    std::vector<Eigen::VectorXd> m_b, v_b;
    long step_count = 0;

    static AdamState for_net(const Mlp& net);
};

/// Standard Adam update (beta1 = 0.9, beta2 = 0.999, eps = 1e-8).
void adam_step(Mlp& net, const Gradients& grads, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

/// Checkpoint: a one-line JSON header (layer sizes, seed) followed by raw
/// little-endian doubles for actor then critic parameters.
void save_policy_checkpoint(const std::string& path, const Mlp& actor, const Mlp& critic,
                            std::uint64_t seed);
struct PolicyCheckpoint {
    Mlp actor;
    Mlp critic;
    std::uint64_t seed = 0;
};
PolicyCheckpoint load_policy_checkpoint(const std::string& path);

}  // namespace delaykf
