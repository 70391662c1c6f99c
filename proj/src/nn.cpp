#include "delaykf/nn.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "delaykf/errors.hpp"

namespace delaykf {

void Gradients::set_zero() {
    for (auto& m : w) m.setZero();
    for (auto& v : b) v.setZero();
}

Mlp Mlp::with_random_init(const std::vector<int>& sizes, Rng& rng) {
    if (sizes.size() < 2) throw ConfigError("Mlp: need at least input and output sizes");
    for (int s : sizes)
        if (s < 1) throw ConfigError("Mlp: layer sizes must be positive");
    Mlp net;
    net.sizes_ = sizes;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int fan_in = sizes[l];
        const int fan_out = sizes[l + 1];
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int i = 0; i < fan_out; ++i)
            for (int j = 0; j < fan_in; ++j) w(i, j) = rng.uniform(-bound, bound);
        net.w_.push_back(std::move(w));
        net.b_.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return net;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
    return forward_batch(x, nullptr).col(0);
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& x, GradTape* tape) const {
    if (x.rows() != input_dim()) throw UsageError("Mlp::forward: input dimension mismatch");
    if (tape) {
        tape->activations.clear();
        tape->activations.push_back(x);
        tape->consumed = false;
    }
    Eigen::MatrixXd act = x;
    for (int l = 0; l < layer_count(); ++l) {
        Eigen::MatrixXd z = (w_[l] * act).colwise() + b_[l];
        if (l + 1 < layer_count()) {
            act = z.array().tanh().matrix();
            if (tape) tape->activations.push_back(act);
        } else {
            act = std::move(z);  // linear head
        }
    }
    return act;
}

void Mlp::backward(GradTape& tape, const Eigen::MatrixXd& dloss_doutput,
                   Gradients& grads) const {
    if (tape.consumed) throw UsageError("Mlp::backward: tape already consumed");
    if (tape.activations.size() != static_cast<std::size_t>(layer_count()))
        throw UsageError("Mlp::backward: tape does not match this network");
    if (dloss_doutput.rows() != output_dim() ||
        dloss_doutput.cols() != tape.activations.front().cols())
        throw UsageError("Mlp::backward: upstream gradient shape mismatch");
    tape.consumed = true;

    Eigen::MatrixXd delta = dloss_doutput;
    for (int l = layer_count() - 1; l >= 0; --l) {
        grads.w[l] += delta * tape.activations[l].transpose();
        grads.b[l] += delta.rowwise().sum();
        if (l > 0) {
            // d tanh(z) = 1 - tanh(z)^2, recovered from the stored activation.
            delta = (w_[l].transpose() * delta).array() *
                    (1.0 - tape.activations[l].array().square());
        }
    }
}

Gradients Mlp::zero_gradients() const {
    Gradients g;
    for (int l = 0; l < layer_count(); ++l) {
        g.w.push_back(Eigen::MatrixXd::Zero(w_[l].rows(), w_[l].cols()));
        g.b.push_back(Eigen::VectorXd::Zero(b_[l].size()));
    }
    return g;
}

AdamState AdamState::for_net(const Mlp& net) {
    AdamState s;
    for (int l = 0; l < net.layer_count(); ++l) {
        s.m_w.push_back(Eigen::MatrixXd::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
        s.v_w.push_back(Eigen::MatrixXd::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
        s.m_b.push_back(Eigen::VectorXd::Zero(net.biases()[l].size()));
        s.v_b.push_back(Eigen::VectorXd::Zero(net.biases()[l].size()));
    }
    return s;
}

void adam_step(Mlp& net, const Gradients& grads, AdamState& state, double lr, double beta1,
               double beta2, double eps) {
    if (state.m_w.size() != static_cast<std::size_t>(net.layer_count()))
        throw UsageError("adam_step: optimizer state does not match the network");
    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step_count));
    for (int l = 0; l < net.layer_count(); ++l) {
        state.m_w[l] = beta1 * state.m_w[l] + (1.0 - beta1) * grads.w[l];
        state.v_w[l] = beta2 * state.v_w[l] + (1.0 - beta2) * grads.w[l].cwiseProduct(grads.w[l]);
        net.weights()[l].array() -=
            lr * (state.m_w[l].array() / bc1) / ((state.v_w[l].array() / bc2).sqrt() + eps);

        state.m_b[l] = beta1 * state.m_b[l] + (1.0 - beta1) * grads.b[l];
        state.v_b[l] = beta2 * state.v_b[l] + (1.0 - beta2) * grads.b[l].cwiseProduct(grads.b[l]);
        net.biases()[l].array() -=
            lr * (state.m_b[l].array() / bc1) / ((state.v_b[l].array() / bc2).sqrt() + eps);
    }
}

namespace {

void write_net(std::ofstream& out, const Mlp& net) {
    for (int l = 0; l < net.layer_count(); ++l) {
        const auto& w = net.weights()[l];
        out.write(reinterpret_cast<const char*>(w.data()),
                  static_cast<std::streamsize>(sizeof(double) * w.size()));
        const auto& b = net.biases()[l];
        out.write(reinterpret_cast<const char*>(b.data()),
                  static_cast<std::streamsize>(sizeof(double) * b.size()));
    }
}

Mlp read_net(std::ifstream& in, const std::vector<int>& sizes) {
    Rng dummy(0);
    Mlp net = Mlp::with_random_init(sizes, dummy);
    for (int l = 0; l < net.layer_count(); ++l) {
        auto& w = net.weights()[l];
        in.read(reinterpret_cast<char*>(w.data()),
                static_cast<std::streamsize>(sizeof(double) * w.size()));
        auto& b = net.biases()[l];
        in.read(reinterpret_cast<char*>(b.data()),
                static_cast<std::streamsize>(sizeof(double) * b.size()));
    }
    if (!in) throw IoError("checkpoint: truncated parameter block");
    return net;
}

}  // namespace

void save_policy_checkpoint(const std::string& path, const Mlp& actor, const Mlp& critic,
                            std::uint64_t seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    nlohmann::json header;
    header["format"] = "delaykf-policy";
    header["version"] = 1;
    header["actor"] = actor.sizes();
    header["critic"] = critic.sizes();
    header["seed"] = seed;
    out << header.dump() << '\n';
    write_net(out, actor);
    write_net(out, critic);
    if (!out) throw IoError("checkpoint: write failure: " + path);
}

PolicyCheckpoint load_policy_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("checkpoint: missing header");
    nlohmann::json header = nlohmann::json::parse(line, nullptr, false);
    if (header.is_discarded() || header.value("format", "") != "delaykf-policy" ||
        header.value("version", 0) != 1)
        throw IoError("checkpoint: unrecognized header");
    PolicyCheckpoint ckpt;
    ckpt.seed = header.value("seed", std::uint64_t{0});
    ckpt.actor = read_net(in, header.at("actor").get<std::vector<int>>());
    ckpt.critic = read_net(in, header.at("critic").get<std::vector<int>>());
    return ckpt;
}

}  // namespace delaykf
