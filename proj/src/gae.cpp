#include "delaykf/gae.hpp"

#include "delaykf/errors.hpp"

namespace delaykf {

GaeResult compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                      const std::vector<std::uint8_t>& dones, double bootstrap_value,
                      double gamma, double lambda) {
    const std::size_t n = rewards.size();
    if (values.size() != n || dones.size() != n)
        throw UsageError("compute_gae: misaligned sequences");

    GaeResult out;
    out.advantages.resize(n);
    out.returns.resize(n);
    double last_gae = 0.0;
    for (std::size_t idx = n; idx-- > 0;) {
        const double not_done = dones[idx] ? 0.0 : 1.0;
        const double next_value = (idx + 1 < n) ? values[idx + 1] : bootstrap_value;
        const double delta = rewards[idx] + gamma * next_value * not_done - values[idx];
        last_gae = delta + gamma * lambda * not_done * last_gae;
        out.advantages(idx) = last_gae;
        out.returns(idx) = last_gae + values[idx];
    }
    return out;
}

}  // namespace delaykf
