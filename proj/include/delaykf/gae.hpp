#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace delaykf {

struct GaeResult {
    Eigen::VectorXd advantages;
    Eigen::VectorXd returns;  // advantages + values
};

/// Generalized advantage estimation over one environment's trajectory.
/// dones[t] marks an episode boundary after step t (the value bootstrap is
/// cut there); bootstrap_value is V(s_T) for the final partial segment.
/// delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t)
/// A_t = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
GaeResult compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                      const std::vector<std::uint8_t>& dones, double bootstrap_value,
                      double gamma, double lambda);

}  // namespace delaykf
