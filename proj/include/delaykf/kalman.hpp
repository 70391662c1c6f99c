#pragma once

#include <Eigen/Dense>

#include "delaykf/linmodel.hpp"

namespace delaykf {

enum class BeliefKind { kPrior, kPosterior };

/// Gaussian belief (x_hat, P) at a discrete time index. Covariances are kept
/// symmetric by construction; PSD is preserved by the filter operations.
struct BeliefState {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    int time = 0;
    BeliefKind kind = BeliefKind::kPosterior;
};

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
    return 0.5 * (m + m.transpose());
}

/// Time update: mean' = A x, cov' = A P A^T + Q, advancing time by one.
BeliefState predict(const BeliefState& belief, const ProcessModel& model);

enum class CovUpdateForm {
    kStandard,  // (I - K C) P, as printed
    kJoseph,    // (I - K C) P (I - K C)^T + K R K^T, for conditioning studies
};

/// Measurement update with a timely measurement y from the given sensor.
/// Uses linear solves for the gain; throws FilterError if the innovation
/// covariance is numerically singular.
BeliefState update(const BeliefState& belief, const SensorModel& sensor,
                   const Eigen::VectorXd& y, CovUpdateForm form = CovUpdateForm::kStandard);

}  // namespace delaykf
