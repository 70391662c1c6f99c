#include "delaykf/kalman.hpp"

#include "delaykf/errors.hpp"

namespace delaykf {

BeliefState predict(const BeliefState& belief, const ProcessModel& model) {
    if (belief.mean.size() != model.dim()) throw UsageError("predict: dimension mismatch");
    BeliefState out;
    out.mean = model.a() * belief.mean;
    out.cov = symmetrize(model.a() * belief.cov * model.a().transpose() + model.q());
    out.time = belief.time + 1;
    out.kind = BeliefKind::kPrior;
    return out;
}

BeliefState update(const BeliefState& belief, const SensorModel& sensor,
                   const Eigen::VectorXd& y, CovUpdateForm form) {
    const auto& c = sensor.c();
    if (belief.mean.size() != c.cols()) throw UsageError("update: state dimension mismatch");
    if (y.size() != sensor.obs_dim()) throw UsageError("update: measurement dimension mismatch");

    const Eigen::MatrixXd cp = c * belief.cov;                       // C P
    const Eigen::MatrixXd s = symmetrize(cp * c.transpose() + sensor.r());
    Eigen::LDLT<Eigen::MatrixXd> ldlt(s);
    if (ldlt.info() != Eigen::Success)
        throw FilterError("update: innovation covariance factorization failed");
    // K = P C^T S^{-1}; solve S K^T = C P instead of forming S^{-1}.
    const Eigen::MatrixXd gain = ldlt.solve(cp).transpose();
    if (!gain.allFinite()) throw FilterError("update: innovation covariance numerically singular");

    const int n = static_cast<int>(belief.mean.size());
    BeliefState out;
    out.mean = belief.mean + gain * (y - c * belief.mean);
    if (form == CovUpdateForm::kJoseph) {
        const Eigen::MatrixXd ikc = Eigen::MatrixXd::Identity(n, n) - gain * c;
        out.cov = symmetrize(ikc * belief.cov * ikc.transpose() +
                             gain * sensor.r() * gain.transpose());
    } else {
        out.cov = symmetrize(belief.cov - gain * cp);
    }
    out.time = belief.time;
    out.kind = BeliefKind::kPosterior;
    return out;
}

}  // namespace delaykf
