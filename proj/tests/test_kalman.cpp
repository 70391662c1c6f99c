#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "delaykf/kalman.hpp"
#include "test_support.hpp"

using namespace delaykf;

namespace {

BeliefState make_belief(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, int time,
                        BeliefKind kind) {
    return BeliefState{mean, cov, time, kind};
}

SensorModel scalar_sensor(double c, double r) {
    Eigen::MatrixXd cm(1, 1), rm(1, 1);
    cm << c;
    rm << r;
    return SensorModel(1, cm, rm, 1.0, 100.0);
}

ProcessModel scalar_model(double a, double q) {
    Eigen::MatrixXd am(1, 1), qm(1, 1);
    am << a;
    qm << q;
    return ProcessModel(am, qm);
}

// Plain triple-loop evaluation of A P A^T + Q, independent of Eigen products.
Eigen::MatrixXd predict_cov_oracle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& p,
                                   const Eigen::MatrixXd& q) {
    const int n = static_cast<int>(a.rows());
    Eigen::MatrixXd ap = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) ap(i, j) += a(i, k) * p(k, j);
    Eigen::MatrixXd out = q;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) out(i, j) += ap(i, k) * a(j, k);
    return out;
}

}  // namespace

TEST_CASE("scalar prediction step") {
    const auto model = scalar_model(1.0, 1.0);
    const auto b = make_belief(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1), 0,
                               BeliefKind::kPosterior);
    const BeliefState out = predict(b, model);
    CHECK(out.cov(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(out.time == 1);
    CHECK(out.kind == BeliefKind::kPrior);
}

TEST_CASE("A = 0 prediction returns exactly Q") {
    Rng rng(4);
    const Eigen::MatrixXd q = testing::random_spd(4, rng);
    const ProcessModel model(Eigen::MatrixXd::Zero(4, 4), q);
    const auto b = make_belief(testing::random_vector(4, rng), testing::random_spd(4, rng), 3,
                               BeliefKind::kPosterior);
    const BeliefState out = predict(b, model);
    CHECK((out.cov - symmetrize(q)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(out.mean.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("random prediction matches the direct re-evaluation oracle") {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXd a = testing::random_matrix(5, 5, rng);
        const Eigen::MatrixXd q = testing::random_spd(5, rng);
        const ProcessModel model(a, q);
        const auto b = make_belief(testing::random_vector(5, rng), testing::random_spd(5, rng),
                                   0, BeliefKind::kPosterior);
        const BeliefState out = predict(b, model);
        const Eigen::MatrixXd expected = predict_cov_oracle(a, b.cov, q);
        CHECK((out.cov - symmetrize(expected)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("scalar update halves unit covariance") {
    const auto sensor = scalar_sensor(1.0, 1.0);
    Eigen::VectorXd mean(1);
    mean << 1.7;
    const auto prior = make_belief(mean, Eigen::MatrixXd::Identity(1, 1), 1, BeliefKind::kPrior);
    Eigen::VectorXd y(1);
    y << 1.7;  // measurement equal to the prior mean
    const BeliefState out = update(prior, sensor, y);
    CHECK(out.cov(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(out.mean(0) == doctest::Approx(1.7).epsilon(1e-15));
    CHECK(out.kind == BeliefKind::kPosterior);
}

TEST_CASE("uninformative measurement leaves the belief nearly unchanged") {
    Rng rng(8);
    const Eigen::MatrixXd c = testing::random_matrix(2, 4, rng);
    SensorModel sensor(1, c, 1e8 * Eigen::MatrixXd::Identity(2, 2), 1.0, 100.0);
    const auto prior = make_belief(testing::random_vector(4, rng), testing::random_spd(4, rng),
                                   1, BeliefKind::kPrior);
    const BeliefState out = update(prior, sensor, testing::random_vector(2, rng));
    CHECK((out.cov - prior.cov).norm() < 1e-6 * prior.cov.norm());
}

TEST_CASE("update covariance matches the information-form oracle") {
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = rng.uniform_int(1, 5);
        const int m = rng.uniform_int(1, n);
        const Eigen::MatrixXd c = testing::random_matrix(m, n, rng);
        const Eigen::MatrixXd r = testing::random_spd(m, rng);
        SensorModel sensor(1, c, r, 1.0, 100.0);
        const Eigen::MatrixXd p = testing::random_spd(n, rng);
        const auto prior =
            make_belief(testing::random_vector(n, rng), p, 1, BeliefKind::kPrior);
        const BeliefState out = update(prior, sensor, testing::random_vector(m, rng));

        const Eigen::MatrixXd info =
            (p.inverse() + c.transpose() * r.inverse() * c).inverse();
        CHECK((out.cov - info).norm() <= 1e-8 * info.norm());
        // The posterior never exceeds the prior in trace.
        CHECK(out.cov.trace() <= prior.cov.trace() + 1e-9);
    }
}

TEST_CASE("Joseph form agrees with the standard form") {
    Rng rng(10);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::MatrixXd c = testing::random_matrix(2, 3, rng);
        SensorModel sensor(1, c, testing::random_spd(2, rng), 1.0, 100.0);
        const auto prior = make_belief(testing::random_vector(3, rng),
                                       testing::random_spd(3, rng), 1, BeliefKind::kPrior);
        const Eigen::VectorXd y = testing::random_vector(2, rng);
        const BeliefState standard = update(prior, sensor, y, CovUpdateForm::kStandard);
        const BeliefState joseph = update(prior, sensor, y, CovUpdateForm::kJoseph);
        CHECK((standard.cov - joseph.cov).norm() < 1e-10 * (1.0 + standard.cov.norm()));
        CHECK((standard.mean - joseph.mean).norm() < 1e-10);
    }
}

TEST_CASE("predict-update iteration converges to the scalar DARE fixed point") {
    // a = 1.2, c = 1, q = 1, r = 1: closed-form positive root of
    // c^2 P^2 + (r - a^2 r - q c^2) P - q r = 0.
    const double expected = 1.952233744059949;
    const auto model = scalar_model(1.2, 1.0);
    const auto sensor = scalar_sensor(1.0, 1.0);
    BeliefState belief = make_belief(Eigen::VectorXd::Zero(1),
                                     Eigen::MatrixXd::Identity(1, 1), 0, BeliefKind::kPosterior);
    Eigen::VectorXd y(1);
    y << 0.0;
    double prior_var = 0.0;
    for (int k = 0; k < 200; ++k) {
        const BeliefState prior = predict(belief, model);
        prior_var = prior.cov(0, 0);
        belief = update(prior, sensor, y);
    }
    CHECK(prior_var == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("updated covariance stays symmetric PSD on random instances") {
    Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = rng.uniform_int(2, 5);
        const int m = rng.uniform_int(1, n);
        SensorModel sensor(1, testing::random_matrix(m, n, rng), testing::random_spd(m, rng),
                           1.0, 100.0);
        const auto prior = make_belief(testing::random_vector(n, rng),
                                       testing::random_spd(n, rng), 1, BeliefKind::kPrior);
        const BeliefState out = update(prior, sensor, testing::random_vector(m, rng));
        CHECK((out.cov - out.cov.transpose()).cwiseAbs().maxCoeff() < 1e-9);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.cov);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-9);
    }
}
