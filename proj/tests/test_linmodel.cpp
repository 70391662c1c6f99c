#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cstdio>
#include <filesystem>

#include "delaykf/errors.hpp"
#include "delaykf/linmodel.hpp"
#include "test_support.hpp"

using namespace delaykf;

TEST_CASE("generate_system draws a valid heterogeneous fleet") {
    const System sys = generate_system(42, 5, 20);
    CHECK(sys.model.dim() == 5);
    CHECK(sys.sensors.size() == 20);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> q_eig(sys.model.q());
    CHECK(q_eig.eigenvalues().minCoeff() >= -1e-10);
    CHECK((sys.model.a().array() >= 0.0).all());
    CHECK((sys.model.a().array() < 1.0).all());

    for (const auto& s : sys.sensors) {
        CHECK(s.obs_dim() >= 1);
        CHECK(s.obs_dim() <= 5);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> r_eig(s.r());
        CHECK(r_eig.eigenvalues().minCoeff() > 0.0);
        CHECK(s.sample_prob() > 0.4);
        CHECK(s.sample_prob() < 0.6);
        CHECK(s.distance() >= 100.0);
        CHECK(s.distance() <= 300.0);
    }
}

TEST_CASE("degenerate noise draw still yields R = eps I, strictly PD") {
    GenerationRanges ranges;
    ranges.r_low = 0.0;
    ranges.r_high = 0.0;
    const System sys = generate_system(3, 4, 3, ranges);
    for (const auto& s : sys.sensors) {
        const Eigen::MatrixXd expected =
            0.01 * Eigen::MatrixXd::Identity(s.obs_dim(), s.obs_dim());
        CHECK((s.r() - expected).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("same seed regenerates bitwise-identical models") {
    const System a = generate_system(7, 5, 8);
    const System b = generate_system(7, 5, 8);
    CHECK(a.model.a() == b.model.a());
    CHECK(a.model.q() == b.model.q());
    REQUIRE(a.sensors.size() == b.sensors.size());
    for (std::size_t i = 0; i < a.sensors.size(); ++i) {
        CHECK(a.sensors[i].c() == b.sensors[i].c());
        CHECK(a.sensors[i].r() == b.sensors[i].r());
        CHECK(a.sensors[i].sample_prob() == b.sensors[i].sample_prob());
        CHECK(a.sensors[i].distance() == b.sensors[i].distance());
    }
}

TEST_CASE("invalid generation arguments are configuration errors") {
    CHECK_THROWS_AS(generate_system(1, 0, 5), ConfigError);
    CHECK_THROWS_AS(generate_system(1, 5, 0), ConfigError);
    GenerationRanges bad;
    bad.p_low = 0.9;
    bad.p_high = 0.1;
    CHECK_THROWS_AS(generate_system(1, 5, 5, bad), ConfigError);
}

TEST_CASE("spectral rescale flag caps the spectral radius") {
    GenerationRanges ranges;
    ranges.rescale_spectral = true;
    ranges.spectral_target = 0.9;
    const System sys = generate_system(11, 5, 2, ranges);
    CHECK(sys.model.a().eigenvalues().cwiseAbs().maxCoeff() ==
          doctest::Approx(0.9).epsilon(1e-9));
}

TEST_CASE("step_truth is exact when Q = 0") {
    Rng rng(1);
    const Eigen::VectorXd v = testing::random_vector(4, rng);
    const ProcessModel identity(Eigen::MatrixXd::Identity(4, 4), Eigen::MatrixXd::Zero(4, 4));
    CHECK((step_truth(identity, v, rng) - v).cwiseAbs().maxCoeff() == 0.0);

    Eigen::MatrixXd a(1, 1), q(1, 1);
    a << 2.0;
    q << 0.0;
    const ProcessModel doubling(a, q);
    Eigen::VectorXd x(1);
    x << 3.0;
    CHECK(step_truth(doubling, x, rng)(0) == doctest::Approx(6.0).epsilon(1e-15));
}

TEST_CASE("process noise empirical covariance matches Q at 1e5 samples") {
    Rng gen(5);
    Eigen::MatrixXd qroot = testing::random_matrix(5, 5, gen, 0.0, 1.0);
    const Eigen::MatrixXd q = qroot * qroot.transpose() + 0.01 * Eigen::MatrixXd::Identity(5, 5);
    const ProcessModel model(Eigen::MatrixXd::Zero(5, 5), q);  // A = 0: output is pure noise

    Rng rng(1234);
    const int n = 100000;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(5, 5);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(5);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd w = step_truth(model, x0, rng);
        acc += w * w.transpose();
    }
    acc /= n;
    CHECK((acc - q).norm() <= 0.05 * q.norm());
}

TEST_CASE("maybe_sample respects the sampling probability") {
    Rng gen(2);
    Eigen::MatrixXd c = testing::random_matrix(2, 3, gen);

    SUBCASE("p = 1 samples every step with small noise") {
        SensorModel sensor(1, c, 1e-12 * Eigen::MatrixXd::Identity(2, 2), 1.0, 100.0);
        Rng rng(3);
        const Eigen::VectorXd x = testing::random_vector(3, rng);
        for (int k = 1; k <= 50; ++k) {
            const auto s = maybe_sample(sensor, x, k, rng);
            REQUIRE(s.has_value());
            CHECK(s->gen_time == k);
            CHECK((s->value - c * x).cwiseAbs().maxCoeff() < 1e-4);
        }
    }

    SUBCASE("p = 0 never samples") {
        SensorModel sensor(1, c, Eigen::MatrixXd::Identity(2, 2), 0.0, 100.0);
        Rng rng(3);
        const Eigen::VectorXd x = testing::random_vector(3, rng);
        for (int k = 1; k <= 1000; ++k) CHECK(!maybe_sample(sensor, x, k, rng).has_value());
    }

    SUBCASE("p = 0.5 empirical rate within 0.02 of 0.5 over 1e4 steps") {
        SensorModel sensor(1, c, Eigen::MatrixXd::Identity(2, 2), 0.5, 100.0);
        Rng rng(99);
        const Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
        int hits = 0;
        for (int k = 1; k <= 10000; ++k)
            if (maybe_sample(sensor, x, k, rng)) ++hits;
        CHECK(std::abs(hits / 10000.0 - 0.5) <= 0.02);
    }
}

TEST_CASE("held sample generation times are non-decreasing") {
    const System sys = generate_system(21, 4, 6);
    Rng rng(77);
    GroundTruth truth(Eigen::VectorXd::Zero(4), 6);
    std::vector<int> last(6, -1);
    for (int k = 1; k <= 200; ++k) {
        truth.advance(sys.model, sys.sensors, rng);
        for (int i = 0; i < 6; ++i) {
            if (const auto& s = truth.held(i)) {
                CHECK(s->gen_time >= last[i]);
                CHECK(s->gen_time <= truth.time());
                last[i] = s->gen_time;
            }
        }
    }
    CHECK(truth.trajectory().size() == 201);
}

TEST_CASE("system snapshot round-trips exactly") {
    System sys = generate_system(13, 3, 4);
    for (auto& s : sys.sensors) s.set_energy(1e-7 * s.id());
    const std::string path =
        (std::filesystem::temp_directory_path() / "delaykf_system_roundtrip.txt").string();
    save_system(path, sys);
    const System back = load_system(path);
    CHECK(back.model.a() == sys.model.a());
    CHECK(back.model.q() == sys.model.q());
    REQUIRE(back.sensors.size() == sys.sensors.size());
    for (std::size_t i = 0; i < sys.sensors.size(); ++i) {
        CHECK(back.sensors[i].c() == sys.sensors[i].c());
        CHECK(back.sensors[i].r() == sys.sensors[i].r());
        CHECK(back.sensors[i].sample_prob() == sys.sensors[i].sample_prob());
        CHECK(back.sensors[i].distance() == sys.sensors[i].distance());
        CHECK(back.sensors[i].energy() == sys.sensors[i].energy());
    }
    std::filesystem::remove(path);
}
