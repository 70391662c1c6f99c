#include "delaykf/linmodel.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <sstream>

#include "delaykf/csv.hpp"
#include "delaykf/errors.hpp"

namespace delaykf {

namespace {

constexpr double kPsdTol = 1e-10;

// Eigenvalue-clipped square root: valid for any symmetric PSD input, also
// when a Cholesky factorization would fail on near-singular matrices.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * clipped.asDiagonal();
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ' ';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
}

Eigen::MatrixXd read_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            if (!(in >> m(i, j))) throw IoError("system snapshot: truncated matrix");
    return m;
}

void expect_token(std::istream& in, const std::string& want) {
    std::string got;
    if (!(in >> got) || got != want)
        throw IoError("system snapshot: expected '" + want + "', got '" + got + "'");
}

}  // namespace

ProcessModel::ProcessModel(Eigen::MatrixXd a, Eigen::MatrixXd q)
    : dim_(static_cast<int>(a.rows())), a_(std::move(a)), q_(std::move(q)) {
    if (dim_ < 1 || a_.cols() != dim_) throw ConfigError("ProcessModel: A must be square, N >= 1");
    if (q_.rows() != dim_ || q_.cols() != dim_) throw ConfigError("ProcessModel: Q must be N x N");
    if (!a_.allFinite() || !q_.allFinite()) throw ConfigError("ProcessModel: non-finite entries");
    if ((q_ - q_.transpose()).cwiseAbs().maxCoeff() > 1e-9)
        throw ConfigError("ProcessModel: Q not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q_);
    if (es.eigenvalues().minCoeff() < -kPsdTol)
        throw ConfigError("ProcessModel: Q not positive semi-definite");
    noise_factor_ = psd_sqrt(q_);
}

SensorModel::SensorModel(int id, Eigen::MatrixXd c, Eigen::MatrixXd r, double sample_prob,
                         double distance)
    : id_(id), c_(std::move(c)), r_(std::move(r)), sample_prob_(sample_prob),
      distance_(distance) {
    const int m = static_cast<int>(c_.rows());
    const int n = static_cast<int>(c_.cols());
    if (id_ < 1) throw ConfigError("SensorModel: id must be >= 1");
    if (m < 1 || m > n) throw ConfigError("SensorModel: need 1 <= m <= N");
    if (r_.rows() != m || r_.cols() != m) throw ConfigError("SensorModel: R must be m x m");
    if (!c_.allFinite() || !r_.allFinite()) throw ConfigError("SensorModel: non-finite entries");
    if ((r_ - r_.transpose()).cwiseAbs().maxCoeff() > 1e-9)
        throw ConfigError("SensorModel: R not symmetric");
    // Generated fleets always have p in (0,1]; p = 0 is accepted for
    // hand-built sensors that must never sample.
    if (!(sample_prob_ >= 0.0 && sample_prob_ <= 1.0))
        throw ConfigError("SensorModel: sample_prob must lie in [0,1]");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r_);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw ConfigError("SensorModel: R must be strictly positive definite");
    noise_factor_ = Eigen::LLT<Eigen::MatrixXd>(r_).matrixL();
}

System generate_system(std::uint64_t seed, int n_states, int n_sensors,
                       const GenerationRanges& ranges) {
    if (n_states < 1) throw ConfigError("generate_system: N must be >= 1");
    if (n_sensors < 1) throw ConfigError("generate_system: M must be >= 1");
    if (!(ranges.epsilon > 0.0)) throw ConfigError("generate_system: epsilon must be positive");
    if (!(ranges.p_low > 0.0 && ranges.p_low <= ranges.p_high && ranges.p_high <= 1.0))
        throw ConfigError("generate_system: need 0 < p_low <= p_high <= 1");
    if (ranges.q_low > ranges.q_high || ranges.r_low > ranges.r_high ||
        ranges.c_low > ranges.c_high || ranges.d_min > ranges.d_max || ranges.d_min <= 0.0)
        throw ConfigError("generate_system: malformed draw ranges");

    Rng rng(seed);
    const int n = n_states;

    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = rng.uniform(0.0, 1.0);
    if (ranges.rescale_spectral) {
        const double rho = a.eigenvalues().cwiseAbs().maxCoeff();
        if (rho > 0.0) a *= ranges.spectral_target / rho;
    }

    Eigen::MatrixXd qroot(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) qroot(i, j) = rng.uniform(ranges.q_low, ranges.q_high);
    Eigen::MatrixXd q = qroot * qroot.transpose() +
                        ranges.epsilon * Eigen::MatrixXd::Identity(n, n);

    std::vector<SensorModel> sensors;
    sensors.reserve(n_sensors);
    for (int s = 0; s < n_sensors; ++s) {
        const int m = rng.uniform_int(1, n);
        Eigen::MatrixXd c(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) c(i, j) = rng.uniform(ranges.c_low, ranges.c_high);
        Eigen::MatrixXd rroot(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) rroot(i, j) = rng.uniform(ranges.r_low, ranges.r_high);
        Eigen::MatrixXd r = rroot * rroot.transpose() +
                            ranges.epsilon * Eigen::MatrixXd::Identity(m, m);
        const double p = rng.uniform(ranges.p_low, ranges.p_high);
        const double d = rng.uniform(ranges.d_min, ranges.d_max);
        sensors.emplace_back(s + 1, std::move(c), std::move(r), p, d);
    }

    return System{ProcessModel(std::move(a), std::move(q)), std::move(sensors)};
}

Eigen::VectorXd step_truth(const ProcessModel& model, const Eigen::VectorXd& x, Rng& rng) {
    if (x.size() != model.dim()) throw UsageError("step_truth: state dimension mismatch");
    Eigen::VectorXd z(model.dim());
    for (int i = 0; i < model.dim(); ++i) z(i) = rng.normal();
    return model.a() * x + model.noise_factor() * z;
}

std::optional<Sample> maybe_sample(const SensorModel& sensor, const Eigen::VectorXd& x_true,
                                   int k, Rng& rng) {
    if (!rng.bernoulli(sensor.sample_prob())) return std::nullopt;
    Eigen::VectorXd z(sensor.obs_dim());
    for (int i = 0; i < sensor.obs_dim(); ++i) z(i) = rng.normal();
    return Sample{k, sensor.c() * x_true + sensor.noise_factor() * z};
}

GroundTruth::GroundTruth(Eigen::VectorXd x0, int n_sensors) : held_(n_sensors) {
    trajectory_.push_back(std::move(x0));
}

void GroundTruth::advance(const ProcessModel& model, const std::vector<SensorModel>& sensors,
                          Rng& rng) {
    trajectory_.push_back(step_truth(model, trajectory_.back(), rng));
    const int k = time();
    for (std::size_t i = 0; i < sensors.size(); ++i) {
        if (auto s = maybe_sample(sensors[i], trajectory_.back(), k, rng)) held_[i] = std::move(s);
    }
}

void save_system(const std::string& path, const System& system) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    const auto& model = system.model;
    out << "delaykf-system 1\n";
    out << "dim " << model.dim() << "\n";
    out << "sensors " << system.sensors.size() << "\n";
    out << "A\n";
    write_matrix(out, model.a());
    out << "Q\n";
    write_matrix(out, model.q());
    for (const auto& sensor : system.sensors) {
        out << "sensor " << sensor.id() << "\n";
        out << "m " << sensor.obs_dim() << "\n";
        out << "p " << format_double(sensor.sample_prob()) << "\n";
        out << "d " << format_double(sensor.distance()) << "\n";
        out << "E " << format_double(sensor.energy()) << "\n";
        out << "C\n";
        write_matrix(out, sensor.c());
        out << "R\n";
        write_matrix(out, sensor.r());
    }
    if (!out) throw IoError("write failure: " + path);
}

System load_system(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    expect_token(in, "delaykf-system");
    int version = 0;
    if (!(in >> version) || version != 1) throw IoError("system snapshot: unsupported version");
    expect_token(in, "dim");
    int n = 0;
    in >> n;
    expect_token(in, "sensors");
    int m_count = 0;
    in >> m_count;
    if (!in || n < 1 || m_count < 0) throw IoError("system snapshot: malformed header");
    expect_token(in, "A");
    Eigen::MatrixXd a = read_matrix(in, n, n);
    expect_token(in, "Q");
    Eigen::MatrixXd q = read_matrix(in, n, n);
    std::vector<SensorModel> sensors;
    sensors.reserve(m_count);
    for (int s = 0; s < m_count; ++s) {
        expect_token(in, "sensor");
        int id = 0;
        in >> id;
        expect_token(in, "m");
        int m = 0;
        in >> m;
        expect_token(in, "p");
        double p = 0.0;
        in >> p;
        expect_token(in, "d");
        double d = 0.0;
        in >> d;
        expect_token(in, "E");
        double e = 0.0;
        in >> e;
        if (!in) throw IoError("system snapshot: malformed sensor block");
        expect_token(in, "C");
        Eigen::MatrixXd c = read_matrix(in, m, n);
        expect_token(in, "R");
        Eigen::MatrixXd r = read_matrix(in, m, m);
        SensorModel sensor(id, std::move(c), std::move(r), p, d);
        sensor.set_energy(e);
        sensors.push_back(std::move(sensor));
    }
    return System{ProcessModel(std::move(a), std::move(q)), std::move(sensors)};
}

}  // namespace delaykf
