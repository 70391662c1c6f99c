#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "delaykf/rng.hpp"

namespace delaykf {

/// Discrete LTI process x_{k+1} = A x_k + w_k with w_k ~ N(0, Q).
/// Q must be symmetric PSD; a noise factor L with Q = L L^T is computed once
/// via an eigenvalue-clipped square root so rank-deficient Q is handled.
class ProcessModel {
  public:
    ProcessModel(Eigen::MatrixXd a, Eigen::MatrixXd q);

    int dim() const { return dim_; }
    const Eigen::MatrixXd& a() const { return a_; }
    const Eigen::MatrixXd& q() const { return q_; }
    const Eigen::MatrixXd& noise_factor() const { return noise_factor_; }

  private:
    int dim_ = 0;
    Eigen::MatrixXd a_;
    Eigen::MatrixXd q_;
    Eigen::MatrixXd noise_factor_;
};

/// One heterogeneous sensor: y = C x + v with v ~ N(0, R), R strictly PD.
/// Samples are generated with probability sample_prob per step; energy per
/// transmission is assigned later from the link budget.
class SensorModel {
  public:
    SensorModel(int id, Eigen::MatrixXd c, Eigen::MatrixXd r, double sample_prob,
                double distance);

    int id() const { return id_; }
    int obs_dim() const { return static_cast<int>(c_.rows()); }
    int state_dim() const { return static_cast<int>(c_.cols()); }
    const Eigen::MatrixXd& c() const { return c_; }
    const Eigen::MatrixXd& r() const { return r_; }
    const Eigen::MatrixXd& noise_factor() const { return noise_factor_; }
    double sample_prob() const { return sample_prob_; }
    double distance() const { return distance_; }

    double energy() const { return energy_; }
    void set_energy(double joules) { energy_ = joules; }

  private:
    int id_ = 0;
    Eigen::MatrixXd c_;
    Eigen::MatrixXd r_;
    Eigen::MatrixXd noise_factor_;  // lower Cholesky factor of R
    double sample_prob_ = 1.0;
    double distance_ = 0.0;
    double energy_ = 0.0;
};

/// A measurement held by a sensor: generated at gen_time from the true state.
struct Sample {
    int gen_time = 0;
    Eigen::VectorXd value;
};

struct GenerationRanges {
    double epsilon = 0.01;  // regularizer in Q = qq^T + eps I and R = rr^T + eps I
    double p_low = 0.4, p_high = 0.6;
    double q_low = 0.0, q_high = 1.0;
    double r_low = 0.0, r_high = 1.0;
    double c_low = -1.0, c_high = 1.0;
    double d_min = 100.0, d_max = 300.0;
    // Optional rescale of A to a target spectral radius; off by default, the
    // raw U[0,1) draw is used as stated.
    bool rescale_spectral = false;
    double spectral_target = 0.95;
};

struct System {
    ProcessModel model;
    std::vector<SensorModel> sensors;
};

/// Draws a random system: a_ij ~ U[0,1), c_ij ~ U[c_low,c_high),
/// Q = qq^T + eps I, R_i = rr^T + eps I, m_i uniform on {1..N},
/// p_i ~ U(p_low,p_high), d_i ~ U(d_min,d_max). Deterministic per seed;
/// the draw order keeps A and C identical when only p/q/r ranges change.
System generate_system(std::uint64_t seed, int n_states, int n_sensors,
                       const GenerationRanges& ranges = {});

/// One step of the truth process: A x + w, w ~ N(0, Q).
Eigen::VectorXd step_truth(const ProcessModel& model, const Eigen::VectorXd& x, Rng& rng);

/// With probability sample_prob returns a fresh sample (gen_time = k,
/// value = C x + v); otherwise nullopt and the caller keeps any older sample.
std::optional<Sample> maybe_sample(const SensorModel& sensor, const Eigen::VectorXd& x_true,
                                   int k, Rng& rng);

/// Ground-truth bookkeeping for one simulation: the state trajectory and the
/// latest sample held by each sensor (sensors keep only their newest sample).
class GroundTruth {
  public:
    GroundTruth(Eigen::VectorXd x0, int n_sensors);

    /// Advances the truth one step and lets every sensor attempt a sample.
    void advance(const ProcessModel& model, const std::vector<SensorModel>& sensors, Rng& rng);

    int time() const { return static_cast<int>(trajectory_.size()) - 1; }
    const std::vector<Eigen::VectorXd>& trajectory() const { return trajectory_; }
    const Eigen::VectorXd& state() const { return trajectory_.back(); }
    const std::optional<Sample>& held(int sensor_index) const { return held_.at(sensor_index); }

  private:
    std::vector<Eigen::VectorXd> trajectory_;
    std::vector<std::optional<Sample>> held_;
};

/// Plain-text system snapshot (documented in the README); values round-trip.
void save_system(const std::string& path, const System& system);
System load_system(const std::string& path);

}  // namespace delaykf
