#pragma once

#include <Eigen/Dense>
#include <vector>

#include "delaykf/linmodel.hpp"

namespace delaykf {

/// Invariant-subspace split of A: the first unstable_dim columns of basis
/// span the subspace of eigenvalues with |lambda| >= 1 - tol, and
/// unstable_block is A restricted to it (A Z_u = Z_u A_u). Computed from an
/// ordered real Schur decomposition, so conjugate pairs stay together.
struct SpectralSplit {
    int unstable_dim = 0;            // r
    Eigen::MatrixXd unstable_block;  // r x r
    Eigen::MatrixXd basis;           // N x N orthogonal, A = basis T basis^T
    double spectral_radius = 0.0;
    bool boundary_warning = false;   // an eigenvalue fell in [1-tol, 1+tol)
};

SpectralSplit spectral_split(const Eigen::MatrixXd& a, double tol = 1e-9);

/// Sensor output restricted to the unstable subspace: C_i^u = C_i Z_u (m x r).
Eigen::MatrixXd unstable_output(const SensorModel& sensor, const SpectralSplit& split);

/// Stacks B_0..B_{r-1} where B_j = [C_1^u; ...; C_M^u] A_u^j.
Eigen::MatrixXd build_observability(const std::vector<SensorModel>& sensors,
                                    const SpectralSplit& split);

struct StabilityReport {
    bool feasible = false;
    int rank_observability = 0;  // numerical rank of the stacked matrix
    int unstable_dim = 0;
    bool condition2_holds = false;
    std::vector<int> witness_schedule;  // sensor ids, one per step when found
    double spectral_radius = 0.0;
    bool boundary_warning = false;
};

/// Decides whether bounded expected estimation error is achievable under some
/// schedule: (1) rank of the stacked observability matrix equals r, and
/// (2) r linearly independent rows exist with the i-th drawn from B_i
/// (greedy search, exhaustive fallback, randomized restarts on large fleets).
StabilityReport check_feasibility(const std::vector<SensorModel>& sensors,
                                  const SpectralSplit& split, double rank_tol = 1e-9);

std::string describe(const StabilityReport& report);

}  // namespace delaykf
