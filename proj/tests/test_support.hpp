#pragma once

#include <Eigen/Dense>

#include "delaykf/rng.hpp"

namespace delaykf::testing {

inline Eigen::MatrixXd random_matrix(int rows, int cols, Rng& rng, double lo = -1.0,
                                     double hi = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
    return m;
}

inline Eigen::VectorXd random_vector(int n, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
    return v;
}

/// Symmetric positive definite with eigenvalues >= eps.
inline Eigen::MatrixXd random_spd(int n, Rng& rng, double eps = 0.1) {
    Eigen::MatrixXd g = random_matrix(n, n, rng);
    return g * g.transpose() + eps * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace delaykf::testing
