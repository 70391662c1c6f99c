#include "delaykf/stability.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "delaykf/errors.hpp"
#include "delaykf/rng.hpp"

namespace delaykf {

namespace {

thread_local double g_select_tol = 1e-9;

lapack_logical select_unstable(const double* re, const double* im) {
    return std::hypot(*re, *im) >= 1.0 - g_select_tol;
}

struct TaggedRow {
    int sensor_id;
    Eigen::VectorXd row;
};

// Residual of v against an orthonormal set, relative to |v|.
Eigen::VectorXd residual(const Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>& basis) {
    Eigen::VectorXd res = v;
    for (const auto& b : basis) res -= b.dot(res) * b;
    return res;
}

bool dfs_transversal(const std::vector<std::vector<TaggedRow>>& steps, std::size_t depth,
                     std::vector<Eigen::VectorXd>& basis, std::vector<int>& schedule,
                     double tol) {
    if (depth == steps.size()) return true;
    for (const auto& cand : steps[depth]) {
        const double norm = cand.row.norm();
        if (norm <= 0.0) continue;
        Eigen::VectorXd res = residual(cand.row, basis);
        if (res.norm() <= tol * norm) continue;
        basis.push_back(res.normalized());
        schedule.push_back(cand.sensor_id);
        if (dfs_transversal(steps, depth + 1, basis, schedule, tol)) return true;
        basis.pop_back();
        schedule.pop_back();
    }
    return false;
}

bool greedy_transversal(const std::vector<std::vector<TaggedRow>>& steps,
                        const std::vector<std::vector<std::size_t>>& order,
                        std::vector<int>& schedule, double tol) {
    std::vector<Eigen::VectorXd> basis;
    schedule.clear();
    for (std::size_t i = 0; i < steps.size(); ++i) {
        double best = tol;
        std::size_t best_idx = steps[i].size();
        Eigen::VectorXd best_res;
        for (std::size_t idx : order[i]) {
            const auto& cand = steps[i][idx];
            const double norm = cand.row.norm();
            if (norm <= 0.0) continue;
            Eigen::VectorXd res = residual(cand.row, basis);
            const double rel = res.norm() / norm;
            if (rel > best) {
                best = rel;
                best_idx = idx;
                best_res = std::move(res);
            }
        }
        if (best_idx == steps[i].size()) return false;
        basis.push_back(best_res.normalized());
        schedule.push_back(steps[i][best_idx].sensor_id);
    }
    return true;
}

}  // namespace

SpectralSplit spectral_split(const Eigen::MatrixXd& a, double tol) {
    const int n = static_cast<int>(a.rows());
    if (n < 1 || a.cols() != n) throw ConfigError("spectral_split: A must be square");
    if (!a.allFinite()) throw ConfigError("spectral_split: non-finite entries");

    Eigen::MatrixXd t = a;  // overwritten with the Schur form
    Eigen::MatrixXd z(n, n);
    std::vector<double> wr(n), wi(n);
    lapack_int sdim = 0;
    g_select_tol = tol;
    const lapack_int info =
        LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', 'S', select_unstable, n, t.data(), n, &sdim,
                      wr.data(), wi.data(), z.data(), n);
    if (info < 0 || (info > 0 && info <= n))
        throw FilterError("spectral_split: Schur decomposition failed");

    SpectralSplit split;
    split.unstable_dim = static_cast<int>(sdim);
    split.unstable_block = t.topLeftCorner(sdim, sdim);
    split.basis = std::move(z);
    split.boundary_warning = info > n;  // reordering disturbed a boundary eigenvalue
    for (int i = 0; i < n; ++i) {
        const double mag = std::hypot(wr[i], wi[i]);
        split.spectral_radius = std::max(split.spectral_radius, mag);
        if (mag >= 1.0 - tol && mag < 1.0 + tol) split.boundary_warning = true;
    }
    return split;
}

Eigen::MatrixXd unstable_output(const SensorModel& sensor, const SpectralSplit& split) {
    return sensor.c() * split.basis.leftCols(split.unstable_dim);
}

Eigen::MatrixXd build_observability(const std::vector<SensorModel>& sensors,
                                    const SpectralSplit& split) {
    const int r = split.unstable_dim;
    if (r < 1) throw UsageError("build_observability: no unstable modes");
    Eigen::Index total_rows = 0;
    for (const auto& s : sensors) total_rows += s.obs_dim();

    Eigen::MatrixXd stacked(total_rows, r);
    Eigen::Index at = 0;
    for (const auto& s : sensors) {
        stacked.middleRows(at, s.obs_dim()) = unstable_output(s, split);
        at += s.obs_dim();
    }

    Eigen::MatrixXd obs(total_rows * r, r);
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(r, r);
    for (int j = 0; j < r; ++j) {
        obs.middleRows(j * total_rows, total_rows) = stacked * power;
        power = power * split.unstable_block;
    }
    return obs;
}

StabilityReport check_feasibility(const std::vector<SensorModel>& sensors,
                                  const SpectralSplit& split, double rank_tol) {
    StabilityReport report;
    report.unstable_dim = split.unstable_dim;
    report.spectral_radius = split.spectral_radius;
    report.boundary_warning = split.boundary_warning;

    const int r = split.unstable_dim;
    if (r == 0) {
        report.feasible = true;
        report.condition2_holds = true;
        return report;
    }
    if (sensors.empty()) return report;

    const Eigen::MatrixXd obs = build_observability(sensors, split);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(obs);
    const double sigma_max = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    int rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > rank_tol * sigma_max) ++rank;
    report.rank_observability = rank;
    const bool condition1 = rank == r;

    // Condition 2: one row per step, jointly independent. Rows of B_j tagged
    // with their owning sensor so the witness doubles as a schedule.
    std::vector<std::vector<TaggedRow>> steps(r);
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(r, r);
    for (int j = 0; j < r; ++j) {
        for (const auto& s : sensors) {
            const Eigen::MatrixXd block = unstable_output(s, split) * power;
            for (Eigen::Index i = 0; i < block.rows(); ++i)
                steps[j].push_back(TaggedRow{s.id(), block.row(i).transpose()});
        }
        power = power * split.unstable_block;
    }

    std::vector<std::vector<std::size_t>> natural(r);
    for (int j = 0; j < r; ++j) {
        natural[j].resize(steps[j].size());
        std::iota(natural[j].begin(), natural[j].end(), 0u);
    }

    std::vector<int> schedule;
    bool found = greedy_transversal(steps, natural, schedule, rank_tol);
    if (!found) {
        const double combinations = static_cast<double>(sensors.size()) * r;
        if (combinations <= 1e4) {
            std::vector<Eigen::VectorXd> basis;
            schedule.clear();
            found = dfs_transversal(steps, 0, basis, schedule, rank_tol);
        } else {
            Rng rng(0x5eedu);
            for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
                auto order = natural;
                for (auto& o : order)
                    for (std::size_t i = o.size(); i > 1; --i)
                        std::swap(o[i - 1], o[rng.uniform_int(0, static_cast<int>(i) - 1)]);
                found = greedy_transversal(steps, order, schedule, rank_tol);
            }
        }
    }

    report.condition2_holds = found;
    if (found) report.witness_schedule = std::move(schedule);
    report.feasible = condition1 && report.condition2_holds;
    return report;
}

std::string describe(const StabilityReport& report) {
    std::ostringstream out;
    out << "spectral radius:        " << report.spectral_radius << "\n";
    out << "unstable dimension (r): " << report.unstable_dim << "\n";
    out << "boundary warning:       " << (report.boundary_warning ? "yes" : "no") << "\n";
    out << "rank of stacked matrix: " << report.rank_observability << "\n";
    out << "condition 1 (rank = r): "
        << (report.rank_observability == report.unstable_dim ? "yes" : "no") << "\n";
    out << "condition 2 (row transversal): " << (report.condition2_holds ? "yes" : "no") << "\n";
    out << "feasible:               " << (report.feasible ? "yes" : "no") << "\n";
    out << "witness schedule:      ";
    if (report.witness_schedule.empty()) {
        out << " (none)";
    } else {
        for (int id : report.witness_schedule) out << ' ' << id;
    }
    out << "\n";
    return out.str();
}

}  // namespace delaykf
