#ifndef WSD_CS_SOLVER_HPP
#define WSD_CS_SOLVER_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "wsd/errors.hpp"
#include "wsd/measurement.hpp"

namespace wsd {

struct SolverSettings {
    double epsilon = 2.1;        // data-fidelity radius factor
    double gap_tol = 1e-6;       // relative duality gap for status optimal
    long max_iterations = 50000;
    long check_every = 50;
    double feas_rel = 1e-6;      // feasibility slack relative to the radius
};

inline void validate(const SolverSettings& s) {
    if (s.epsilon <= 0) throw ConfigError("solver: epsilon must be positive");
    if (s.gap_tol <= 0 || s.max_iterations < 1 || s.check_every < 1)
        throw ConfigError("solver: invalid stopping settings");
}

enum class SolveStatus { optimal, infeasible, max_iterations, numerical_failure };

inline std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::max_iterations: return "max_iterations";
        case SolveStatus::numerical_failure: return "numerical_failure";
    }
    return "unknown";
}

// min w^T x  s.t.  ||Phi x - y||_2 <= epsilon sqrt(sum_j max(y_j, 0)),  x >= 0.
// Under x >= 0 and w >= 0 the objective equals the weighted l1 norm.
// Negative measurement entries (possible after denoising) are floored at 0
// inside the radius sum only; y itself is used as given.
struct CsProblem {
    const AugmentedMatrix* phi = nullptr;
    Eigen::VectorXd y;
    SolverSettings settings{};
};

struct CsSolution {
    Eigen::VectorXd x;            // length N+1, nonnegative for optimal solves
    double objective = 0.0;       // w^T x, recomputed on exit
    double feasibility_residual = 0.0;  // ||Phi x - y||_2, recomputed on exit
    SolveStatus status = SolveStatus::numerical_failure;
    long iterations = 0;
    double radius = 0.0;
};

namespace solver_detail {

inline bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

// Largest eigenvalue of Phi diag(tau) Phi^T by power iteration. A slightly
// inflated estimate keeps the step product safely below 1.
inline double preconditioned_norm(const Eigen::MatrixXd& phi, const Eigen::VectorXd& tau) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(phi.rows());
    for (long i = 0; i < v.size(); ++i) v(i) += 1e-3 * static_cast<double>(i % 7);
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < 60; ++it) {
        Eigen::VectorXd bv = phi * (tau.asDiagonal() * (phi.transpose() * v));
        lambda = v.dot(bv);
        const double norm = bv.norm();
        if (norm == 0) return 0.0;
        v = bv / norm;
    }
    return lambda;
}

// Nonnegative least-squares probe: can ||Phi x - y|| reach the radius at
// all? FISTA on 1/2 ||Phi x - y||^2 over the nonnegative orthant.
inline double min_residual_probe(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y,
                                 Eigen::VectorXd x, long iterations) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(phi.cols());
    for (long i = 0; i < v.size(); ++i) v(i) += 1e-3 * static_cast<double>(i % 5);
    v.normalize();
    double lip = 1.0;
    for (int it = 0; it < 60; ++it) {
        Eigen::VectorXd bv = phi.transpose() * (phi * v);
        lip = v.dot(bv);
        const double norm = bv.norm();
        if (norm == 0) break;
        v = bv / norm;
    }
    const double step = lip > 0 ? 1.0 / (1.05 * lip) : 1.0;

    Eigen::VectorXd z = x;
    double t = 1.0;
    double best = (phi * x - y).norm();
    for (long k = 0; k < iterations; ++k) {
        Eigen::VectorXd grad = phi.transpose() * (phi * z - y);
        Eigen::VectorXd x_next = (z - step * grad).cwiseMax(0.0);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        z = x_next + ((t - 1.0) / t_next) * (x_next - x);
        x = x_next;
        t = t_next;
        if (!finite(x)) break;
        best = std::min(best, (phi * x - y).norm());
    }
    return best;
}

}  // namespace solver_detail

inline CsSolution solve_cs(const CsProblem& problem) {
    if (problem.phi == nullptr) throw ConfigError("solve_cs: missing measurement matrix");
    validate(problem.settings);
    const Eigen::MatrixXd& phi = problem.phi->entries;
    const Eigen::VectorXd& w = problem.phi->column_weights;
    const Eigen::VectorXd& y = problem.y;
    const long m = phi.rows();
    const long n = phi.cols();
    if (y.size() != m) throw ShapeError("solve_cs: measurement length does not match Phi");
    if (w.size() != n) throw ShapeError("solve_cs: weight length does not match Phi");
    if (std::abs(w(n - 1)) != 0.0)
        throw ConfigError("solve_cs: background weight must be exactly 0");
    if (!y.allFinite()) throw DomainError("solve_cs: measurement vector must be finite");

    const SolverSettings& cfg = problem.settings;
    const double radius = cfg.epsilon * std::sqrt(y.cwiseMax(0.0).sum());

    // Diagonal primal preconditioner tau_j = 1/colsum and a scalar dual step;
    // sigma * lambda_max(Phi diag(tau) Phi^T) < 1 guarantees convergence of
    // the primal-dual iteration.
    Eigen::VectorXd colsum = phi.array().abs().colwise().sum();
    Eigen::VectorXd tau(n);
    for (long j = 0; j < n; ++j) tau(j) = 1.0 / std::max(colsum(j), 1e-10);
    const double rowsum_max = phi.array().abs().rowwise().sum().maxCoeff();
    const double lambda = solver_detail::preconditioned_norm(phi, tau);
    double sigma = rowsum_max > 0 ? 1.0 / rowsum_max : 1.0;  // guaranteed valid
    if (lambda > 0) sigma = std::max(sigma, 0.93 / (1.05 * lambda));

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd x_bar = x;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd x_snapshot = x;
    long snapshot_iter = 0;

    CsSolution sol;
    sol.radius = radius;
    SolveStatus status = SolveStatus::max_iterations;
    long iterations = cfg.max_iterations;

    const double feas_slack = radius * cfg.feas_rel + 1e-9 * (1.0 + y.norm());

    for (long k = 0; k < cfg.max_iterations; ++k) {
        // dual: project the shifted point onto the polar of the radius ball
        Eigen::VectorXd up = u + sigma * (phi * x_bar) - sigma * y;
        const double up_norm = up.norm();
        if (up_norm > 0) {
            const double shrink = std::max(0.0, 1.0 - sigma * radius / up_norm);
            u = up * shrink;
        } else {
            u.setZero();
        }
        // primal: weighted l1 prox restricted to the nonnegative orthant
        Eigen::VectorXd x_prev = x;
        x = (x - tau.asDiagonal() * (phi.transpose() * u + w)).cwiseMax(0.0);
        x_bar = 2.0 * x - x_prev;

        if ((k + 1) % cfg.check_every == 0 || k + 1 == cfg.max_iterations) {
            if (!solver_detail::finite(x) || !solver_detail::finite(u)) {
                status = SolveStatus::numerical_failure;
                iterations = k + 1;
                x = x_snapshot;
                break;
            }
            const double res = (phi * x - y).norm();
            const double obj = w.dot(x);

            // dual candidate: shift u so the zero-weight background column is
            // dual-feasible, then scale into the cone w + Phi^T u >= 0
            Eigen::VectorXd v = phi.transpose() * u;
            const double bg = v(n - 1);
            Eigen::VectorXd u_shift = u;
            if (bg < 0) {
                u_shift.array() -= bg / static_cast<double>(m);
                v -= (bg / static_cast<double>(m)) * colsum;
            }
            double alpha = 1.0;
            for (long j = 0; j < n; ++j)
                if (v(j) < 0) {
                    if (w(j) <= 0)
                        alpha = 0.0;
                    else
                        alpha = std::min(alpha, w(j) / (-v(j)));
                }
            const double dual = alpha * (-y.dot(u_shift)) - alpha * radius * u_shift.norm();
            const double gap = (obj - dual) / std::max({1.0, std::abs(obj), std::abs(dual)});

            x_snapshot = x;
            snapshot_iter = k + 1;
            if (res <= radius + feas_slack && gap <= cfg.gap_tol) {
                status = SolveStatus::optimal;
                iterations = k + 1;
                break;
            }
        }
    }

    if (status == SolveStatus::max_iterations) {
        x = x_snapshot;
        iterations = snapshot_iter > 0 ? cfg.max_iterations : 0;
        const double res = (phi * x - y).norm();
        if (res > radius + feas_slack) {
            // the ball was never reached; certify with a bounded
            // nonnegative-least-squares probe before calling it infeasible
            const double reachable =
                solver_detail::min_residual_probe(phi, y, x, std::min<long>(10000, cfg.max_iterations));
            if (reachable > 1.05 * radius + feas_slack) status = SolveStatus::infeasible;
        }
        iterations = cfg.max_iterations;
    }

    if (!solver_detail::finite(x)) x = Eigen::VectorXd::Zero(n);  // never leak non-finite values
    sol.x = x;
    sol.objective = w.dot(x);
    sol.feasibility_residual = (phi * x - y).norm();
    sol.status = status;
    sol.iterations = iterations;
    return sol;
}

// Elementwise sum of the molecule parts of the successful per-frame
// reconstructions (background elements dropped), reshaped to the grid.
inline Eigen::MatrixXd merge_reconstructions(const std::vector<CsSolution>& solutions,
                                             int grid_rows, int grid_cols,
                                             int* skipped_count = nullptr) {
    if (solutions.empty()) throw DomainError("merge_reconstructions: no solutions to merge");
    const long n = static_cast<long>(grid_rows) * grid_cols;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
    int skipped = 0;
    for (const CsSolution& s : solutions) {
        if (s.status != SolveStatus::optimal) {
            ++skipped;
            continue;
        }
        if (s.x.size() != n + 1)
            throw ShapeError("merge_reconstructions: solution length does not match the grid");
        sum += s.x.head(n);
    }
    if (skipped_count) *skipped_count = skipped;
    return unvectorize(sum, grid_rows, grid_cols);
}

// log(1 + v) per pixel after clamping negatives; monotone and
// order-preserving, keeps relative scale readable.
inline Eigen::MatrixXd log_visualize(const Eigen::MatrixXd& image) {
    return image.cwiseMax(0.0).array().log1p();
}

}  // namespace wsd

#endif
