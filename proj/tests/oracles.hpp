// Test-only oracles, deliberately independent of the library's computation
// paths: quadrature instead of erf, Gaussian elimination instead of the
// factorization route, support enumeration instead of the first-order solver.
#ifndef WSD_TESTS_ORACLES_HPP
#define WSD_TESTS_ORACLES_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "wsd/bigfloat.hpp"

namespace oracle {

// Composite-Simpson mass of N(mu, sigma^2) over [lo, hi].
inline double gaussian_mass_quadrature(double lo, double hi, double mu, double sigma,
                                       int intervals = 400) {
    auto density = [&](double x) {
        const double z = (x - mu) / sigma;
        return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
    };
    if (intervals % 2 != 0) ++intervals;
    const double h = (hi - lo) / intervals;
    double sum = density(lo) + density(hi);
    for (int i = 1; i < intervals; ++i) sum += density(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

// One measurement-matrix column by quadrature: pixel (pr, pc) mass for a
// molecule at grid cell (gr, gc). Mirrors the imaging model, not the code.
inline Eigen::VectorXd psf_column_quadrature(int raw_rows, int raw_cols, int upsample,
                                             int offset_rows, int offset_cols, double sigma,
                                             int gr, int gc) {
    Eigen::VectorXd col(raw_rows * raw_cols);
    for (int pc = 0; pc < raw_cols; ++pc)
        for (int pr = 0; pr < raw_rows; ++pr) {
            const double rlo = offset_rows + static_cast<double>(pr) * upsample;
            const double clo = offset_cols + static_cast<double>(pc) * upsample;
            const double mr = gaussian_mass_quadrature(rlo, rlo + upsample, gr + 0.5, sigma);
            const double mc = gaussian_mass_quadrature(clo, clo + upsample, gc + 0.5, sigma);
            col(pc * raw_rows + pr) = mr * mc;
        }
    return col;
}

// Extended-precision linear solve A X = B by Gaussian elimination with
// partial pivoting.
inline wsd::BigMatrix big_solve(wsd::BigMatrix a, wsd::BigMatrix b) {
    const long n = a.rows();
    for (long k = 0; k < n; ++k) {
        long pivot = k;
        for (long i = k + 1; i < n; ++i)
            if (abs(a(i, k)) > abs(a(pivot, k))) pivot = i;
        if (pivot != k) {
            a.row(k).swap(a.row(pivot));
            b.row(k).swap(b.row(pivot));
        }
        for (long i = k + 1; i < n; ++i) {
            wsd::BigFloat f = a(i, k) / a(k, k);
            for (long j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            for (long j = 0; j < b.cols(); ++j) b(i, j) -= f * b(k, j);
        }
    }
    wsd::BigMatrix x = b;
    for (long i = n - 1; i >= 0; --i) {
        for (long j = i + 1; j < n; ++j) x.row(i) -= a(i, j) * x.row(j);
        x.row(i) /= a(i, i);
    }
    return x;
}

// Exhaustive support-enumeration solution of
//   min w^T x  s.t.  ||Phi x - y|| <= r,  x >= 0
// for tiny instances. For each support the active-ball KKT system has the
// closed form x(mu) = (P^T P)^{-1} (P^T y - w_S / (2 mu)) whose residual is
// resid_LS^2 + ||P (P^T P)^{-1} w_S||^2 / (4 mu^2), so mu solves in closed
// form too. Returns the best KKT-consistent objective.
inline double weighted_l1_ball_oracle(const Eigen::MatrixXd& phi, const Eigen::VectorXd& w,
                                      const Eigen::VectorXd& y, double r) {
    const long n = phi.cols();
    double best = std::numeric_limits<double>::infinity();

    // zero-cost candidates: supports inside {j : w_j = 0}
    {
        std::vector<long> zero_cols;
        for (long j = 0; j < n; ++j)
            if (w(j) == 0) zero_cols.push_back(j);
        for (unsigned long mask = 0; mask < (1UL << zero_cols.size()); ++mask) {
            Eigen::MatrixXd p(phi.rows(), __builtin_popcountl(mask));
            long c = 0;
            for (size_t b = 0; b < zero_cols.size(); ++b)
                if (mask & (1UL << b)) p.col(c++) = phi.col(zero_cols[b]);
            Eigen::VectorXd xs;
            if (c == 0) {
                if (y.norm() <= r + 1e-9) best = std::min(best, 0.0);
                continue;
            }
            xs = (p.transpose() * p).ldlt().solve(p.transpose() * y);
            if ((xs.array() >= -1e-9).all() && (p * xs - y).norm() <= r + 1e-9)
                best = std::min(best, 0.0);
        }
    }

    for (unsigned long mask = 1; mask < (1UL << n); ++mask) {
        const int k = __builtin_popcountl(mask);
        Eigen::MatrixXd p(phi.rows(), k);
        Eigen::VectorXd ws(k);
        std::vector<long> cols;
        long c = 0;
        for (long j = 0; j < n; ++j)
            if (mask & (1UL << j)) {
                p.col(c) = phi.col(j);
                ws(c) = w(j);
                cols.push_back(j);
                ++c;
            }
        Eigen::MatrixXd gram = p.transpose() * p;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
        if (ldlt.info() != Eigen::Success) continue;
        // reject near-singular supports: another support covers them
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram);
        if (svd.singularValues()(k - 1) < 1e-10 * svd.singularValues()(0)) continue;

        const Eigen::VectorXd x_ls = ldlt.solve(p.transpose() * y);
        const double resid_ls = (p * x_ls - y).norm();
        if (resid_ls > r + 1e-12) continue;  // ball unreachable on this support

        const Eigen::VectorXd h = ldlt.solve(ws);
        const double push = (p * h).norm();
        if (push < 1e-14) continue;  // objective gradient invisible on this support
        const double slack = std::sqrt(std::max(0.0, r * r - resid_ls * resid_ls));
        if (slack < 1e-14) continue;
        const double mu = push / (2.0 * slack);

        const Eigen::VectorXd xs = x_ls - h / (2.0 * mu);
        if (!(xs.array() >= -1e-8).all()) continue;
        const Eigen::VectorXd resid = p * xs - y;
        // dual feasibility off the support
        bool dual_ok = true;
        for (long j = 0; j < n && dual_ok; ++j) {
            if (mask & (1UL << j)) continue;
            if (w(j) + 2.0 * mu * phi.col(j).dot(resid) < -1e-7 * (1.0 + w(j))) dual_ok = false;
        }
        if (!dual_ok) continue;
        double obj = 0;
        for (int i = 0; i < k; ++i) obj += ws(i) * std::max(0.0, xs(i));
        best = std::min(best, obj);
    }
    return best;
}

// Best single-column-plus-background fit: scan every column, solve the
// 2-variable nonnegative least squares in closed form.
inline int best_single_column_fit(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
    int best_col = -1;
    double best_res = std::numeric_limits<double>::infinity();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(y.size());
    for (long j = 0; j < a.cols(); ++j) {
        Eigen::Matrix2d g;
        const Eigen::VectorXd col = a.col(j);
        g << col.squaredNorm(), col.sum(), col.sum(), static_cast<double>(y.size());
        Eigen::Vector2d rhs(col.dot(y), y.sum());
        Eigen::Vector2d sol = g.ldlt().solve(rhs);
        sol = sol.cwiseMax(0.0);
        const double res = (sol(0) * col + sol(1) * ones - y).norm();
        if (res < best_res) {
            best_res = res;
            best_col = static_cast<int>(j);
        }
    }
    return best_col;
}

}  // namespace oracle

#endif
