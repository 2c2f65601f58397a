#ifndef WSD_BIGFLOAT_HPP
#define WSD_BIGFLOAT_HPP

#include <mpfr.h>

#include <Eigen/Core>
#include <algorithm>
#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/mpfr.hpp>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "wsd/errors.hpp"

namespace wsd {

// Arbitrary-precision real. Precision is per-value; new values pick up the
// thread's current default, so extended computations run inside a
// PrecisionScope. Expression templates are off: Eigen and the raw-mpfr
// kernels below want plain values.
using BigFloat =
    boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                  boost::multiprecision::et_off>;

using BigMatrix = Eigen::Matrix<BigFloat, Eigen::Dynamic, Eigen::Dynamic>;
using BigVector = Eigen::Matrix<BigFloat, Eigen::Dynamic, 1>;

class PrecisionScope {
  public:
    explicit PrecisionScope(unsigned decimal_digits)
        : previous_(BigFloat::default_precision()) {
        BigFloat::default_precision(decimal_digits);
    }
    ~PrecisionScope() { BigFloat::default_precision(previous_); }
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

  private:
    unsigned previous_;
};

inline BigMatrix to_big(const Eigen::MatrixXd& a) {
    BigMatrix out(a.rows(), a.cols());
    for (long j = 0; j < a.cols(); ++j)
        for (long i = 0; i < a.rows(); ++i) out(i, j) = a(i, j);
    return out;
}

inline Eigen::MatrixXd to_double(const BigMatrix& a) {
    Eigen::MatrixXd out(a.rows(), a.cols());
    for (long j = 0; j < a.cols(); ++j)
        for (long i = 0; i < a.rows(); ++i) out(i, j) = a(i, j).convert_to<double>();
    return out;
}

inline Eigen::VectorXd to_double(const BigVector& v) {
    Eigen::VectorXd out(v.size());
    for (long i = 0; i < v.size(); ++i) out(i) = v(i).convert_to<double>();
    return out;
}

namespace bigdetail {
inline mpfr_ptr raw(BigFloat& x) { return x.backend().data(); }
inline mpfr_srcptr raw(const BigFloat& x) { return x.backend().data(); }
}  // namespace bigdetail

// C = A * B with one fused multiply-add per inner step, no temporaries.
inline BigMatrix gemm_fused(const BigMatrix& a, const BigMatrix& b) {
    if (a.cols() != b.rows()) throw ShapeError("gemm_fused: inner dimensions differ");
    const long m = a.rows(), k = a.cols(), n = b.cols();
    BigMatrix c(m, n);
    BigFloat acc;
    for (long j = 0; j < n; ++j)
        for (long i = 0; i < m; ++i) {
            acc = 0;
            for (long l = 0; l < k; ++l)
                mpfr_fma(bigdetail::raw(acc), bigdetail::raw(a(i, l)),
                         bigdetail::raw(b(l, j)), bigdetail::raw(acc), MPFR_RNDN);
            c(i, j) = acc;
        }
    return c;
}

// G = A * A^T, computed on the upper triangle and mirrored.
inline BigMatrix gram_fused(const BigMatrix& a) {
    const long m = a.rows(), k = a.cols();
    BigMatrix g(m, m);
    BigFloat acc;
    for (long i = 0; i < m; ++i)
        for (long j = i; j < m; ++j) {
            acc = 0;
            for (long l = 0; l < k; ++l)
                mpfr_fma(bigdetail::raw(acc), bigdetail::raw(a(i, l)),
                         bigdetail::raw(a(j, l)), bigdetail::raw(acc), MPFR_RNDN);
            g(i, j) = acc;
            if (j != i) g(j, i) = acc;
        }
    return g;
}

inline BigFloat frobenius_norm(const BigMatrix& a) {
    BigFloat acc = 0;
    for (long j = 0; j < a.cols(); ++j)
        for (long i = 0; i < a.rows(); ++i)
            mpfr_fma(bigdetail::raw(acc), bigdetail::raw(a(i, j)), bigdetail::raw(a(i, j)),
                     bigdetail::raw(acc), MPFR_RNDN);
    return sqrt(acc);
}

inline BigFloat max_abs(const BigMatrix& a) {
    BigFloat best = 0;
    for (long j = 0; j < a.cols(); ++j)
        for (long i = 0; i < a.rows(); ++i) {
            BigFloat v = abs(a(i, j));
            if (v > best) best = v;
        }
    return best;
}

// Cyclic two-sided Jacobi eigendecomposition of a symmetric matrix.
// Returns eigenvalues ascending with matching eigenvector columns.
// Small eigenvalues of positive definite inputs come out with high relative
// accuracy, which is what the ill-conditioned Gram matrices here need.
inline void jacobi_eigh(const BigMatrix& input, BigVector& eigenvalues, BigMatrix& eigenvectors,
                        int max_sweeps = 60) {
    const long n = input.rows();
    if (n != input.cols()) throw ShapeError("jacobi_eigh: matrix must be square");

    // Pin the working copy to the scope's precision; the input may carry a
    // different per-value precision.
    BigMatrix a = BigMatrix::Zero(n, n);
    for (long j = 0; j < n; ++j)
        for (long i = 0; i < n; ++i)
            mpfr_set(bigdetail::raw(a(i, j)), bigdetail::raw(input(i, j)), MPFR_RNDN);

    BigMatrix v = BigMatrix::Zero(n, n);
    for (long i = 0; i < n; ++i) v(i, i) = 1;

    const unsigned digits = BigFloat::default_precision();
    const BigFloat stop_scale = pow(BigFloat(10), -static_cast<int>(digits) + 8);

    BigFloat norm = frobenius_norm(a);
    if (norm == 0) {
        eigenvalues = BigVector::Zero(n);
        eigenvectors = v;
        return;
    }
    const BigFloat stop = stop_scale * norm;

    // rotation scratch
    BigFloat theta, t, c, s, apq, tmp1, tmp2, nkp, nkq;
    const mpfr_rnd_t rnd = MPFR_RNDN;

    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        BigFloat off = 0;
        for (long q = 0; q < n; ++q)
            for (long p = 0; p < q; ++p)
                mpfr_fma(bigdetail::raw(off), bigdetail::raw(a(p, q)), bigdetail::raw(a(p, q)),
                         bigdetail::raw(off), rnd);
        if (sqrt(off) <= stop) {
            converged = true;
            break;
        }
        for (long p = 0; p < n - 1; ++p)
            for (long q = p + 1; q < n; ++q) {
                apq = a(p, q);
                if (abs(apq) <= stop_scale * sqrt(abs(a(p, p) * a(q, q)) + apq * apq)) continue;
                theta = (a(q, q) - a(p, p)) / (2 * apq);
                t = 1 / (abs(theta) + sqrt(theta * theta + 1));
                if (theta < 0) t = -t;
                c = 1 / sqrt(t * t + 1);
                s = t * c;
                // columns p,q of A and V: x' = c*x - s*y, y' = s*x + c*y
                for (long k = 0; k < n; ++k) {
                    mpfr_mul(bigdetail::raw(tmp1), bigdetail::raw(c), bigdetail::raw(a(k, p)), rnd);
                    mpfr_mul(bigdetail::raw(tmp2), bigdetail::raw(s), bigdetail::raw(a(k, q)), rnd);
                    mpfr_sub(bigdetail::raw(nkp), bigdetail::raw(tmp1), bigdetail::raw(tmp2), rnd);
                    mpfr_mul(bigdetail::raw(tmp1), bigdetail::raw(s), bigdetail::raw(a(k, p)), rnd);
                    mpfr_mul(bigdetail::raw(tmp2), bigdetail::raw(c), bigdetail::raw(a(k, q)), rnd);
                    mpfr_add(bigdetail::raw(nkq), bigdetail::raw(tmp1), bigdetail::raw(tmp2), rnd);
                    mpfr_set(bigdetail::raw(a(k, p)), bigdetail::raw(nkp), rnd);
                    mpfr_set(bigdetail::raw(a(k, q)), bigdetail::raw(nkq), rnd);
                }
                // rows p,q of A
                for (long k = 0; k < n; ++k) {
                    mpfr_mul(bigdetail::raw(tmp1), bigdetail::raw(c), bigdetail::raw(a(p, k)), rnd);
                    mpfr_mul(bigdetail::raw(tmp2), bigdetail::raw(s), bigdetail::raw(a(q, k)), rnd);
                    mpfr_sub(bigdetail::raw(nkp), bigdetail::raw(tmp1), bigdetail::raw(tmp2), rnd);
                    mpfr_mul(bigdetail::raw(tmp1), bigdetail::raw(s), bigdetail::raw(a(p, k)), rnd);
                    mpfr_mul(bigdetail::raw(tmp2), bigdetail::raw(c), bigdetail::raw(a(q, k)), rnd);
                    mpfr_add(bigdetail::raw(nkq), bigdetail::raw(tmp1), bigdetail::raw(tmp2), rnd);
                    mpfr_set(bigdetail::raw(a(p, k)), bigdetail::raw(nkp), rnd);
                    mpfr_set(bigdetail::raw(a(q, k)), bigdetail::raw(nkq), rnd);
                }
                for (long k = 0; k < n; ++k) {
                    mpfr_mul(bigdetail::raw(tmp1), bigdetail::raw(c), bigdetail::raw(v(k, p)), rnd);
                    mpfr_mul(bigdetail::raw(tmp2), bigdetail::raw(s), bigdetail::raw(v(k, q)), rnd);
                    mpfr_sub(bigdetail::raw(nkp), bigdetail::raw(tmp1), bigdetail::raw(tmp2), rnd);
                    mpfr_mul(bigdetail::raw(tmp1), bigdetail::raw(s), bigdetail::raw(v(k, p)), rnd);
                    mpfr_mul(bigdetail::raw(tmp2), bigdetail::raw(c), bigdetail::raw(v(k, q)), rnd);
                    mpfr_add(bigdetail::raw(nkq), bigdetail::raw(tmp1), bigdetail::raw(tmp2), rnd);
                    mpfr_set(bigdetail::raw(v(k, p)), bigdetail::raw(nkp), rnd);
                    mpfr_set(bigdetail::raw(v(k, q)), bigdetail::raw(nkq), rnd);
                }
            }
    }
    if (!converged) {
        // final check: the last sweep may have finished the job
        BigFloat off = 0;
        for (long q = 0; q < n; ++q)
            for (long p = 0; p < q; ++p)
                mpfr_fma(bigdetail::raw(off), bigdetail::raw(a(p, q)), bigdetail::raw(a(p, q)),
                         bigdetail::raw(off), rnd);
        if (sqrt(off) > stop)
            throw FactorizationError("jacobi_eigh: did not converge within the sweep limit");
    }

    std::vector<long> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&a](long l, long r) { return a(l, l) < a(r, r); });

    eigenvalues.resize(n);
    eigenvectors.resize(n, n);
    for (long i = 0; i < n; ++i) {
        eigenvalues(i) = a(order[i], order[i]);
        eigenvectors.col(i) = v.col(order[i]);
    }
}

}  // namespace wsd

#endif
