#ifndef WSD_OPERATOR_FACTORY_HPP
#define WSD_OPERATOR_FACTORY_HPP

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <string>

#include "wsd/bigfloat.hpp"
#include "wsd/errors.hpp"
#include "wsd/measurement.hpp"

namespace wsd {

struct PrecisionConfig {
    int significant_decimal_digits = 40;
};

inline void validate(const PrecisionConfig& p) {
    if (p.significant_decimal_digits < 40)
        throw ConfigError("precision: significant_decimal_digits must be at least 40");
}

// Guard digits carried internally above the requested precision. The Gram
// route squares the condition number (~1e25 for the default geometry), so
// meeting the 1e-30 orthonormality contract at a nominal 40 digits requires
// headroom beyond the rounding unit of the stored results.
constexpr int kGuardDigits = 25;

inline int working_digits(const PrecisionConfig& p) {
    return p.significant_decimal_digits + kGuardDigits;
}

// Working-precision projections consumed by the denoiser. forward applies
// diag(s) V^T, inverse applies V diag(1/s); both are composed from the
// rounded factors so that a freshly built bundle and one reloaded from its
// f64 cache produce bit-identical results.
struct DenoiserMaps {
    Eigen::MatrixXd forward;
    Eigen::MatrixXd inverse;
    Eigen::MatrixXd u;
    Eigen::MatrixXd v;
    Eigen::VectorXd singular_values;  // descending
    int m = 0;
    int digits = 0;
};

inline DenoiserMaps compose_maps(const Eigen::MatrixXd& u, const Eigen::VectorXd& s,
                                 const Eigen::MatrixXd& v, const Eigen::MatrixXd& inverse_map,
                                 int digits) {
    DenoiserMaps maps;
    maps.u = u;
    maps.v = v;
    maps.singular_values = s;
    maps.forward = s.asDiagonal() * v.transpose();
    maps.inverse = inverse_map;
    maps.m = static_cast<int>(s.size());
    maps.digits = digits;
    return maps;
}

// Extended-precision factorization of the row-orthonormalization operator
// T = U diag(s) V^T with s descending and inverse_map = V diag(1/s).
struct OperatorBundle {
    BigMatrix t;
    BigMatrix u;
    BigMatrix v;
    BigMatrix inverse_map;
    BigVector singular_values;
    int m = 0;
    int digits = 0;
    DenoiserMaps maps;
};

inline DenoiserMaps emit_working_precision(const OperatorBundle& bundle) {
    return compose_maps(to_double(bundle.u), to_double(bundle.singular_values),
                        to_double(bundle.v), to_double(bundle.inverse_map), bundle.digits);
}

namespace detail {

struct GramEig {
    BigMatrix p;                // eigenvectors, columns match lambda order
    BigVector lambda;           // ascending, strictly positive after checks
    BigVector sigma_ascending;  // sqrt(lambda): singular values of A
};

// Eigendecomposition of A A^T with rank and precision diagnostics.
// The Gram condition number decides how many digits the eigenvalues need;
// when the standard guard is not enough for the orthonormality promise of
// 10^-(digits-10), the decomposition reruns at a raised precision.
inline GramEig eig_gram(const BigMatrix& a_big, const PrecisionConfig& prec) {
    const long m = a_big.rows();
    int digits_now = working_digits(prec);
    for (;;) {
        PrecisionScope scope(digits_now);
        GramEig out;
        BigMatrix g = gram_fused(a_big);
        jacobi_eigh(g, out.lambda, out.p);

        const BigFloat lambda_max = out.lambda(m - 1);
        if (lambda_max <= 0) throw FactorizationError("operator: measurement matrix is zero", 1);

        // Exact rank loss shows up as eigenvalues at the working-precision
        // noise floor; report it in descending singular-value order.
        const BigFloat rank_floor = lambda_max * pow(BigFloat(10), -(digits_now - 8));
        for (long i = 0; i < m; ++i) {
            if (out.lambda(i) <= rank_floor) {
                const int idx_desc = static_cast<int>(m - i);
                std::ostringstream msg;
                msg << "operator: measurement matrix is rank deficient at singular index "
                    << idx_desc << " of " << m;
                throw FactorizationError(msg.str(), idx_desc);
            }
        }

        const BigFloat cond_gram = lambda_max / out.lambda(0);
        const BigFloat budget = pow(BigFloat(10), prec.significant_decimal_digits - 10);
        if (cond_gram > budget) {
            const double need = std::ceil(log10(cond_gram).convert_to<double>()) + 10;
            std::ostringstream msg;
            msg << "operator: A*A^T is numerically singular at "
                << prec.significant_decimal_digits
                << " significant decimal digits; increase significant_decimal_digits to at "
                   "least "
                << static_cast<long>(need);
            throw PrecisionError(msg.str());
        }

        const int required =
            prec.significant_decimal_digits - 10 +
            static_cast<int>(std::ceil(
                log10(cond_gram * static_cast<double>(m)).convert_to<double>())) +
            3;
        if (digits_now < required) {
            digits_now = required;
            continue;
        }

        out.sigma_ascending.resize(m);
        for (long i = 0; i < m; ++i) out.sigma_ascending(i) = sqrt(out.lambda(i));
        return out;
    }
}

// (A A^T)^(-1/2) assembled from the Gram eigendecomposition.
inline BigMatrix assemble_inverse_sqrt(const GramEig& eig) {
    const long m = eig.p.rows();
    BigMatrix scaled = eig.p;
    for (long j = 0; j < m; ++j) scaled.col(j) /= eig.sigma_ascending(j);
    BigMatrix pt = eig.p.transpose();
    return gemm_fused(scaled, pt);
}

}  // namespace detail

// Row orthonormalization of A under the symmetric choice
// A_o = (A A^T)^(-1/2) A, so that A_o A_o^T = I and the row spaces coincide.
inline BigMatrix row_orthonormalize(const MeasurementMatrix& a, const PrecisionConfig& prec) {
    validate(prec);
    PrecisionScope scope(working_digits(prec));
    BigMatrix a_big = to_big(a.entries);
    detail::GramEig eig = detail::eig_gram(a_big, prec);
    BigMatrix t = detail::assemble_inverse_sqrt(eig);
    return gemm_fused(t, a_big);
}

// Operator with T A = A_o, computed as A_o A^T (A A^T)^(-1) through the Gram
// eigendecomposition; the inverse is never formed as a matrix. With the
// symmetric A_o this reduces to (A A^T)^(-1/2).
inline BigMatrix compute_operator(const MeasurementMatrix& a, const BigMatrix& a_o,
                                  const PrecisionConfig& prec) {
    validate(prec);
    if (a_o.cols() != a.entries.cols() || a_o.rows() != a.entries.rows())
        throw ShapeError("compute_operator: A_o shape must match A");
    PrecisionScope scope(working_digits(prec));
    BigMatrix a_big = to_big(a.entries);
    detail::GramEig eig = detail::eig_gram(a_big, prec);

    BigMatrix a_big_t = a_big.transpose();
    BigMatrix b = gemm_fused(a_o, a_big_t);  // A_o A^T
    BigMatrix c = gemm_fused(b, eig.p);
    for (long j = 0; j < c.cols(); ++j) c.col(j) /= eig.lambda(j);
    BigMatrix pt = eig.p.transpose();
    return gemm_fused(c, pt);
}

// Full SVD of the (symmetric positive definite) operator. A second,
// independent Jacobi pass: its spectrum cross-checks the reciprocals of the
// singular values of A obtained from the Gram route.
inline OperatorBundle factor_operator(const BigMatrix& t, const PrecisionConfig& prec) {
    validate(prec);
    const long m = t.rows();
    if (m != t.cols()) throw ShapeError("factor_operator: operator must be square");
    PrecisionScope scope(working_digits(prec));

    {
        BigMatrix skew = t - BigMatrix(t.transpose());
        BigFloat scale = frobenius_norm(t);
        if (scale == 0) throw FactorizationError("factor_operator: zero operator", 1);
        if (frobenius_norm(skew) >
            pow(BigFloat(10), -(prec.significant_decimal_digits - 10)) * scale)
            throw FactorizationError(
                "factor_operator: operator is not symmetric; only the symmetric "
                "orthonormalization is supported");
    }

    BigVector mu;
    BigMatrix w;
    jacobi_eigh(t, mu, w);  // ascending
    for (long i = 0; i < m; ++i) {
        if (mu(i) <= 0) {
            const int idx_desc = static_cast<int>(m - i);
            std::ostringstream msg;
            msg << "factor_operator: operator is singular at singular index " << idx_desc
                << " of " << m;
            throw FactorizationError(msg.str(), idx_desc);
        }
    }

    OperatorBundle bundle;
    bundle.t = t;
    bundle.m = static_cast<int>(m);
    bundle.digits = prec.significant_decimal_digits;
    bundle.singular_values.resize(m);
    bundle.u.resize(m, m);
    for (long i = 0; i < m; ++i) {
        bundle.singular_values(i) = mu(m - 1 - i);  // descending
        bundle.u.col(i) = w.col(m - 1 - i);
    }
    bundle.v = bundle.u;  // symmetric operator: U = V
    bundle.inverse_map = bundle.v;
    for (long j = 0; j < m; ++j) bundle.inverse_map.col(j) /= bundle.singular_values(j);
    bundle.maps = emit_working_precision(bundle);
    return bundle;
}

// One-pass build for a measurement matrix: Gram eigendecomposition, the
// symmetric operator, its row-orthonormalized A_o, and the factored bundle.
struct OperatorFactorization {
    BigMatrix a_o;
    OperatorBundle bundle;
    BigVector sigma_a_ascending;  // singular values of A; pairs with
                                  // bundle.singular_values by index:
                                  // s_desc[i] * sigma_asc[i] = 1
};

inline OperatorFactorization factor_measurement(const MeasurementMatrix& a,
                                                const PrecisionConfig& prec) {
    validate(prec);
    PrecisionScope scope(working_digits(prec));
    BigMatrix a_big = to_big(a.entries);
    detail::GramEig eig = detail::eig_gram(a_big, prec);

    OperatorFactorization out;
    out.sigma_a_ascending = eig.sigma_ascending;
    BigMatrix t = detail::assemble_inverse_sqrt(eig);
    out.a_o = gemm_fused(t, a_big);
    out.bundle = factor_operator(t, prec);
    return out;
}

}  // namespace wsd

#endif
