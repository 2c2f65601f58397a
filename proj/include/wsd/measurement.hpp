#ifndef WSD_MEASUREMENT_HPP
#define WSD_MEASUREMENT_HPP

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "wsd/errors.hpp"
#include "wsd/geometry.hpp"

namespace wsd {

// Vectorization is column-major toolkit-wide: frame (i,j) <-> vector j*rows+i,
// grid point (r,c) <-> column c*grid_rows+r.
inline Eigen::VectorXd vectorize(const Eigen::MatrixXd& frame) {
    return Eigen::Map<const Eigen::VectorXd>(frame.data(), frame.size());
}

inline Eigen::MatrixXd unvectorize(const Eigen::VectorXd& v, int rows, int cols) {
    if (v.size() != static_cast<long>(rows) * cols)
        throw ShapeError("unvectorize: vector length does not match the frame shape");
    return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

// PSF projection matrix A. Column i holds the raw frame produced by a
// unit-flux molecule at grid index i; entries are Gaussian mass integrated
// over each pixel footprint, so photon counts scale columns linearly.
struct MeasurementMatrix {
    Eigen::MatrixXd entries;         // pixel_count x grid_count
    Eigen::VectorXd column_weights;  // c, column sums
    ImagingGeometry geometry;
    bool binned = false;
};

// A with a trailing all-ones column absorbing uniform background; the
// background's weight is exactly 0.
struct AugmentedMatrix {
    Eigen::MatrixXd entries;         // pixel_count x (grid_count + 1)
    Eigen::VectorXd column_weights;  // length grid_count + 1, last entry 0
};

namespace detail {

// Mass of a unit Gaussian N(mu, sigma) over [lo, hi]; erfc keeps the far
// tails at full relative accuracy.
inline double gaussian_interval_mass(double lo, double hi, double mu, double sigma) {
    const double inv = 1.0 / (sigma * std::sqrt(2.0));
    const double zl = (lo - mu) * inv;
    const double zh = (hi - mu) * inv;
    return 0.5 * (std::erfc(zl) - std::erfc(zh));
}

// 1-D pixel-integrated PSF factor: out(p, g) = mass a molecule at grid cell g
// deposits in pixel p along one axis. Units are grid cells.
inline Eigen::MatrixXd axis_psf_factor(int pixels, int grid_cells, int upsample, int offset,
                                       double sigma) {
    Eigen::MatrixXd f(pixels, grid_cells);
    for (int g = 0; g < grid_cells; ++g) {
        const double mu = g + 0.5;  // molecule sits at the grid-cell center
        for (int p = 0; p < pixels; ++p) {
            const double lo = offset + static_cast<double>(p) * upsample;
            f(p, g) = gaussian_interval_mass(lo, lo + upsample, mu, sigma);
        }
    }
    return f;
}

}  // namespace detail

inline Eigen::VectorXd compute_column_weights(const Eigen::MatrixXd& entries) {
    return entries.colwise().sum();
}

inline MeasurementMatrix build_measurement_matrix(const ImagingGeometry& geometry) {
    validate(geometry);
    const Eigen::MatrixXd fr = detail::axis_psf_factor(
        geometry.raw_rows, geometry.grid_rows, geometry.upsample_factor,
        geometry.frame_offset_rows(), geometry.psf_sigma_grids);
    const Eigen::MatrixXd fc = detail::axis_psf_factor(
        geometry.raw_cols, geometry.grid_cols, geometry.upsample_factor,
        geometry.frame_offset_cols(), geometry.psf_sigma_grids);

    const int m = geometry.pixel_count();
    const int n = geometry.grid_count();
    MeasurementMatrix a;
    a.entries.resize(m, n);
    a.geometry = geometry;
    // The 2-D PSF separates, so each column is the outer product of the two
    // axis factors, laid out column-major.
    for (int gc = 0; gc < geometry.grid_cols; ++gc)
        for (int gr = 0; gr < geometry.grid_rows; ++gr) {
            const int col = gc * geometry.grid_rows + gr;
            for (int pc = 0; pc < geometry.raw_cols; ++pc)
                for (int pr = 0; pr < geometry.raw_rows; ++pr)
                    a.entries(pc * geometry.raw_rows + pr, col) = fr(pr, gr) * fc(pc, gc);
        }
    a.column_weights = compute_column_weights(a.entries);
    return a;
}

inline AugmentedMatrix augment_background(const MeasurementMatrix& a) {
    AugmentedMatrix phi;
    const int m = static_cast<int>(a.entries.rows());
    const int n = static_cast<int>(a.entries.cols());
    phi.entries.resize(m, n + 1);
    phi.entries.leftCols(n) = a.entries;
    phi.entries.col(n).setOnes();
    phi.column_weights.resize(n + 1);
    phi.column_weights.head(n) = a.column_weights;
    phi.column_weights(n) = 0.0;
    return phi;
}

// Sum factor x factor blocks; total photon count is preserved exactly.
inline Eigen::MatrixXd bin_frame(const Eigen::MatrixXd& frame, int factor) {
    if (factor < 1 || frame.rows() % factor != 0 || frame.cols() % factor != 0)
        throw ShapeError("bin_frame: factor must divide both frame dimensions");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(frame.rows() / factor, frame.cols() / factor);
    for (long j = 0; j < frame.cols(); ++j)
        for (long i = 0; i < frame.rows(); ++i) out(i / factor, j / factor) += frame(i, j);
    return out;
}

// Binned measurement matrix: every column image binned, equivalently rows of
// A summed in bin_factor^2 groups. Column weights are unchanged.
inline MeasurementMatrix bin_matrix(const MeasurementMatrix& a) {
    const ImagingGeometry& g = a.geometry;
    const int b = g.bin_factor;
    if (b < 1 || g.raw_rows % b != 0 || g.raw_cols % b != 0)
        throw ShapeError("bin_matrix: bin_factor must divide the raw dimensions");

    MeasurementMatrix out;
    out.geometry = g;
    out.geometry.raw_rows = g.raw_rows / b;
    out.geometry.raw_cols = g.raw_cols / b;
    out.geometry.upsample_factor = g.upsample_factor * b;
    out.geometry.pixel_size_nm = g.pixel_size_nm * b;
    out.geometry.bin_factor = 1;
    out.binned = true;

    const int n = static_cast<int>(a.entries.cols());
    out.entries = Eigen::MatrixXd::Zero(out.geometry.pixel_count(), n);
    for (int pc = 0; pc < g.raw_cols; ++pc)
        for (int pr = 0; pr < g.raw_rows; ++pr) {
            const int src = pc * g.raw_rows + pr;
            const int dst = (pc / b) * out.geometry.raw_rows + (pr / b);
            out.entries.row(dst) += a.entries.row(src);
        }
    out.column_weights = compute_column_weights(out.entries);
    return out;
}

}  // namespace wsd

#endif
