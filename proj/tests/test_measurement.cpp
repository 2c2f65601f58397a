#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "wsd/measurement.hpp"

using namespace wsd;

namespace {

ImagingGeometry small_geometry() {
    ImagingGeometry g;
    g.pixel_size_nm = 20.0;
    g.grid_size_nm = 10.0;
    g.upsample_factor = 2;
    g.raw_rows = g.raw_cols = 6;
    g.grid_rows = g.grid_cols = 16;
    g.psf_sigma_grids = 3.0;
    g.bin_factor = 2;
    return g;
}

}  // namespace

TEST_CASE("default geometry produces the 196x4096 measurement matrix") {
    MeasurementMatrix a = build_measurement_matrix(ImagingGeometry{});
    REQUIRE(a.entries.rows() == 196);
    REQUIRE(a.entries.cols() == 4096);
    REQUIRE(a.column_weights.size() == 4096);
    REQUIRE((a.entries.array() >= 0).all());
    REQUIRE((a.column_weights.array() > 0).all());
    // every column carries at most one unit of flux
    REQUIRE(a.column_weights.maxCoeff() <= 1.0 + 1e-12);
}

TEST_CASE("columns match the quadrature oracle") {
    const ImagingGeometry g = small_geometry();
    MeasurementMatrix a = build_measurement_matrix(g);
    for (auto [gr, gc] : {std::pair{8, 8}, std::pair{0, 0}, std::pair{15, 3}}) {
        const Eigen::VectorXd expected = oracle::psf_column_quadrature(
            g.raw_rows, g.raw_cols, g.upsample_factor, g.frame_offset_rows(),
            g.frame_offset_cols(), g.psf_sigma_grids, gr, gc);
        const Eigen::VectorXd got = a.entries.col(gc * g.grid_rows + gr);
        REQUIRE((expected - got).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("a molecule under a pixel interior peaks in that pixel") {
    const ImagingGeometry g{};
    MeasurementMatrix a = build_measurement_matrix(g);
    // pixel (7, 7) covers grid cells [32, 36) on each axis; cell 33 lies inside
    const int gr = 33, gc = 33;
    Eigen::Index argmax;
    a.entries.col(gc * g.grid_rows + gr).maxCoeff(&argmax);
    REQUIRE(argmax == 7 * g.raw_rows + 7);
}

TEST_CASE("maximum adjacent column correlation is near the reported coherence") {
    const ImagingGeometry g{};
    MeasurementMatrix a = build_measurement_matrix(g);
    double best = 0.0;
    Eigen::VectorXd norms(a.entries.cols());
    for (long j = 0; j < a.entries.cols(); ++j) norms(j) = a.entries.col(j).norm();
    for (int gc = 0; gc < g.grid_cols; ++gc)
        for (int gr = 0; gr < g.grid_rows; ++gr) {
            const long col = gc * g.grid_rows + gr;
            if (gr + 1 < g.grid_rows) {
                const long right = gc * g.grid_rows + gr + 1;
                best = std::max(best, a.entries.col(col).dot(a.entries.col(right)) /
                                          (norms(col) * norms(right)));
            }
            if (gc + 1 < g.grid_cols) {
                const long down = (gc + 1) * g.grid_rows + gr;
                best = std::max(best, a.entries.col(col).dot(a.entries.col(down)) /
                                          (norms(col) * norms(down)));
            }
        }
    REQUIRE(best == Catch::Approx(0.999224).margin(0.0008));
}

TEST_CASE("column weights sum the columns") {
    Eigen::MatrixXd m(2, 2);
    m << 1, 0, 2, 3;
    const Eigen::VectorXd c = compute_column_weights(m);
    REQUIRE(c(0) == 3.0);
    REQUIRE(c(1) == 3.0);
}

TEST_CASE("edge grid points shed flux outside the frame") {
    const ImagingGeometry g = small_geometry();
    MeasurementMatrix a = build_measurement_matrix(g);
    const int center = (g.grid_cols / 2) * g.grid_rows + g.grid_rows / 2;
    const int edge = 0;  // corner grid point
    REQUIRE(a.column_weights(edge) < a.column_weights(center));
    // cross-check both weights against the quadrature oracle
    const Eigen::VectorXd oc = oracle::psf_column_quadrature(
        g.raw_rows, g.raw_cols, g.upsample_factor, g.frame_offset_rows(), g.frame_offset_cols(),
        g.psf_sigma_grids, g.grid_rows / 2, g.grid_cols / 2);
    const Eigen::VectorXd oe = oracle::psf_column_quadrature(
        g.raw_rows, g.raw_cols, g.upsample_factor, g.frame_offset_rows(), g.frame_offset_cols(),
        g.psf_sigma_grids, 0, 0);
    REQUIRE(a.column_weights(center) == Catch::Approx(oc.sum()).epsilon(1e-8));
    REQUIRE(a.column_weights(edge) == Catch::Approx(oe.sum()).epsilon(1e-6));
}

TEST_CASE("central column keeps at least 95 percent of the flux in frame") {
    const ImagingGeometry g{};
    MeasurementMatrix a = build_measurement_matrix(g);
    const int center = (g.grid_cols / 2) * g.grid_rows + g.grid_rows / 2;
    REQUIRE(a.column_weights(center) >= 0.95);
}

TEST_CASE("background augmentation appends a unit column with zero weight") {
    const ImagingGeometry g{};
    MeasurementMatrix a = build_measurement_matrix(g);
    AugmentedMatrix phi = augment_background(a);
    REQUIRE(phi.entries.rows() == 196);
    REQUIRE(phi.entries.cols() == 4097);
    REQUIRE(phi.column_weights(4096) == 0.0);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(4097);
    x(4096) = 7.5;
    REQUIRE(((phi.entries * x).array() - 7.5).abs().maxCoeff() == 0.0);
}

TEST_CASE("bin_frame sums blocks and preserves photons") {
    Eigen::MatrixXd frame = Eigen::MatrixXd::Constant(14, 14, 16.0);
    Eigen::MatrixXd binned = bin_frame(frame, 2);
    REQUIRE(binned.rows() == 7);
    REQUIRE(binned.cols() == 7);
    REQUIRE((binned.array() == 64.0).all());

    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(4, 4);
    REQUIRE((bin_frame(ones, 2).array() == 4.0).all());

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 100);
    Eigen::MatrixXd random_frame(6, 8);
    for (long j = 0; j < 8; ++j)
        for (long i = 0; i < 6; ++i) random_frame(i, j) = u(rng);
    REQUIRE(bin_frame(random_frame, 2).sum() == Catch::Approx(random_frame.sum()).epsilon(1e-13));

    REQUIRE_THROWS_AS(bin_frame(random_frame, 4), ShapeError);
}

TEST_CASE("bin_matrix matches frame binning and keeps weights") {
    const ImagingGeometry g = small_geometry();
    MeasurementMatrix a = build_measurement_matrix(g);
    MeasurementMatrix ab = bin_matrix(a);
    REQUIRE(ab.entries.rows() == 9);
    REQUIRE(ab.entries.cols() == a.entries.cols());
    REQUIRE(ab.binned);

    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0, 1);
    Eigen::VectorXd x(a.entries.cols());
    for (long i = 0; i < x.size(); ++i) x(i) = std::abs(n(rng));
    const Eigen::VectorXd lhs = ab.entries * x;
    const Eigen::VectorXd rhs =
        vectorize(bin_frame(unvectorize(a.entries * x, g.raw_rows, g.raw_cols), g.bin_factor));
    REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);

    REQUIRE((ab.column_weights - a.column_weights).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("default binned matrix is 49x4096") {
    MeasurementMatrix a = build_measurement_matrix(ImagingGeometry{});
    MeasurementMatrix ab = bin_matrix(a);
    REQUIRE(ab.entries.rows() == 49);
    REQUIRE(ab.entries.cols() == 4096);
}

TEST_CASE("binning commutes with analytic construction at the binned geometry") {
    const ImagingGeometry g = small_geometry();
    MeasurementMatrix ab = bin_matrix(build_measurement_matrix(g));
    MeasurementMatrix direct = build_measurement_matrix(ab.geometry);
    REQUIRE((ab.entries - direct.entries).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("vectorize roundtrips and fixes the column-major order") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0, 1);
    for (auto [rows, cols] : {std::pair{3, 5}, std::pair{7, 2}, std::pair{1, 9}}) {
        Eigen::MatrixXd m(rows, cols);
        for (long j = 0; j < cols; ++j)
            for (long i = 0; i < rows; ++i) m(i, j) = n(rng);
        REQUIRE(unvectorize(vectorize(m), rows, cols) == m);
    }
    Eigen::MatrixXd m(2, 2);
    m << 1, 2, 3, 4;
    const Eigen::VectorXd v = vectorize(m);
    REQUIRE(v(0) == 1);
    REQUIRE(v(1) == 3);  // column-major: (1,0) comes second
    REQUIRE_THROWS_AS(unvectorize(v, 3, 2), ShapeError);
}

TEST_CASE("nonnegative scenes render nonnegative frames") {
    const ImagingGeometry g = small_geometry();
    MeasurementMatrix a = build_measurement_matrix(g);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 10);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(a.entries.cols());
        for (int k = 0; k < 10; ++k) x(rng() % x.size()) = u(rng);
        REQUIRE(((a.entries * x).array() >= 0).all());
    }
}

TEST_CASE("geometry invariants are enforced") {
    ImagingGeometry g = small_geometry();
    g.bin_factor = 4;  // does not divide 6
    REQUIRE_THROWS_AS(validate(g), ConfigError);

    g = small_geometry();
    g.pixel_size_nm = 25.0;  // != grid * upsample
    REQUIRE_THROWS_AS(validate(g), ConfigError);

    g = small_geometry();
    g.raw_rows = 9;  // footprint 18 exceeds the 16-cell grid
    REQUIRE_THROWS_AS(validate(g), ConfigError);

    g = small_geometry();
    g.grid_rows = 15;  // odd margin: cannot center
    REQUIRE_THROWS_AS(validate(g), ConfigError);

    g = small_geometry();
    g.psf_sigma_grids = 0.0;
    REQUIRE_THROWS_AS(validate(g), ConfigError);
}
