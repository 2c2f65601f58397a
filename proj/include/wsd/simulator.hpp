#ifndef WSD_SIMULATOR_HPP
#define WSD_SIMULATOR_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "wsd/denoiser.hpp"
#include "wsd/errors.hpp"
#include "wsd/measurement.hpp"
#include "wsd/parallel.hpp"
#include "wsd/rng.hpp"

namespace wsd {

// Per-molecule photon count distribution. The log-normal is parameterized by
// its mode ("peak") and standard deviation.
struct PhotonLaw {
    enum class Kind { LogNormal, Fixed };
    Kind kind = Kind::LogNormal;
    double peak = 3000.0;
    double sd = 1700.0;
    double fixed = 3000.0;
};

struct LogNormalParams {
    double mu = 0.0;
    double sigma = 0.0;
};

// Solve mode = exp(mu - s^2), sd^2 = (exp(s^2)-1) exp(2 mu + s^2) for
// (mu, sigma). Substituting mu = log(mode) + s^2 leaves
// (exp(s^2)-1) exp(3 s^2) = (sd/mode)^2, monotone in s^2: bisect.
inline LogNormalParams lognormal_from_mode_sd(double mode, double sd) {
    if (mode <= 0 || sd <= 0) throw ConfigError("photon law: mode and sd must be positive");
    const double target = (sd / mode) * (sd / mode);
    double lo = 0.0, hi = 1.0;
    auto f = [](double t) { return std::expm1(t) * std::exp(3.0 * t); };
    while (f(hi) < target) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < target ? lo : hi) = mid;
    }
    const double t = 0.5 * (lo + hi);
    return {std::log(mode) + t, std::sqrt(t)};
}

struct GroundTruthScene {
    std::vector<int> positions;   // grid indices, column-major
    std::vector<double> photons;  // per molecule, > 0
    double background = 16.0;     // photons per pixel
    Eigen::VectorXd x_vector;     // length N, nonzero exactly at positions
};

namespace detail {

inline double draw_photons(const PhotonLaw& law, std::mt19937_64& rng) {
    if (law.kind == PhotonLaw::Kind::Fixed) return law.fixed;
    const LogNormalParams p = lognormal_from_mode_sd(law.peak, law.sd);
    std::lognormal_distribution<double> dist(p.mu, p.sigma);
    return dist(rng);
}

inline GroundTruthScene assemble_scene(const std::vector<int>& positions,
                                       const PhotonLaw& law, double background, int n,
                                       std::mt19937_64& rng) {
    GroundTruthScene scene;
    scene.positions = positions;
    scene.background = background;
    scene.x_vector = Eigen::VectorXd::Zero(n);
    scene.photons.reserve(positions.size());
    for (int pos : positions) {
        const double p = detail::draw_photons(law, rng);
        scene.photons.push_back(p);
        scene.x_vector(pos) = p;
    }
    return scene;
}

}  // namespace detail

// K molecules at distinct uniform-random grid positions.
inline GroundTruthScene sample_scene(int k, const ImagingGeometry& geometry,
                                     const PhotonLaw& law, double background,
                                     std::mt19937_64& rng) {
    const int n = geometry.grid_count();
    if (k < 1 || k > n) throw ConfigError("sample_scene: need 1 <= K <= grid count");
    if (background < 0) throw ConfigError("sample_scene: background must be nonnegative");

    std::vector<int> positions;
    positions.reserve(k);
    std::unordered_set<int> used;
    std::uniform_int_distribution<int> dist(0, n - 1);
    while (static_cast<int>(positions.size()) < k) {
        const int pos = dist(rng);
        if (used.insert(pos).second) positions.push_back(pos);
    }
    return detail::assemble_scene(positions, law, background, n, rng);
}

// Fixed structure: `count` molecules evenly spaced along the diagonal of the
// central half of the frame footprint. Positions are deterministic; photons
// still follow the law.
inline GroundTruthScene line_scene(int count, const ImagingGeometry& geometry,
                                   const PhotonLaw& law, double background,
                                   std::mt19937_64& rng) {
    if (count < 1) throw ConfigError("line_scene: need at least one molecule");
    const int span_r = geometry.raw_rows * geometry.upsample_factor;
    const int span_c = geometry.raw_cols * geometry.upsample_factor;
    const double r0 = geometry.frame_offset_rows() + span_r / 4.0;
    const double r1 = geometry.frame_offset_rows() + 3.0 * span_r / 4.0;
    const double c0 = geometry.frame_offset_cols() + span_c / 4.0;
    const double c1 = geometry.frame_offset_cols() + 3.0 * span_c / 4.0;
    std::vector<int> positions;
    for (int i = 0; i < count; ++i) {
        const double f = count == 1 ? 0.5 : static_cast<double>(i) / (count - 1);
        const int r = static_cast<int>(std::lround(r0 + f * (r1 - r0)));
        const int c = static_cast<int>(std::lround(c0 + f * (c1 - c0)));
        positions.push_back(c * geometry.grid_rows + r);
    }
    return detail::assemble_scene(positions, law, background, geometry.grid_count(), rng);
}

// y_ini = A x + background. Accumulates the K active columns directly.
inline Eigen::VectorXd render_noiseless(const GroundTruthScene& scene,
                                        const MeasurementMatrix& a) {
    if (scene.x_vector.size() != a.entries.cols())
        throw ShapeError("render_noiseless: scene grid does not match the measurement matrix");
    Eigen::VectorXd y = Eigen::VectorXd::Constant(a.entries.rows(), scene.background);
    for (size_t i = 0; i < scene.positions.size(); ++i)
        y += scene.photons[i] * a.entries.col(scene.positions[i]);
    return y;
}

struct NoiseModel {
    bool poisson = true;
    double gaussian_variance = 0.0;
    enum class GaussianScale { Normalized, Absolute };
    // Normalized: variance applies on the frame-max-normalized intensity
    // scale of the frame being degraded, then rescales back.
    GaussianScale scale = GaussianScale::Normalized;
};

inline Eigen::VectorXd apply_noise(const Eigen::VectorXd& y_ini, const NoiseModel& model,
                                   std::mt19937_64& rng) {
    if (model.gaussian_variance < 0)
        throw ConfigError("noise model: gaussian_variance must be nonnegative");
    if ((y_ini.array() < 0).any())
        throw DomainError("apply_noise: noiseless input must be nonnegative");
    Eigen::VectorXd y = y_ini;
    if (model.poisson) {
        for (long i = 0; i < y.size(); ++i) {
            if (y(i) > 0) {
                std::poisson_distribution<long> dist(y(i));
                y(i) = static_cast<double>(dist(rng));
            }
        }
    }
    if (model.gaussian_variance > 0) {
        const double scale = model.scale == NoiseModel::GaussianScale::Normalized
                                 ? y.maxCoeff()
                                 : 1.0;
        if (scale > 0) {
            std::normal_distribution<double> dist(0.0, std::sqrt(model.gaussian_variance) * scale);
            for (long i = 0; i < y.size(); ++i) y(i) += dist(rng);
        }
    }
    return y;
}

// 10 log10(sum y_ref^2 / sum (y - y_ref)^2); the uniform background counts
// as signal because it is part of y_ref.
inline double snr_db(const Eigen::VectorXd& y, const Eigen::VectorXd& y_ref) {
    if (y.size() != y_ref.size()) throw ShapeError("snr_db: length mismatch");
    const double ref = y_ref.squaredNorm();
    if (ref == 0) throw DomainError("snr_db: reference signal is identically zero");
    const double res = (y - y_ref).squaredNorm();
    if (res == 0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(ref / res);
}

struct SimulatedFrame {
    Eigen::VectorXd y_ini;
    Eigen::VectorXd y_raw;
    GroundTruthScene scene;
};

inline SimulatedFrame simulate_frame(int k, const MeasurementMatrix& a, const PhotonLaw& law,
                                     double background, const NoiseModel& noise,
                                     std::uint64_t seed) {
    std::mt19937_64 rng = make_rng(seed);
    SimulatedFrame frame;
    if (k == 0) {
        frame.scene.background = background;
        frame.scene.x_vector = Eigen::VectorXd::Zero(a.entries.cols());
    } else {
        frame.scene = sample_scene(k, a.geometry, law, background, rng);
    }
    frame.y_ini = render_noiseless(frame.scene, a);
    frame.y_raw = apply_noise(frame.y_ini, noise, rng);
    return frame;
}

struct BenchmarkRow {
    int k = 0;
    double density_um2 = 0.0;
    std::string condition;
    double mean_db = 0.0;
    double sd_db = 0.0;
    int reps = 0;
    std::uint64_t seed = 0;
};

struct BenchmarkOptions {
    std::vector<int> k_list{1, 2, 4, 8, 16, 32, 64, 128};
    int reps = 100;
    PhotonLaw law;
    double background = 16.0;
    NoiseModel noise;
    WsdConfig wsd;
    std::uint64_t seed = 1;
    int workers = 1;
};

namespace detail {

inline double mean_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace detail

// SNR study over sparsity levels: scores RAW, WSD, RAW_bin, WSD_bin per
// (K, rep) cell and emits mean/sd rows per condition plus the DIFF row
// (mean WSD - mean RAW). Cells are independent tasks with derived seeds, so
// worker count never changes the numbers.
inline std::vector<BenchmarkRow> run_benchmark(const MeasurementMatrix& a,
                                               const DenoiserMaps& maps,
                                               const BenchmarkOptions& opt) {
    validate(opt.wsd);
    if (opt.reps < 1) throw ConfigError("benchmark: reps must be >= 1");
    const int bin = a.geometry.bin_factor;
    const int nk = static_cast<int>(opt.k_list.size());
    std::vector<std::vector<double>> raw(nk), den(nk), raw_bin(nk), den_bin(nk);
    for (int i = 0; i < nk; ++i) {
        raw[i].resize(opt.reps);
        den[i].resize(opt.reps);
        raw_bin[i].resize(opt.reps);
        den_bin[i].resize(opt.reps);
    }

    parallel_for(static_cast<long>(nk) * opt.reps, opt.workers, [&](long cell) {
        const int ki = static_cast<int>(cell / opt.reps);
        const int rep = static_cast<int>(cell % opt.reps);
        const std::uint64_t seed = derive_seed(opt.seed, {static_cast<std::uint64_t>(ki),
                                                          static_cast<std::uint64_t>(rep)});
        SimulatedFrame f = simulate_frame(opt.k_list[ki], a, opt.law, opt.background,
                                          opt.noise, seed);
        auto [y_wsd, report] = denoise_vector(f.y_raw, maps, opt.wsd);
        (void)report;

        const int rows = a.geometry.raw_rows, cols = a.geometry.raw_cols;
        const Eigen::VectorXd ini_b = vectorize(bin_frame(unvectorize(f.y_ini, rows, cols), bin));
        const Eigen::VectorXd raw_b = vectorize(bin_frame(unvectorize(f.y_raw, rows, cols), bin));
        const Eigen::VectorXd wsd_b = vectorize(bin_frame(unvectorize(y_wsd, rows, cols), bin));

        raw[ki][rep] = snr_db(f.y_raw, f.y_ini);
        den[ki][rep] = snr_db(y_wsd, f.y_ini);
        raw_bin[ki][rep] = snr_db(raw_b, ini_b);
        den_bin[ki][rep] = snr_db(wsd_b, ini_b);
    });

    std::vector<BenchmarkRow> rows;
    for (int i = 0; i < nk; ++i) {
        const int k = opt.k_list[i];
        const double density = a.geometry.density_per_um2(k);
        auto push = [&](const std::string& cond, const std::vector<double>& v) {
            rows.push_back({k, density, cond, detail::mean_of(v), detail::sd_of(v), opt.reps,
                            opt.seed});
        };
        push("RAW", raw[i]);
        push("WSD", den[i]);
        push("RAW_bin", raw_bin[i]);
        push("WSD_bin", den_bin[i]);
        std::vector<double> diff(opt.reps);
        for (int r = 0; r < opt.reps; ++r) diff[r] = den[i][r] - raw[i][r];
        push("DIFF", diff);
    }
    return rows;
}

}  // namespace wsd

#endif
