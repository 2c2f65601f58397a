#ifndef WSD_DENOISER_HPP
#define WSD_DENOISER_HPP

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "wsd/errors.hpp"
#include "wsd/measurement.hpp"
#include "wsd/operator_factory.hpp"

namespace wsd {

// Window fractions for the clipping threshold.
struct WsdConfig {
    double star = 0.9;
    double tail = 0.95;
};

inline void validate(const WsdConfig& c) {
    if (!(c.star > 0.0 && c.star < c.tail && c.tail <= 1.0))
        throw ConfigError("wsd: need 0 < star < tail <= 1");
}

// Overlapping-patch tiling: patches of patch_side^2 pixels, of which only a
// core_side^2 region is committed to the output.
struct PatchPlan {
    int patch_side = 14;
    int core_side = 10;
};

inline void validate(const PatchPlan& p) {
    if (p.core_side < 1 || p.core_side > p.patch_side)
        throw ConfigError("patch plan: need 1 <= core_side <= patch_side");
    if ((p.patch_side - p.core_side) % 2 != 0)
        throw ConfigError("patch plan: patch_side - core_side must be even");
}

struct DenoiseReport {
    double cri = 0.0;
    int clipped_count = 0;
    int i_star = 0;  // 1-based, inclusive
    int i_tail = 0;
};

inline Eigen::VectorXd forward_project(const Eigen::VectorXd& y_raw, const DenoiserMaps& maps) {
    if (y_raw.size() != maps.m)
        throw ShapeError("forward_project: vector length does not match the operator");
    return maps.forward * y_raw;
}

inline Eigen::VectorXd inverse_project(const Eigen::VectorXd& z, const DenoiserMaps& maps) {
    if (z.size() != maps.m)
        throw ShapeError("inverse_project: vector length does not match the operator");
    return maps.inverse * z;
}

struct ThresholdSelection {
    double cri = 0.0;
    int i_star = 0;
    int i_tail = 0;
};

// cri = max |z[i]| over the 1-based window [floor(m*star), floor(m*tail)],
// z ordered by descending singular value. The epsilon guards decimal
// fractions that land a hair under an exact integer product.
inline ThresholdSelection select_threshold(const Eigen::VectorXd& z_raw, int m,
                                           const WsdConfig& config) {
    validate(config);
    if (z_raw.size() != m) throw ShapeError("select_threshold: vector length != m");
    ThresholdSelection sel;
    sel.i_star = static_cast<int>(std::floor(m * config.star + 1e-9));
    sel.i_tail = static_cast<int>(std::floor(m * config.tail + 1e-9));
    if (sel.i_star < 1) throw ConfigError("select_threshold: floor(m*star) must be >= 1");
    if (sel.i_star > sel.i_tail)
        throw ConfigError("select_threshold: empty threshold window");
    sel.cri = 0.0;
    for (int i = sel.i_star; i <= sel.i_tail; ++i)
        sel.cri = std::max(sel.cri, std::abs(z_raw(i - 1)));
    return sel;
}

// Magnitudes above cri are pulled down to cri; the sign is preserved.
inline Eigen::VectorXd clip(const Eigen::VectorXd& z_raw, double cri, int* clipped_count = nullptr) {
    Eigen::VectorXd z = z_raw;
    int count = 0;
    for (long i = 0; i < z.size(); ++i) {
        if (std::abs(z(i)) > cri) {
            z(i) = (z(i) < 0 ? -cri : cri);
            ++count;
        }
    }
    if (clipped_count) *clipped_count = count;
    return z;
}

inline std::pair<Eigen::VectorXd, DenoiseReport> denoise_vector(const Eigen::VectorXd& y_raw,
                                                                const DenoiserMaps& maps,
                                                                const WsdConfig& config) {
    Eigen::VectorXd z_raw = forward_project(y_raw, maps);
    const ThresholdSelection sel = select_threshold(z_raw, maps.m, config);
    DenoiseReport report;
    report.cri = sel.cri;
    report.i_star = sel.i_star;
    report.i_tail = sel.i_tail;
    Eigen::VectorXd z_wsd = clip(z_raw, sel.cri, &report.clipped_count);
    return {inverse_project(z_wsd, maps), report};
}

inline std::pair<Eigen::MatrixXd, DenoiseReport> denoise_frame(const Eigen::MatrixXd& y_raw,
                                                               const DenoiserMaps& maps,
                                                               const WsdConfig& config) {
    if (y_raw.size() != maps.m)
        throw ShapeError("denoise_frame: frame pixel count does not match the operator");
    auto [y, report] = denoise_vector(vectorize(y_raw), maps, config);
    return {unvectorize(y, static_cast<int>(y_raw.rows()), static_cast<int>(y_raw.cols())),
            report};
}

namespace tiling {

// Core start offsets along one axis: stride core_side, final core shifted
// inward so it stays in-frame.
inline std::vector<int> core_starts(int frame_side, int core_side) {
    std::vector<int> starts;
    int c = 0;
    while (c + core_side < frame_side) {
        starts.push_back(c);
        c += core_side;
    }
    starts.push_back(frame_side - core_side);
    return starts;
}

struct Claim {
    int begin = 0, end = 0;  // committed half-open range along one axis
};

// First-writer-wins claims: each core commits the part of its range no
// earlier core claimed. Claims partition [0, frame_side).
inline std::vector<Claim> axis_claims(const std::vector<int>& starts, int core_side) {
    std::vector<Claim> claims(starts.size());
    int written = 0;
    for (size_t i = 0; i < starts.size(); ++i) {
        claims[i].begin = std::max(starts[i], written);
        claims[i].end = starts[i] + core_side;
        written = claims[i].end;
    }
    return claims;
}

inline int patch_position(int core_start, int frame_side, const PatchPlan& plan) {
    const int margin = (plan.patch_side - plan.core_side) / 2;
    const int max_pos = frame_side - plan.patch_side;
    return std::clamp(core_start - margin, 0, max_pos);
}

}  // namespace tiling

// Denoise a frame larger than the operator's native patch by tiling.
// Patches are denoised independently (each its own Algorithm-1 instance,
// thresholds recomputed per patch); only claimed core pixels are committed,
// so every output pixel is written exactly once whatever the patch order.
inline std::pair<Eigen::MatrixXd, DenoiseReport> denoise_frame_tiled(const Eigen::MatrixXd& frame,
                                                                     const DenoiserMaps& maps,
                                                                     const PatchPlan& plan,
                                                                     const WsdConfig& config) {
    validate(plan);
    if (plan.patch_side * plan.patch_side != maps.m)
        throw ShapeError("denoise_frame_tiled: patch_side^2 must equal the operator size");
    if (frame.rows() < plan.patch_side || frame.cols() < plan.patch_side)
        throw ShapeError(
            "denoise_frame_tiled: frame smaller than the patch; use denoise_frame directly");

    const std::vector<int> row_starts = tiling::core_starts(static_cast<int>(frame.rows()),
                                                            plan.core_side);
    const std::vector<int> col_starts = tiling::core_starts(static_cast<int>(frame.cols()),
                                                            plan.core_side);
    const std::vector<tiling::Claim> row_claims = tiling::axis_claims(row_starts, plan.core_side);
    const std::vector<tiling::Claim> col_claims = tiling::axis_claims(col_starts, plan.core_side);

    Eigen::MatrixXd out(frame.rows(), frame.cols());
    DenoiseReport report;
    std::map<std::pair<int, int>, std::pair<Eigen::MatrixXd, DenoiseReport>> patch_cache;

    for (size_t cj = 0; cj < col_starts.size(); ++cj)
        for (size_t ci = 0; ci < row_starts.size(); ++ci) {
            const int pr = tiling::patch_position(row_starts[ci], static_cast<int>(frame.rows()),
                                                  plan);
            const int pc = tiling::patch_position(col_starts[cj], static_cast<int>(frame.cols()),
                                                  plan);
            auto key = std::make_pair(pr, pc);
            auto it = patch_cache.find(key);
            if (it == patch_cache.end()) {
                Eigen::MatrixXd patch =
                    frame.block(pr, pc, plan.patch_side, plan.patch_side);
                it = patch_cache.emplace(key, denoise_frame(patch, maps, config)).first;
            }
            const Eigen::MatrixXd& denoised = it->second.first;
            const DenoiseReport& pr_report = it->second.second;
            report.cri = std::max(report.cri, pr_report.cri);
            report.i_star = pr_report.i_star;
            report.i_tail = pr_report.i_tail;

            const tiling::Claim& rc = row_claims[ci];
            const tiling::Claim& cc = col_claims[cj];
            out.block(rc.begin, cc.begin, rc.end - rc.begin, cc.end - cc.begin) =
                denoised.block(rc.begin - pr, cc.begin - pc, rc.end - rc.begin,
                               cc.end - cc.begin);
        }
    for (const auto& [key, value] : patch_cache) report.clipped_count += value.second.clipped_count;
    return {out, report};
}

inline std::vector<Eigen::MatrixXd> denoise_stack_tiled(const std::vector<Eigen::MatrixXd>& stack,
                                                        const DenoiserMaps& maps,
                                                        const PatchPlan& plan,
                                                        const WsdConfig& config,
                                                        std::vector<DenoiseReport>* reports = nullptr) {
    std::vector<Eigen::MatrixXd> out;
    out.reserve(stack.size());
    if (reports) reports->clear();
    for (const Eigen::MatrixXd& frame : stack) {
        auto [denoised, report] = denoise_frame_tiled(frame, maps, plan, config);
        out.push_back(std::move(denoised));
        if (reports) reports->push_back(report);
    }
    return out;
}

}  // namespace wsd

#endif
