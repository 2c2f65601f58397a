#ifndef WSD_GEOMETRY_HPP
#define WSD_GEOMETRY_HPP

#include <cmath>
#include <string>

#include "wsd/errors.hpp"

namespace wsd {

// Imaging geometry tying the camera frame to the super-resolution grid.
//
// The raw frame covers the central (raw_dims * upsample_factor) region of the
// grid; grid points outside that footprint still shed tail flux into edge
// pixels. The frame footprint must be centered, i.e. the margin on each side
// is integral.
struct ImagingGeometry {
    double grid_size_nm = 45.714 / 4.0;  // one grid cell, = pixel_size / upsample
    double pixel_size_nm = 45.714;       // one camera pixel
    int upsample_factor = 4;             // grid cells per pixel side
    int raw_rows = 14, raw_cols = 14;    // camera frame
    int grid_rows = 64, grid_cols = 64;  // reconstruction grid
    double psf_sigma_grids = 8.0;        // Gaussian PSF s.d., grid units (2 pixels)
    int bin_factor = 2;                  // camera binning used by bin_matrix/bin_frame

    int pixel_count() const { return raw_rows * raw_cols; }
    int grid_count() const { return grid_rows * grid_cols; }

    // Margin (grid cells) between grid edge and frame footprint, per axis.
    int frame_offset_rows() const { return (grid_rows - raw_rows * upsample_factor) / 2; }
    int frame_offset_cols() const { return (grid_cols - raw_cols * upsample_factor) / 2; }

    // Molecules per square micrometer at sparsity K.
    double density_per_um2(int k) const {
        const double side_r = grid_rows * grid_size_nm * 1e-3;
        const double side_c = grid_cols * grid_size_nm * 1e-3;
        return static_cast<double>(k) / (side_r * side_c);
    }
};

inline void validate(const ImagingGeometry& g) {
    if (g.grid_size_nm <= 0 || g.pixel_size_nm <= 0)
        throw ConfigError("geometry: grid and pixel sizes must be positive");
    if (g.upsample_factor < 1 || g.raw_rows < 1 || g.raw_cols < 1 || g.grid_rows < 1 ||
        g.grid_cols < 1)
        throw ConfigError("geometry: dimensions must be positive integers");
    if (std::abs(g.pixel_size_nm - g.grid_size_nm * g.upsample_factor) >
        1e-3 * g.pixel_size_nm)
        throw ConfigError("geometry: pixel_size_nm must equal grid_size_nm * upsample_factor");
    if (g.psf_sigma_grids <= 0) throw ConfigError("geometry: psf_sigma_grids must be positive");
    if (g.bin_factor < 1 || g.raw_rows % g.bin_factor != 0 || g.raw_cols % g.bin_factor != 0)
        throw ConfigError("geometry: bin_factor must divide raw dimensions");
    const int span_r = g.raw_rows * g.upsample_factor;
    const int span_c = g.raw_cols * g.upsample_factor;
    if (span_r > g.grid_rows || span_c > g.grid_cols)
        throw ConfigError("geometry: frame footprint exceeds the grid");
    if ((g.grid_rows - span_r) % 2 != 0 || (g.grid_cols - span_c) % 2 != 0)
        throw ConfigError("geometry: frame footprint cannot be centered on the grid");
}

}  // namespace wsd

#endif
