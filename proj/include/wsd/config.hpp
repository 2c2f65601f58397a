#ifndef WSD_CONFIG_HPP
#define WSD_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "wsd/cs_solver.hpp"
#include "wsd/denoiser.hpp"
#include "wsd/errors.hpp"
#include "wsd/geometry.hpp"
#include "wsd/operator_factory.hpp"
#include "wsd/simulator.hpp"

namespace wsd {

// Everything a pipeline run needs; mirrored one-to-one by the flat
// key = value config file (see the README for the key list).
struct RunConfig {
    ImagingGeometry geometry;
    double background = 16.0;
    PhotonLaw photon_law;
    NoiseModel noise;
    WsdConfig wsd;
    PatchPlan patch;
    SolverSettings solver;
    PrecisionConfig precision;
    std::uint64_t seed = 1;
    int workers = 1;
};

inline void validate(const RunConfig& c) {
    validate(c.geometry);
    validate(c.wsd);
    validate(c.patch);
    validate(c.solver);
    validate(c.precision);
    if (c.background < 0) throw ConfigError("config: background_photons must be nonnegative");
    if (c.photon_law.peak <= 0 || c.photon_law.sd <= 0 || c.photon_law.fixed <= 0)
        throw ConfigError("config: photon law parameters must be positive");
    if (c.noise.gaussian_variance < 0)
        throw ConfigError("config: gaussian_variance must be nonnegative");
    if (c.workers < 0) throw ConfigError("config: workers must be nonnegative");
}

namespace config_detail {

inline double parse_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for " + key + ": '" + value + "'");
    }
    if (used != value.size())
        throw ConfigError("config: bad numeric value for " + key + ": '" + value + "'");
    return v;
}

inline long long parse_int(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(value, &used);
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer value for " + key + ": '" + value + "'");
    }
    if (used != value.size())
        throw ConfigError("config: bad integer value for " + key + ": '" + value + "'");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "on") return true;
    if (value == "0" || value == "false" || value == "off") return false;
    throw ConfigError("config: bad boolean value for " + key + ": '" + value + "'");
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace config_detail

// One "key = value" assignment; returns false when the key is unknown.
inline bool apply_config_key(RunConfig& c, const std::string& key, const std::string& value,
                             bool& grid_size_given) {
    using config_detail::parse_bool;
    using config_detail::parse_double;
    using config_detail::parse_int;

    if (key == "pixel_size_nm") c.geometry.pixel_size_nm = parse_double(key, value);
    else if (key == "grid_size_nm") { c.geometry.grid_size_nm = parse_double(key, value); grid_size_given = true; }
    else if (key == "upsample_factor") c.geometry.upsample_factor = static_cast<int>(parse_int(key, value));
    else if (key == "raw_rows") c.geometry.raw_rows = static_cast<int>(parse_int(key, value));
    else if (key == "raw_cols") c.geometry.raw_cols = static_cast<int>(parse_int(key, value));
    else if (key == "grid_rows") c.geometry.grid_rows = static_cast<int>(parse_int(key, value));
    else if (key == "grid_cols") c.geometry.grid_cols = static_cast<int>(parse_int(key, value));
    else if (key == "psf_sigma_grids") c.geometry.psf_sigma_grids = parse_double(key, value);
    else if (key == "bin_factor") c.geometry.bin_factor = static_cast<int>(parse_int(key, value));
    else if (key == "background_photons") c.background = parse_double(key, value);
    else if (key == "photon_law") {
        if (value == "lognormal") c.photon_law.kind = PhotonLaw::Kind::LogNormal;
        else if (value == "fixed") c.photon_law.kind = PhotonLaw::Kind::Fixed;
        else throw ConfigError("config: photon_law must be lognormal or fixed");
    }
    else if (key == "photon_peak") c.photon_law.peak = parse_double(key, value);
    else if (key == "photon_sd") c.photon_law.sd = parse_double(key, value);
    else if (key == "photon_fixed") c.photon_law.fixed = parse_double(key, value);
    else if (key == "poisson") c.noise.poisson = parse_bool(key, value);
    else if (key == "gaussian_variance") c.noise.gaussian_variance = parse_double(key, value);
    else if (key == "gaussian_scale") {
        if (value == "normalized") c.noise.scale = NoiseModel::GaussianScale::Normalized;
        else if (value == "absolute") c.noise.scale = NoiseModel::GaussianScale::Absolute;
        else throw ConfigError("config: gaussian_scale must be normalized or absolute");
    }
    else if (key == "star") c.wsd.star = parse_double(key, value);
    else if (key == "tail") c.wsd.tail = parse_double(key, value);
    else if (key == "patch_side") c.patch.patch_side = static_cast<int>(parse_int(key, value));
    else if (key == "core_side") c.patch.core_side = static_cast<int>(parse_int(key, value));
    else if (key == "epsilon") c.solver.epsilon = parse_double(key, value);
    else if (key == "solver_gap_tol") c.solver.gap_tol = parse_double(key, value);
    else if (key == "solver_max_iterations") c.solver.max_iterations = parse_int(key, value);
    else if (key == "digits") c.precision.significant_decimal_digits = static_cast<int>(parse_int(key, value));
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "workers") c.workers = static_cast<int>(parse_int(key, value));
    else return false;
    return true;
}

// Flat key = value file; '#' starts a comment, blank lines skipped, unknown
// keys rejected. grid_size_nm defaults to pixel_size_nm / upsample_factor.
inline RunConfig parse_config(std::istream& in, const std::string& origin = "<config>") {
    RunConfig c;
    bool grid_size_given = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = config_detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        const std::string key = config_detail::trim(line.substr(0, eq));
        const std::string value = config_detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        if (!apply_config_key(c, key, value, grid_size_given))
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": unknown key '" + key +
                              "'");
    }
    if (!grid_size_given)
        c.geometry.grid_size_nm = c.geometry.pixel_size_nm / c.geometry.upsample_factor;
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    return parse_config(in, path);
}

}  // namespace wsd

#endif
