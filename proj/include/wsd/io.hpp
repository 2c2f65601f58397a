#ifndef WSD_IO_HPP
#define WSD_IO_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wsd/errors.hpp"
#include "wsd/operator_factory.hpp"

namespace wsd {

static_assert(std::endian::native == std::endian::little,
              "container formats are little-endian; big-endian hosts need byte swaps");

namespace io_detail {

template <typename T>
void put(std::ofstream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& what) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw IoError("truncated file while reading " + what);
    return value;
}

inline void put_magic(std::ofstream& out, const char magic[4]) { out.write(magic, 4); }

inline void expect_magic(std::ifstream& in, const char magic[4], const std::string& path) {
    char buf[4] = {};
    in.read(buf, 4);
    if (!in || std::memcmp(buf, magic, 4) != 0)
        throw IoError(path + ": bad magic, expected " + std::string(magic, 4));
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    return in;
}

}  // namespace io_detail

// "WSDM": u32 rows, u32 cols, f64 row-major payload, little-endian.
inline void write_matrix_wsdm(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out = io_detail::open_out(path);
    io_detail::put_magic(out, "WSDM");
    io_detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    io_detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
    for (long i = 0; i < m.rows(); ++i)
        for (long j = 0; j < m.cols(); ++j) io_detail::put<double>(out, m(i, j));
    if (!out) throw IoError("write failed: " + path);
}

inline Eigen::MatrixXd read_matrix_wsdm(const std::string& path) {
    std::ifstream in = io_detail::open_in(path);
    io_detail::expect_magic(in, "WSDM", path);
    const auto rows = io_detail::get<std::uint32_t>(in, "rows");
    const auto cols = io_detail::get<std::uint32_t>(in, "cols");
    Eigen::MatrixXd m(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i)
        for (std::uint32_t j = 0; j < cols; ++j) m(i, j) = io_detail::get<double>(in, "payload");
    return m;
}

// "WSDT" operator-bundle cache: u32 M, u32 digits, then U, s, V, inverse_map
// as f64 row-major blocks (the working-precision export).
inline void write_bundle_wsdt(const std::string& path, const DenoiserMaps& maps) {
    std::ofstream out = io_detail::open_out(path);
    io_detail::put_magic(out, "WSDT");
    io_detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(maps.m));
    io_detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(maps.digits));
    auto put_block = [&out](const Eigen::MatrixXd& b) {
        for (long i = 0; i < b.rows(); ++i)
            for (long j = 0; j < b.cols(); ++j) io_detail::put<double>(out, b(i, j));
    };
    put_block(maps.u);
    for (long i = 0; i < maps.singular_values.size(); ++i)
        io_detail::put<double>(out, maps.singular_values(i));
    put_block(maps.v);
    put_block(maps.inverse);
    if (!out) throw IoError("write failed: " + path);
}

inline DenoiserMaps read_bundle_wsdt(const std::string& path) {
    std::ifstream in = io_detail::open_in(path);
    io_detail::expect_magic(in, "WSDT", path);
    const auto m = io_detail::get<std::uint32_t>(in, "M");
    const auto digits = io_detail::get<std::uint32_t>(in, "digits");
    auto get_block = [&in, m]() {
        Eigen::MatrixXd b(m, m);
        for (std::uint32_t i = 0; i < m; ++i)
            for (std::uint32_t j = 0; j < m; ++j) b(i, j) = io_detail::get<double>(in, "block");
        return b;
    };
    Eigen::MatrixXd u = get_block();
    Eigen::VectorXd s(m);
    for (std::uint32_t i = 0; i < m; ++i) s(i) = io_detail::get<double>(in, "singular values");
    Eigen::MatrixXd v = get_block();
    Eigen::MatrixXd inverse_map = get_block();
    return compose_maps(u, s, v, inverse_map, static_cast<int>(digits));
}

// "WSDS" frame stack: u16 version, u32 frames, u32 rows, u32 cols,
// u8 dtype (0 = u16 photon counts, 1 = f64 real), u8 clamped_flag,
// then frames row-major.
enum class StackDtype : std::uint8_t { u16 = 0, f64 = 1 };

constexpr std::uint16_t kStackVersion = 1;

inline void write_stack_wsds(const std::string& path, const std::vector<Eigen::MatrixXd>& frames,
                             StackDtype dtype, bool clamped = false) {
    if (frames.empty()) throw IoError("write_stack_wsds: empty stack");
    const long rows = frames.front().rows();
    const long cols = frames.front().cols();
    for (const auto& f : frames)
        if (f.rows() != rows || f.cols() != cols)
            throw ShapeError("write_stack_wsds: frames must share one shape");

    std::ofstream out = io_detail::open_out(path);
    io_detail::put_magic(out, "WSDS");
    io_detail::put<std::uint16_t>(out, kStackVersion);
    io_detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(frames.size()));
    io_detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(rows));
    io_detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(cols));
    io_detail::put<std::uint8_t>(out, static_cast<std::uint8_t>(dtype));
    io_detail::put<std::uint8_t>(out, clamped ? 1 : 0);
    for (const auto& f : frames)
        for (long i = 0; i < rows; ++i)
            for (long j = 0; j < cols; ++j) {
                if (dtype == StackDtype::f64) {
                    io_detail::put<double>(out, f(i, j));
                } else {
                    const double v = f(i, j);
                    const double r = std::nearbyint(v);
                    if (!(std::abs(v - r) <= 1e-6) || r < 0 || r > 65535)
                        throw IoError("write_stack_wsds: value does not fit u16 photon counts");
                    io_detail::put<std::uint16_t>(out, static_cast<std::uint16_t>(r));
                }
            }
    if (!out) throw IoError("write failed: " + path);
}

inline std::vector<Eigen::MatrixXd> read_stack_wsds(const std::string& path,
                                                    StackDtype* dtype_out = nullptr,
                                                    bool* clamped_out = nullptr) {
    std::ifstream in = io_detail::open_in(path);
    io_detail::expect_magic(in, "WSDS", path);
    const auto version = io_detail::get<std::uint16_t>(in, "version");
    if (version != kStackVersion) throw IoError(path + ": unsupported stack version");
    const auto count = io_detail::get<std::uint32_t>(in, "frames");
    const auto rows = io_detail::get<std::uint32_t>(in, "rows");
    const auto cols = io_detail::get<std::uint32_t>(in, "cols");
    const auto dtype = static_cast<StackDtype>(io_detail::get<std::uint8_t>(in, "dtype"));
    const auto clamped = io_detail::get<std::uint8_t>(in, "clamped_flag");
    if (dtype != StackDtype::u16 && dtype != StackDtype::f64)
        throw IoError(path + ": unknown stack dtype");
    std::vector<Eigen::MatrixXd> frames(count, Eigen::MatrixXd(rows, cols));
    for (auto& f : frames)
        for (std::uint32_t i = 0; i < rows; ++i)
            for (std::uint32_t j = 0; j < cols; ++j)
                f(i, j) = dtype == StackDtype::f64
                              ? io_detail::get<double>(in, "payload")
                              : static_cast<double>(io_detail::get<std::uint16_t>(in, "payload"));
    if (dtype_out) *dtype_out = dtype;
    if (clamped_out) *clamped_out = clamped != 0;
    return frames;
}

// Deterministic decimal formatting for CSV output.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::ofstream open_text_out(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

}  // namespace wsd

#endif
