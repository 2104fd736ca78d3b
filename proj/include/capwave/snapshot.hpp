#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include <json.hpp>

#include "capwave/grid.hpp"

namespace capwave {

/// Field snapshot: `<stem>.bin` holds the physical samples as row-major
/// (re, im) little-endian float64 pairs, `<stem>.json` the header.
struct Snapshot {
    SpectralField field;
    double time = 0.0;
    std::string name;
};

namespace detail {
inline void put_le(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    os.write(reinterpret_cast<const char*>(&bits), 8);
}
inline double get_le(std::istream& is) {
    std::uint64_t bits = 0;
    is.read(reinterpret_cast<char*>(&bits), 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}
} // namespace detail

inline void write_snapshot(const std::string& stem, const Snapshot& s) {
    const auto& g = s.field.grid();
    nlohmann::json header{{"n", g.n}, {"L", g.L}, {"time", s.time}, {"name", s.name},
                          {"layout", "row-major x1-outer complex128 little-endian"},
                          {"is_real", s.field.is_real()}};
    std::ofstream hj(stem + ".json");
    hj << header.dump(2) << "\n";
    std::ofstream bin(stem + ".bin", std::ios::binary);
    for (const auto& v : to_physical(s.field)) {
        detail::put_le(bin, v.real());
        detail::put_le(bin, v.imag());
    }
    if (!hj || !bin) throw ConfigError("snapshot: could not write " + stem);
}

inline Snapshot read_snapshot(const std::string& stem) {
    std::ifstream hj(stem + ".json");
    if (!hj) throw ConfigError("snapshot: missing header " + stem + ".json");
    nlohmann::json header;
    try {
        hj >> header;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("snapshot: bad header: ") + e.what());
    }
    GridSpec g(header.at("n").get<int>(), header.at("L").get<double>());
    std::ifstream bin(stem + ".bin", std::ios::binary);
    if (!bin) throw ConfigError("snapshot: missing data " + stem + ".bin");
    std::vector<cplx> v(g.size());
    for (auto& c : v) {
        const double re = detail::get_le(bin);
        const double im = detail::get_le(bin);
        c = {re, im};
    }
    if (!bin) throw ConfigError("snapshot: truncated data file " + stem + ".bin");
    const bool real = header.value("is_real", false);
    Snapshot s{forward_transform(std::span<const cplx>(v), g, real), header.value("time", 0.0),
               header.value("name", std::string{})};
    if (real) s.field.symmetrize();
    return s;
}

} // namespace capwave
