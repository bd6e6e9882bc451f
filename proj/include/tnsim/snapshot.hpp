#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "tnsim/field.hpp"

namespace tnsim {

// Field snapshot, flat binary, little-endian:
//   header  { magic "TNF1", u32 cutoff, u32 mode count }
//   records { i32 k1, i32 k2, f64 a_k } in modes_up_to order.
static_assert(std::endian::native == std::endian::little,
              "snapshot format assumes a little-endian host");

inline void write_snapshot(const std::filesystem::path& path, const FourierField& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_snapshot: cannot open " + path.string());
    const auto modes = modes_up_to(f.cutoff());
    out.write("TNF1", 4);
    const std::uint32_t n = static_cast<std::uint32_t>(f.cutoff());
    const std::uint32_t count = static_cast<std::uint32_t>(modes.size());
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&count), 4);
    for (const LatticeIndex k : modes) {
        const std::int32_t k1 = k.k1, k2 = k.k2;
        const double a = f.at(k);
        out.write(reinterpret_cast<const char*>(&k1), 4);
        out.write(reinterpret_cast<const char*>(&k2), 4);
        out.write(reinterpret_cast<const char*>(&a), 8);
    }
    if (!out) throw std::runtime_error("write_snapshot: write failed for " + path.string());
}

inline FourierField read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_snapshot: cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "TNF1", 4) != 0)
        throw std::runtime_error("read_snapshot: bad magic in " + path.string());
    std::uint32_t n = 0, count = 0;
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&count), 4);
    if (!in || n < 1) throw std::runtime_error("read_snapshot: bad header in " + path.string());
    FourierField f(static_cast<int>(n));
    for (std::uint32_t i = 0; i < count; ++i) {
        std::int32_t k1 = 0, k2 = 0;
        double a = 0.0;
        in.read(reinterpret_cast<char*>(&k1), 4);
        in.read(reinterpret_cast<char*>(&k2), 4);
        in.read(reinterpret_cast<char*>(&a), 8);
        if (!in) throw std::runtime_error("read_snapshot: truncated file " + path.string());
        f.set({k1, k2}, a);
    }
    return f;
}

}  // namespace tnsim
