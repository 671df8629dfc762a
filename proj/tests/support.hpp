#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "gwrs/grid.hpp"

namespace gwrs::testing {

inline std::filesystem::path fixture_dir() {
#ifdef GWRS_FIXTURE_DIR
    return std::filesystem::path(GWRS_FIXTURE_DIR);
#else
    return std::filesystem::path("tests/fixtures");
#endif
}

/// Centered run of m unit cells on a 1-d grid of n cells, extent 1.
/// With n = 2m the raster has measure exactly 1.
inline GridFunction interval_raster(int n, int m) {
    GridFunction g(GridSpec(1, n, 1.0));
    const int lo = n / 2 - m / 2;
    for (int i = lo; i < lo + m; ++i) g[static_cast<std::size_t>(i)] = 1.0;
    return g;
}

/// Uniform double in [0, 1) with a fixed mapping (bit shift, not a
/// distribution object), so values are stable across standard libraries.
inline double runif(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Grid function with i.i.d. uniform [0,1) values.
inline GridFunction random_density(const GridSpec& grid, std::uint64_t seed) {
    GridFunction g(grid);
    std::mt19937_64 rng(seed);
    for (auto& v : g.values()) v = runif(rng);
    return g;
}

/// Random 0/1 raster with independent cell fill probability p.
inline GridFunction random_indicator(const GridSpec& grid, std::uint64_t seed, double p = 0.35) {
    GridFunction g(grid);
    std::mt19937_64 rng(seed);
    for (auto& v : g.values()) v = (runif(rng) < p) ? 1.0 : 0.0;
    return g;
}

}  // namespace gwrs::testing
