#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "gwrs/common.hpp"

namespace gwrs {

/**
 * Cell-centered cubic grid on [-extent, extent]^dim.
 *
 * All axes share the same cell count, so cell centers sit at
 * -extent + (i + 1/2) * cell_width() and the center set is symmetric
 * about the origin. dim must be 1, 2, or 3 and cells >= 2.
 */
class GridSpec {
public:
    GridSpec(int dim, int cells_per_axis, double extent);

    int dim() const { return dim_; }
    int cells() const { return cells_; }
    double extent() const { return extent_; }

    double cell_width() const { return 2.0 * extent_ / cells_; }
    double cell_volume() const;
    std::size_t total_cells() const;

    /// Center coordinate of cell i along any axis (0 <= i < cells()).
    double center(int i) const { return -extent_ + (i + 0.5) * cell_width(); }

    bool operator==(const GridSpec&) const = default;

private:
    int dim_;
    int cells_;
    double extent_;
};

/**
 * Nonnegative sample values on a GridSpec, stored row-major
 * (the first axis varies slowest). Indicator rasters take values in [0,1];
 * general grid functions are only required to be >= 0 where an operation
 * demands it (the operation validates).
 */
class GridFunction {
public:
    explicit GridFunction(GridSpec spec, double fill = 0.0);
    GridFunction(GridSpec spec, std::vector<double> values);

    const GridSpec& spec() const { return spec_; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    /// Flat index of the cell with per-axis indices idx[0..dim-1].
    std::size_t flat_index(const std::array<int, 3>& idx) const;

    /// Inverse of flat_index.
    std::array<int, 3> multi_index(std::size_t flat) const;

    /// Coordinates of the center of cell `flat`.
    std::array<double, 3> cell_center(std::size_t flat) const;

    /// cell_volume * sum of values (deterministic pairwise reduction).
    double measure() const;

    double max_value() const;
    double min_value() const;

    /// Binary grid file: magic "GWRS", version, dim, cells, extent, payload.
    void save(const std::filesystem::path& path) const;
    static GridFunction load(const std::filesystem::path& path);

private:
    GridSpec spec_;
    std::vector<double> values_;
};

/// Lebesgue measure represented by e (cell volume times value sum).
double measure(const GridFunction& e);

/// L^1 distance |E delta F| of two rasters on the same grid.
double symmetric_difference(const GridFunction& a, const GridFunction& b);

}  // namespace gwrs
