#include "gwrs/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace gwrs {

namespace {

constexpr char kMagic[4] = {'G', 'W', 'R', 'S'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put_le(std::ostream& os, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    if constexpr (std::endian::native == std::endian::big) {
        auto* p = reinterpret_cast<unsigned char*>(&v);
        std::reverse(p, p + sizeof v);
    }
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get_le(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if constexpr (std::endian::native == std::endian::big) {
        auto* p = reinterpret_cast<unsigned char*>(&v);
        std::reverse(p, p + sizeof v);
    }
    return v;
}

}  // namespace

GridSpec::GridSpec(int dim, int cells_per_axis, double extent)
    : dim_(dim), cells_(cells_per_axis), extent_(extent) {
    if (dim < 1 || dim > 3) throw ConfigError("GridSpec: dim must be 1, 2, or 3");
    if (cells_per_axis < 2) throw ConfigError("GridSpec: cells per axis must be >= 2");
    if (!(extent > 0.0) || !std::isfinite(extent)) throw ConfigError("GridSpec: extent must be positive and finite");
}

double GridSpec::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= cell_width();
    return v;
}

std::size_t GridSpec::total_cells() const {
    std::size_t t = 1;
    for (int a = 0; a < dim_; ++a) t *= static_cast<std::size_t>(cells_);
    return t;
}

GridFunction::GridFunction(GridSpec spec, double fill)
    : spec_(spec), values_(spec.total_cells(), fill) {}

GridFunction::GridFunction(GridSpec spec, std::vector<double> values)
    : spec_(spec), values_(std::move(values)) {
    if (values_.size() != spec_.total_cells())
        throw ConfigError("GridFunction: value count does not match grid");
}

std::size_t GridFunction::flat_index(const std::array<int, 3>& idx) const {
    const int n = spec_.cells();
    std::size_t flat = 0;
    for (int a = 0; a < spec_.dim(); ++a) {
        flat = flat * static_cast<std::size_t>(n) + static_cast<std::size_t>(idx[a]);
    }
    return flat;
}

std::array<int, 3> GridFunction::multi_index(std::size_t flat) const {
    const int n = spec_.cells();
    std::array<int, 3> idx{0, 0, 0};
    for (int a = spec_.dim() - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(flat % static_cast<std::size_t>(n));
        flat /= static_cast<std::size_t>(n);
    }
    return idx;
}

std::array<double, 3> GridFunction::cell_center(std::size_t flat) const {
    const auto idx = multi_index(flat);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int a = 0; a < spec_.dim(); ++a) x[a] = spec_.center(idx[a]);
    return x;
}

double GridFunction::measure() const {
    return spec_.cell_volume() * pairwise_sum(values_);
}

double GridFunction::max_value() const {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double GridFunction::min_value() const {
    return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

void GridFunction::save(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("GridFunction::save: cannot open " + path.string());
    os.write(kMagic, 4);
    put_le<std::uint32_t>(os, kVersion);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(spec_.dim()));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(spec_.cells()));
    put_le<double>(os, spec_.extent());
    for (double v : values_) put_le<double>(os, v);
    if (!os) throw ConfigError("GridFunction::save: write failed for " + path.string());
}

GridFunction GridFunction::load(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("GridFunction::load: cannot open " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw ConfigError("GridFunction::load: bad magic in " + path.string());
    const auto version = get_le<std::uint32_t>(is);
    if (version != kVersion) throw ConfigError("GridFunction::load: unsupported version");
    const auto dim = get_le<std::uint32_t>(is);
    const auto cells = get_le<std::uint32_t>(is);
    const auto extent = get_le<double>(is);
    if (!is) throw ConfigError("GridFunction::load: truncated header");
    GridSpec spec(static_cast<int>(dim), static_cast<int>(cells), extent);
    std::vector<double> values(spec.total_cells());
    for (auto& v : values) v = get_le<double>(is);
    if (!is) throw ConfigError("GridFunction::load: truncated payload");
    return GridFunction(spec, std::move(values));
}

double measure(const GridFunction& e) { return e.measure(); }

double symmetric_difference(const GridFunction& a, const GridFunction& b) {
    if (!(a.spec() == b.spec()))
        throw ConfigError("symmetric_difference: grids must match");
    const auto va = a.values();
    const auto vb = b.values();
    const double s = pairwise_map_sum(0, va.size(), [&](std::size_t i) { return std::abs(va[i] - vb[i]); });
    return a.spec().cell_volume() * s;
}

}  // namespace gwrs
