#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "doctest.h"
#include "gwrs/common.hpp"
#include "gwrs/gowers.hpp"
#include "gwrs/multilinear.hpp"
#include "gwrs/rearrange.hpp"
#include "gwrs/shapes.hpp"
#include "support.hpp"

using namespace gwrs;

namespace {

SetTuple random_tuple(int k, const GridSpec& grid, std::uint64_t seed, double p = 0.4) {
    SetTuple t;
    t.k = k;
    std::mt19937_64 rng(seed);
    for (int a = 0; a < (1 << k); ++a) t.entries.push_back(testing::random_indicator(grid, rng(), p));
    return t;
}

// independent piecewise closed form: 3r^2 - y^2 inside |y| <= r,
// (3r - |y|)^2 / 2 on r <= |y| <= 3r, zero beyond
double slice_k2_d1_reference(double r, double y) {
    const double a = std::abs(y);
    if (a <= r) return 3.0 * r * r - a * a;
    if (a <= 3.0 * r) return 0.5 * (3.0 * r - a) * (3.0 * r - a);
    return 0.0;
}

}  // namespace

TEST_SUITE("multilinear") {

TEST_CASE("constant tuple form equals the uniformity norm power") {
    for (int m : {16, 32}) {
        GridFunction g = testing::interval_raster(2 * m, m);
        const double mm = static_cast<double>(m) * m;
        SetTuple t2 = SetTuple::constant(g, 2);
        CHECK(t_form(t2) == doctest::Approx(2.0 / 3.0 + 1.0 / (3.0 * mm)).epsilon(1e-13));
        SetTuple t3 = SetTuple::constant(g, 3);
        CHECK(t_form(t3) == doctest::Approx(gowers_norm(g, 3).power_value).epsilon(1e-12));
    }
}

TEST_CASE("order-2 form matches the correlation-pairing oracle") {
    std::mt19937_64 seeds(808);
    for (int trial = 0; trial < 6; ++trial) {
        SetTuple t = random_tuple(2, GridSpec(1, 48, 1.0), seeds());
        const double direct = t_form(t);
        const double paired = t2_via_correlations(t);
        CHECK(direct == doctest::Approx(paired).epsilon(1e-12));
    }
    SetTuple t2d = random_tuple(2, GridSpec(2, 12, 1.0), seeds());
    CHECK(t_form(t2d) == doctest::Approx(t2_via_correlations(t2d)).epsilon(1e-12));
}

TEST_CASE("form is monotone in each entry") {
    GridFunction small = testing::interval_raster(64, 16);
    GridFunction large = testing::interval_raster(64, 32);  // contains small
    SetTuple t = SetTuple::constant(small, 2);
    const double base = t_form(t);
    t.entries[3] = large;
    CHECK(t_form(t) >= base - 1e-15);
}

TEST_CASE("tuple validation rejects malformed input") {
    GridFunction g = testing::interval_raster(32, 16);
    SetTuple bad;
    bad.k = 2;
    bad.entries = {g, g, g};  // one short
    CHECK_THROWS_AS(t_form(bad), std::invalid_argument);

    SetTuple mixed = SetTuple::constant(g, 2);
    mixed.entries[1] = GridFunction(GridSpec(1, 16, 1.0));
    CHECK_THROWS_AS(t_form(mixed), std::invalid_argument);

    CHECK_THROWS_AS(t_form(SetTuple::constant(g, 4)), std::invalid_argument);
    CHECK_THROWS_AS(t_form(SetTuple::constant(g, 1)), std::invalid_argument);
}

TEST_CASE("form budget ceiling") {
    GridFunction g = testing::random_indicator(GridSpec(2, 64, 1.0), 3);
    CHECK_THROWS_AS(t_form(SetTuple::constant(g, 3)), BudgetError);
    CHECK_THROWS_AS(t_form(SetTuple::constant(g, 2), 10.0), BudgetError);
}

TEST_CASE("zero entry collapses the form") {
    GridFunction g = testing::interval_raster(32, 16);
    SetTuple t = SetTuple::constant(g, 2);
    t.entries[2] = GridFunction(GridSpec(1, 32, 1.0));
    CHECK(t_form(t) == 0.0);
}

TEST_CASE("rearranged tuples dominate: one-dimensional random sets") {
    std::mt19937_64 seeds(909);
    for (int trial = 0; trial < 10; ++trial) {
        SetTuple t = random_tuple(2, GridSpec(1, 40, 1.0), seeds());
        BllComparison cmp = bll_compare(t);
        CHECK(cmp.value <= cmp.star_value + 1e-12 * std::max(1.0, cmp.star_value));
    }
}

TEST_CASE("rearranged tuples dominate: split interval in two dimensions") {
    // two far-apart boxes rearrange into one centered blob; the form rises
    GridSpec grid(2, 32, 1.0);
    GridFunction g(grid);
    for (int i = 2; i < 8; ++i)
        for (int j = 2; j < 8; ++j) g[g.flat_index({i, j, 0})] = 1.0;
    for (int i = 24; i < 30; ++i)
        for (int j = 24; j < 30; ++j) g[g.flat_index({i, j, 0})] = 1.0;
    BllComparison cmp = bll_compare(SetTuple::constant(g, 2));
    CHECK(cmp.value < cmp.star_value);
    CHECK(cmp.star_value > 0.0);
}

TEST_CASE("comparison is an equality for centered rearranged sets") {
    GridFunction g = testing::interval_raster(48, 24);
    GridFunction star = radial_rearrangement(g);
    BllComparison cmp = bll_compare(SetTuple::constant(star, 2));
    CHECK(cmp.value == doctest::Approx(cmp.star_value).epsilon(1e-13));
}

TEST_CASE("bll_compare rejects negative values") {
    GridFunction g = testing::interval_raster(32, 16);
    SetTuple t = SetTuple::constant(g, 2);
    t.entries[0][4] = -0.1;
    CHECK_THROWS_AS(bll_compare(t), ConfigError);
}

TEST_CASE("slice closed form matches the piecewise reference") {
    const double r = 0.7;
    for (double y : {0.0, 0.2, 0.69, 0.71, 1.3, 2.0, 2.09, 2.2}) {
        CHECK(slice_volume_closed_form_k2_d1(r, y) ==
              doctest::Approx(slice_k2_d1_reference(r, y)).epsilon(1e-13));
        CHECK(slice_volume_closed_form_k2_d1(r, -y) ==
              doctest::Approx(slice_k2_d1_reference(r, y)).epsilon(1e-13));
    }
    CHECK(slice_volume_closed_form_k2_d1(r, 0.0) == doctest::Approx(3.0 * r * r).epsilon(1e-14));
    CHECK(slice_volume_closed_form_k2_d1(r, 3.0 * r) == 0.0);
    CHECK(slice_volume_closed_form_k2_d1(r, 2.99 * r) > 0.0);
}

TEST_CASE("lattice slice estimator converges to the closed form") {
    const double r = 0.5;
    const std::vector<double> radii{0.0, 0.2, 0.45, 0.8, 1.2};
    SliceProfile coarse = slice_volume_profile_lattice(2, 1, r, radii, 512);
    SliceProfile fine = slice_volume_profile_lattice(2, 1, r, radii, 2048);
    CHECK(fine.estimator == "lattice-sum");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double exact = slice_volume_closed_form_k2_d1(r, radii[i]);
        const double err_c = std::abs(coarse.volumes[i] - exact);
        const double err_f = std::abs(fine.volumes[i] - exact);
        CHECK(err_f < 8.0 * r * r / 2048.0);
        CHECK(err_f <= err_c + 1e-12);
        CHECK(fine.stderrs[i] == 0.0);
    }
}

TEST_CASE("order-3 lattice slices vanish at twice the radius") {
    const double r = 0.5;
    const std::vector<double> radii{0.0, 0.4, 0.9, 1.0, 1.25};
    SliceProfile p = slice_volume_profile_lattice(3, 1, r, radii, 40);
    CHECK(p.volumes[0] > 0.0);
    CHECK(p.volumes[1] > 0.0);
    CHECK(p.volumes[0] > p.volumes[1]);
    // vanishing threshold for order 3 is 2 * radius
    CHECK(p.volumes[3] == 0.0);
    CHECK(p.volumes[4] == 0.0);
}

TEST_CASE("monte carlo slices agree with the closed form within error bars") {
    const double r = 0.4;
    const std::vector<double> radii{0.0, 0.3, 0.8};
    SliceProfile p = slice_volume_profile_mc(2, 1, r, radii, 0xfeedu, 200000);
    CHECK(p.estimator == "monte-carlo");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double exact = slice_volume_closed_form_k2_d1(r, radii[i]);
        CHECK(std::abs(p.volumes[i] - exact) < 5.0 * p.stderrs[i]);
        CHECK(p.stderrs[i] > 0.0);
    }
}

TEST_CASE("monte carlo is reproducible in the seed") {
    const std::vector<double> radii{0.0, 0.5};
    SliceProfile a = slice_volume_profile_mc(2, 1, 0.5, radii, 42, 100000);
    SliceProfile b = slice_volume_profile_mc(2, 1, 0.5, radii, 42, 100000);
    SliceProfile c = slice_volume_profile_mc(2, 1, 0.5, radii, 43, 100000);
    CHECK(a.volumes == b.volumes);
    CHECK(a.volumes != c.volumes);
}

TEST_CASE("dispatcher picks the lattice for low order and dimension") {
    const std::vector<double> radii{0.0, 0.5};
    SliceProfile a = slice_volume_profile(2, 1, 0.5, radii);
    CHECK(a.estimator == "lattice-sum");
    SliceProfile b = slice_volume_profile(3, 2, 0.5, radii, 7, 50000);
    CHECK(b.estimator == "monte-carlo");
    CHECK(b.samples >= 1000000);  // floor on requested samples
}

TEST_CASE("slice profile argument validation") {
    const std::vector<double> radii{0.0, 0.5};
    CHECK_THROWS_AS(slice_volume_profile(4, 1, 0.5, radii), ConfigError);
    CHECK_THROWS_AS(slice_volume_profile(2, 4, 0.5, radii), ConfigError);
    CHECK_THROWS_AS(slice_volume_profile(2, 1, -0.5, radii), ConfigError);
    const std::vector<double> bad{-0.1};
    CHECK_THROWS_AS(slice_volume_profile(2, 1, 0.5, bad), ConfigError);
}

TEST_CASE("profile table has three numeric columns") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "gwrs_slice.tsv";
    const std::vector<double> radii{0.0, 0.25};
    SliceProfile p = slice_volume_profile_lattice(2, 1, 0.5, radii, 64);
    p.save_tsv(path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "radius\tvolume\tstderr");
    double a = -1.0, b = -1.0, c = -1.0;
    in >> a >> b >> c;
    CHECK(a == 0.0);
    CHECK(b == doctest::Approx(p.volumes[0]));
    CHECK(c == 0.0);
    fs::remove(path);
}

}  // TEST_SUITE("multilinear")
