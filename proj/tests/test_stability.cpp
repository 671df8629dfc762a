#include <cmath>
#include <vector>

#include "doctest.h"
#include "gwrs/common.hpp"
#include "gwrs/shapes.hpp"
#include "gwrs/stability.hpp"
#include "support.hpp"

using namespace gwrs;

TEST_SUITE("stability") {

TEST_CASE("moment fit recovers an axis-aligned ellipse") {
    Mat m{};
    m[0][0] = 16.0;  // semiaxes 1/4 and 1/2
    m[1][1] = 4.0;
    m[2][2] = 1.0;
    ShapeSpec e = ShapeSpec::ellipsoid(2, {0.1, -0.05, 0.0}, m);
    GridFunction raster = rasterize(e, GridSpec(2, 192, 1.0));
    EllipsoidFit fit = fit_ellipsoid(raster);
    CHECK(fit.center[0] == doctest::Approx(0.1).epsilon(5e-3));
    CHECK(fit.center[1] == doctest::Approx(-0.05).epsilon(5e-3));
    CHECK(fit.matrix[0][0] == doctest::Approx(16.0).epsilon(0.02));
    CHECK(fit.matrix[1][1] == doctest::Approx(4.0).epsilon(0.02));
    CHECK(std::abs(fit.matrix[0][1]) < 0.05);
    CHECK(symmetric_difference_ratio(raster, fit) < 0.03);
}

TEST_CASE("moment fit recovers a rotated ellipse") {
    // rotate diag(16, 4) by 30 degrees: M' = R M R^T with R orthogonal
    const double c = std::sqrt(3.0) / 2.0, s = 0.5;
    Mat m{};
    m[0][0] = c * c * 16.0 + s * s * 4.0;
    m[0][1] = m[1][0] = c * s * (16.0 - 4.0);
    m[1][1] = s * s * 16.0 + c * c * 4.0;
    m[2][2] = 1.0;
    ShapeSpec e = ShapeSpec::ellipsoid(2, {0.0, 0.0, 0.0}, m);
    GridFunction raster = rasterize(e, GridSpec(2, 192, 1.0));
    EllipsoidFit fit = fit_ellipsoid(raster);
    CHECK(fit.matrix[0][0] == doctest::Approx(m[0][0]).epsilon(0.02));
    CHECK(fit.matrix[0][1] == doctest::Approx(m[0][1]).epsilon(0.02));
    CHECK(fit.matrix[1][1] == doctest::Approx(m[1][1]).epsilon(0.02));
    CHECK(symmetric_difference_ratio(raster, fit) < 0.03);
}

TEST_CASE("fit rejects degenerate input") {
    GridFunction zero(GridSpec(2, 32, 1.0));
    CHECK_THROWS_AS(fit_ellipsoid(zero), ConfigError);
    GridFunction line(GridSpec(2, 32, 1.0));
    for (int j = 4; j < 28; ++j) line[line.flat_index({16, j, 0})] = 1.0;
    CHECK_THROWS_AS(fit_ellipsoid(line), ConfigError);
}

TEST_CASE("fitted volume matches the raster measure") {
    GridFunction ball = matched_ball_raster(2, 0.7, GridSpec(2, 128, 1.0));
    EllipsoidFit fit = fit_ellipsoid(ball);
    REQUIRE(fit.spec().exact_measure().has_value());
    CHECK(*fit.spec().exact_measure() == doctest::Approx(measure(ball)).epsilon(1e-10));
}

TEST_CASE("refinement never worsens the symmetric difference") {
    GridFunction e = random_set(RandomModel::perturbed_ellipsoid, 2, 5, GridSpec(2, 96, 1.0), 0.2)
                         .raster;
    EllipsoidFit fit = fit_ellipsoid(e);
    const double before = symmetric_difference_ratio(e, fit);
    EllipsoidFit refined = refine_fit(e, fit, 2);
    const double after = symmetric_difference_ratio(e, refined);
    CHECK(after <= before + 1e-12);
}

TEST_CASE("sweep layout is amplitude-major and reproducible") {
    GridSpec grid(2, 48, 1.0);
    const std::vector<double> amps{0.0, 0.2};
    const std::vector<std::uint64_t> seeds{11, 22, 33};
    auto records = stability_sweep(2, 2, grid, amps, seeds);
    REQUIRE(records.size() == 6);
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(records[i].amplitude == amps[i / 3]);
        CHECK(records[i].seed == seeds[i % 3]);
        CHECK(records[i].delta >= 0.0);
        CHECK(records[i].delta <= 1.0);
        CHECK(records[i].epsilon >= 0.0);
    }
    auto again = stability_sweep(2, 2, grid, amps, seeds);
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(records[i].power_value == again[i].power_value);
        CHECK(records[i].epsilon == again[i].epsilon);
    }
}

TEST_CASE("unperturbed records sit near the ellipsoid maximum") {
    GridSpec grid(2, 96, 1.0);
    const std::vector<double> amps{0.0};
    const std::vector<std::uint64_t> seeds{4};
    auto records = stability_sweep(2, 2, grid, amps, seeds);
    REQUIRE(records.size() == 1);
    // amplitude 0 is the matched ball: delta is pure discretization residue
    CHECK(records[0].delta < 5e-3);
    CHECK(records[0].epsilon < 0.05);
}

TEST_CASE("spearman correlation on exact ranks") {
    const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> up{10.0, 20.0, 30.0, 40.0};
    const std::vector<double> down{4.0, 3.0, 2.0, 1.0};
    CHECK(spearman_correlation(xs, up) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(spearman_correlation(xs, down) == doctest::Approx(-1.0).epsilon(1e-14));
    // one swap of neighbours in a 4-chain: rho = 1 - 6*2/(4*15) = 0.8
    const std::vector<double> swapped{10.0, 30.0, 20.0, 40.0};
    CHECK(spearman_correlation(xs, swapped) == doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("spearman handles ties by average ranks and rejects constants") {
    const std::vector<double> xs{1.0, 1.0, 2.0, 3.0};
    const std::vector<double> ys{5.0, 5.0, 7.0, 9.0};
    CHECK(spearman_correlation(xs, ys) == doctest::Approx(1.0).epsilon(1e-12));
    const std::vector<double> flat{1.0, 1.0, 1.0, 1.0};
    CHECK_THROWS_AS(spearman_correlation(xs, flat), ConfigError);
    const std::vector<double> one{1.0};
    CHECK_THROWS_AS(spearman_correlation(one, one), ConfigError);
}

TEST_CASE("exceptional set of a ball is empty at every delta") {
    GridFunction ball = matched_ball_raster(2, 1.0, GridSpec(2, 96, 1.0));
    for (double delta : {1e-4, 1e-2, 0.25, 1.0}) {
        ExceptionalSetReport rep = exceptional_measure(ball, 2, 0.5, 2.0, delta);
        CHECK(rep.mu_bad == 0.0);
        CHECK(rep.mu_total > 0.0);
        CHECK(rep.ratio == 0.0);
    }
}

TEST_CASE("exceptional set fills the window as delta approaches one") {
    // a strongly split set falls below the ball envelope on most of J
    GridFunction g(GridSpec(1, 256, 1.0));
    for (int i = 32; i < 64; ++i) g[static_cast<std::size_t>(i)] = 1.0;
    for (int i = 192; i < 224; ++i) g[static_cast<std::size_t>(i)] = 1.0;
    ExceptionalSetReport tight = exceptional_measure(g, 2, 0.25, 1.75, 1e-6);
    ExceptionalSetReport loose = exceptional_measure(g, 2, 0.25, 1.75, 0.9);
    CHECK(tight.mu_bad >= loose.mu_bad);
    CHECK(tight.mu_bad > 0.0);
    CHECK(tight.mu_bad <= tight.mu_total + 1e-12);
    CHECK(tight.k == 2);
    CHECK(tight.delta == 1e-6);
}

TEST_CASE("exceptional measure argument validation") {
    GridFunction ball = matched_ball_raster(1, 1.0, GridSpec(1, 64, 1.0));
    CHECK_THROWS_AS(exceptional_measure(ball, 1, 0.5, 1.0, 0.1), ConfigError);
    CHECK_THROWS_AS(exceptional_measure(ball, 2, 0.0, 1.0, 0.1), ConfigError);
    CHECK_THROWS_AS(exceptional_measure(ball, 2, 1.0, 0.5, 0.1), ConfigError);
    CHECK_THROWS_AS(exceptional_measure(ball, 2, 0.5, 3.0, 0.1), ConfigError);  // above 2^d
    CHECK_THROWS_AS(exceptional_measure(ball, 2, 0.5, 1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(exceptional_measure(ball, 2, 0.5, 1.0, 1.5), ConfigError);
}

}  // TEST_SUITE("stability")
