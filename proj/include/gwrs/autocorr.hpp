#pragma once

#include "gwrs/grid.hpp"
#include "gwrs/profile.hpp"

namespace gwrs {

/**
 * Autocorrelation f(s) = int e(x) e(x+s) dx of a grid function, sampled on
 * the shift lattice {j * cell_width : |j| <= n-1}^dim. The sample grid has
 * 2n-1 cells per axis with the same cell width as the source grid, so its
 * cell centers land exactly on the lattice shifts (zero shift included).
 */
struct Autocorrelation {
    GridFunction values;
    double source_measure;

    /// Value at shift index j in [-(n-1), n-1]^dim.
    double at_shift(const std::array<int, 3>& j) const;
};

/**
 * FFT-based autocorrelation (zero-padded, so circular wraparound is exact
 * linear correlation). Requires e >= 0. In strict mode, nonzero support on
 * the outermost cell layer is an error: such a raster was likely truncated
 * by the grid extent. Round-off negatives are clamped to zero; a negative
 * below -1e-9 * measure(e) is reported as an error.
 */
Autocorrelation autocorrelation(const GridFunction& e, bool strict = true);

/// |B(r) intersect (B(r)+s)| for the centered ball of radius r in R^dim.
double ball_autocorrelation_closed_form(int dim, double radius, double s);

/**
 * Nonincreasing rearrangement of the autocorrelation of the centered ball
 * of the given measure: a profile supported on [0, 2^dim * measure] with
 * value measure at 0. Exact (two knots) for dim 1; for dim 2 and 3 the
 * closed form is sampled on `samples` radius-uniform knots.
 */
Profile1D tilde_f_star(int dim, double measure, int samples = 4096);

/**
 * The measure mu on (0, infinity) with d(mu) = -(k-1) tilde^{k-2} d(tilde),
 * i.e. the Stieltjes measure of -tilde^{k-1}. Interval masses are exact
 * potential differences, so mu needs no quadrature.
 */
struct MuMeasure {
    int k;
    Profile1D tilde;  // tilde_f_star profile the measure is built from

    /// Total mass = tilde(0)^{k-1}.
    double mass() const;

    /// mu([a, b]) = tilde(a)^{k-1} - tilde(b)^{k-1} (exact).
    double interval_mass(double a, double b) const;

    /// Radon-Nikodym derivative w.r.t. Lebesgue measure at t.
    double density_at(double t) const;

    /// Piecewise view of the density for reporting. Exact when the density
    /// is piecewise constant (k = 2) or a single linear piece; otherwise a
    /// step profile through interval midpoints.
    Profile1D density_profile() const;

    /// int phi d(mu) by per-interval Gauss quadrature (exact for polynomial
    /// phi of degree <= 9 on each knot interval).
    double integrate(const std::function<double(double)>& phi) const;
};

MuMeasure mu_density(int dim, int k, double measure, int samples = 4096);

}  // namespace gwrs
