#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gwrs/gowers.hpp"
#include "gwrs/grid.hpp"
#include "gwrs/shapes.hpp"

namespace gwrs {

/// Solid ellipsoid { x : (x - center)^T matrix (x - center) <= 1 }.
struct EllipsoidFit {
    int dim = 0;
    Vec center{0.0, 0.0, 0.0};
    Mat matrix{};

    ShapeSpec spec() const;
};

/**
 * Moment fit: center = centroid, shape matrix = inverse covariance over
 * d + 2 (exact for uniform mass on an ellipsoid), rescaled so the fitted
 * ellipsoid's volume equals measure(e). Never optimizes; an exactly
 * rasterized ellipsoid comes back with O(1/n) symmetric-difference error.
 *
 * Errors: zero measure, or a second-moment matrix of rank < d
 * ("measure-zero thickness").
 */
EllipsoidFit fit_ellipsoid(const GridFunction& e);

/**
 * Optional local refinement: coordinate descent on the symmetric
 * difference over the d + d(d+1)/2 ellipsoid parameters, step sizes
 * halved after each sweep. Deterministic; returns the best visit.
 */
EllipsoidFit refine_fit(const GridFunction& e, const EllipsoidFit& init, int sweeps = 2);

/// |E delta fit| / |E| on e's grid; the fit is rasterized fractionally.
double symmetric_difference_ratio(const GridFunction& e, const EllipsoidFit& fit);

/**
 * One point of the near-maximizer experiment: how far the normalized
 * power value falls below the ellipsoid maximum (delta) versus how far
 * the set is from its fitted ellipsoid (epsilon).
 */
struct StabilityRecord {
    std::uint64_t seed = 0;
    double amplitude = 0.0;
    int k = 0;
    int dim = 0;
    int n = 0;
    double measure = 0.0;
    double power_value = 0.0;
    double gamma_ref = 0.0;  // gamma_{k,dim} estimate
    double delta_raw = 0.0;  // 1 - power / (gamma * measure^{k+1})
    double delta = 0.0;      // delta_raw clamped to [0, 1]
    double epsilon = 0.0;    // |E delta fit| / |E|
    EllipsoidFit fit;
};

/**
 * Perturbed-ellipsoid sweep over every (amplitude, seed) pair, in that
 * canonical order. Record i*seeds.size()+j uses amplitudes[i], seeds[j].
 */
std::vector<StabilityRecord> stability_sweep(int dim, int k, const GridSpec& grid,
                                             std::span<const double> amplitudes,
                                             std::span<const std::uint64_t> seeds,
                                             bool refine = false,
                                             double budget = kDefaultNormBudget);

/// Rank correlation with average ranks on ties; requires >= 2 points.
double spearman_correlation(std::span<const double> xs, std::span<const double> ys);

/**
 * Measure of the exceptional shift set: after rescaling e to unit mass,
 * the mu-mass of {s in J : F(s) <= (1 - sqrt(delta)) * Ftilde(s)}, where
 * F integrates the nonincreasing rearrangement of the autocorrelation,
 * Ftilde is the ball reference, and mu is the closed-form comparison
 * measure of order k. For a ball input, F and Ftilde coincide and the
 * bad set is empty at every delta.
 */
struct ExceptionalSetReport {
    int k = 0;
    int dim = 0;
    double j_lo = 0.0;
    double j_hi = 0.0;
    double delta = 0.0;
    double mu_bad = 0.0;
    double mu_total = 0.0;  // mu-mass of all of J
    double ratio = 0.0;     // mu_bad / sqrt(delta)
};

ExceptionalSetReport exceptional_measure(const GridFunction& e, int k, double j_lo, double j_hi,
                                         double delta,
                                         TildeSource tilde = TildeSource::matched_raster);

}  // namespace gwrs
