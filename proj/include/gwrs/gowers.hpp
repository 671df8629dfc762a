#pragma once

#include <string>
#include <vector>

#include "gwrs/grid.hpp"
#include "gwrs/profile.hpp"
#include "gwrs/shapes.hpp"

namespace gwrs {

/**
 * Default ceiling for norm evaluation cost, in units of the documented
 * model n^{d(k-2)} * n^d * log2(n), where n is the largest side of the
 * support bounding box and d the dimension.
 */
inline constexpr double kDefaultNormBudget = 1.0e10;

struct GowersResult {
    int k = 0;
    GridSpec grid{1, 2, 1.0};
    double power_value = 0.0;  // the 2^k-th power of the norm
    double norm_value = 0.0;   // power_value^(1/2^k)
    std::string method;        // "recursive" or "fourier-u2"
};

/**
 * Uniformity norm of order k by the inductive definition: the order-1
 * norm is |integral of f|, and the 2^(k+1)-power of the order-(k+1) norm
 * integrates the 2^k-power of f * f(.+s) over all shifts s. Shifts run
 * over the lattice of the support bounding box (everything outside
 * contributes zero); the reduction order is fixed, so results do not
 * depend on the worker-thread count. The order-2 stage at the top level
 * is a direct lattice autocorrelation sum; inner order-2 stages use the
 * algebraically identical zero-padded spectral form for speed.
 *
 * Errors: negative input values (invalid_argument); cost model above
 * budget (runtime_error of the budget kind).
 */
GowersResult gowers_norm(const GridFunction& f, int k, double budget = kDefaultNormBudget);

/**
 * Independent order-2 oracle: the 4th power of the norm equals the
 * normalized fourth moment of the zero-padded discrete Fourier transform
 * (Parseval applied to the autocorrelation). Exactly equal to the
 * recursive order-2 value up to round-off.
 */
GowersResult u2_via_fourier(const GridFunction& f);

/**
 * The constant gamma_{k,d} with power_value = gamma * measure^(k+1) for
 * ellipsoids: estimated from the unit-measure centered ball at two grid
 * resolutions with Richardson extrapolation (the lattice error of the
 * aligned 1-d interval is exactly quadratic in the cell width, and the
 * same rate is used for d >= 2).
 */
struct GammaEstimate {
    int k = 0;
    int dim = 0;
    double value = 0.0;   // extrapolated estimate
    double coarse = 0.0;  // raw value at n_coarse
    double fine = 0.0;    // raw value at n_fine
    int n_coarse = 0;
    int n_fine = 0;
    double rate = 2.0;  // assumed convergence order in 1/n
    bool extrapolated = false;
};

/// k = 1 returns exactly 1 without computation. Results are cached per (k, dim).
GammaEstimate gamma_estimate(int k, int dim, double budget = kDefaultNormBudget);

/// Closed form for d = 1: gamma_{k,1} = prod_{j=2..k} 2/(j+1).
double gamma_closed_form_1d(int k);

/// norm_value / measure^((k+1)/2^k); affine-invariant for indicators.
double normalized_ratio(const GridFunction& f, int k, double budget = kDefaultNormBudget);

/**
 * Source of the reference ball profile used in chain comparisons.
 * matched_raster sends the centered ball of matching raster measure
 * through the same autocorrelation + rearrangement pipeline as the input
 * (so ball inputs reproduce the reference exactly and the comparison is
 * free of independent discretization bias); closed_form uses the
 * analytic ball autocorrelation profile.
 */
enum class TildeSource { matched_raster, closed_form };

/**
 * The interpolation chain between a set and its symmetrized ball:
 * c_j integrates f_*^(k-j) * tilde^j over the half-line, where f_* is the
 * nonincreasing rearrangement of the set's autocorrelation and tilde the
 * ball reference profile. The c_j are nondecreasing in j (Riesz-Sobolev),
 * the set's power value is at most gamma_{k-1,d} * c_0 up to
 * discretization tolerance, and gamma_{k-1,d} * c_k matches the
 * symmetrized set's power value.
 */
struct ChainReport {
    int k = 0;
    int dim = 0;
    int n = 0;
    double measure = 0.0;
    std::vector<double> terms;  // c_0 .. c_k
    double set_power = 0.0;     // power value of the input
    double star_power = 0.0;    // power value of its radial rearrangement
    double gamma_ref = 0.0;     // gamma_{k-1,dim} estimate
    double lhs = 0.0;           // set_power / gamma_ref
    double rhs = 0.0;           // star_power / gamma_ref
    double tol = 0.0;           // tol_disc(k, dim, n)
    bool canonicalized = false; // input replaced by its affine ball reduction
    TildeSource tilde_source = TildeSource::matched_raster;

    /// (max c_j - min c_j) / max c_j; 0 for empty or all-zero chains.
    double spread() const;
    /// max over j of (c_j - c_{j+1}) / max c, clamped below at 0.
    double max_monotone_violation() const;
    bool monotone(double slack = 1e-8) const;
};

/**
 * Chain terms plus the sandwiching norm values for an indicator-type
 * grid function (values in [0,1]; a warning is printed when fractional
 * boundary mass exceeds 5% of the measure).
 */
ChainReport chain_report(const GridFunction& e, int k,
                         TildeSource tilde = TildeSource::matched_raster,
                         double budget = kDefaultNormBudget);

/**
 * Chain for an analytic shape. Shapes that are affine images of balls
 * are reduced to the centered ball of equal measure first (every chain
 * quantity is affine-covariant, and the reduction keeps the ellipsoid
 * equality case exact on the grid); other shapes are rasterized as-is.
 */
ChainReport chain_report_for_shape(const ShapeSpec& shape, const GridSpec& grid, int k,
                                   TildeSource tilde = TildeSource::matched_raster,
                                   double budget = kDefaultNormBudget);

}  // namespace gwrs
