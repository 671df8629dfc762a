#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gwrs/grid.hpp"

namespace gwrs {

/// Default ceiling for the direct lattice sum, in units of n^{d(k+1)}.
inline constexpr double kDefaultFormBudget = 2.0e10;

/**
 * An ordered 2^k-tuple of grid functions on one common grid, indexed by
 * the vertices of the discrete cube: entry(a) with bit i of a selecting
 * whether the i-th shift participates in that factor's argument.
 */
struct SetTuple {
    int k = 0;
    std::vector<GridFunction> entries;  // size 2^k, index = vertex bitmask

    /// All 2^k entries equal to f.
    static SetTuple constant(const GridFunction& f, int k);

    const GridSpec& grid() const { return entries.front().spec(); }

    /// Throws invalid_argument unless there are exactly 2^k entries on one grid.
    void validate() const;
};

/**
 * The 2^k-linear form integrating prod_a f_a(x_0 + a . x) over the base
 * point x_0 and the k shift vectors, as a direct nested lattice sum with
 * cell_volume^{k+1} weight. Factors prune the nesting as soon as a
 * partial product vanishes; the outer base-point loop parallelizes with
 * a fixed reduction order. On the constant tuple this is the 2^k-th
 * power of the order-k uniformity norm (same lattice, independent
 * evaluation order).
 *
 * Errors: k outside {2, 3} or an invalid tuple (invalid_argument);
 * n^{d(k+1)} above budget (budget error).
 */
double t_form(const SetTuple& tuple, double budget = kDefaultFormBudget);

/**
 * Independent order-2 evaluation: the form factors into two
 * cross-correlations sharing one lag, so T = h^{3d} * sum over lags of
 * D(lag) * C(lag) with D pairing entries {0, 2} and C pairing {1, 3}.
 * Agrees with t_form to round-off; used as its oracle in tests.
 */
double t2_via_correlations(const SetTuple& tuple, double budget = kDefaultFormBudget);

struct BllComparison {
    double value = 0.0;       // form on the tuple as given
    double star_value = 0.0;  // form after radial rearrangement of every entry
};

/**
 * Brascamp-Lieb-Luttinger comparison: the form on the tuple versus the
 * form on the entrywise radially rearranged tuple. The first is at most
 * the second (up to round-off); the function reports both and asserts
 * nothing. Errors: as t_form, plus negative entry values.
 */
BllComparison bll_compare(const SetTuple& tuple, double budget = kDefaultFormBudget);

/**
 * Sampled slice volumes L(|y|) of the convex constraint body: L(y) is
 * the kd-dimensional volume of the set of shift vectors (x_1..x_k) with
 * y + a . x inside the centered ball of the given radius for every
 * nonzero vertex a. Radially symmetric by construction, positive on the
 * open ball, strictly decreasing in |y| there, and log-concave.
 */
struct SliceProfile {
    int k = 0;
    int dim = 0;
    double radius = 0.0;  // ball radius
    std::vector<double> radii;
    std::vector<double> volumes;
    std::vector<double> stderrs;   // zero for the lattice estimator
    std::string estimator;         // "lattice-sum" or "monte-carlo"
    std::uint64_t seed = 0;        // monte-carlo only
    std::int64_t samples = 0;      // per radius; 0 for lattice

    /// Three tab-separated columns: radius, volume, stderr.
    void save_tsv(const std::filesystem::path& path) const;
};

/// Exact profile for order 2 in one dimension (piecewise integration).
double slice_volume_closed_form_k2_d1(double radius, double y);

/**
 * Midpoint lattice estimator with exact constraint membership: each
 * shift vector is sampled on an n_per_axis lattice over its bounding
 * box (side 2 * radius per axis), so the cost is n_per_axis^{kd} per
 * radius. Deterministic.
 */
SliceProfile slice_volume_profile_lattice(int k, int dim, double radius,
                                          std::span<const double> radii, int n_per_axis);

/**
 * Monte Carlo estimator: uniform samples from the product of bounding
 * boxes, volume = box volume times the acceptance rate, binomial
 * standard error. Sample blocks get derived seeds, so results are
 * reproducible and independent of the worker-thread count.
 */
SliceProfile slice_volume_profile_mc(int k, int dim, double radius,
                                     std::span<const double> radii, std::uint64_t seed,
                                     std::int64_t samples);

/**
 * Dispatching estimator: lattice for order 2 in dimensions 1 and 2,
 * Monte Carlo (at least 1e6 samples per radius) for everything larger.
 */
SliceProfile slice_volume_profile(int k, int dim, double radius,
                                  std::span<const double> radii, std::uint64_t seed = 0x5eedu,
                                  std::int64_t samples = 1000000);

}  // namespace gwrs
