#pragma once

#include "gwrs/grid.hpp"
#include "gwrs/profile.hpp"

namespace gwrs {

/**
 * Symmetric decreasing rearrangement on the grid: the sorted values of g
 * are reassigned to cells in order of increasing distance of the cell
 * center from the origin (ties broken by flat index, so the result is
 * deterministic). The value multiset is preserved exactly, hence so is
 * every superlevel measure.
 */
GridFunction radial_rearrangement(const GridFunction& g);

/**
 * One-dimensional nonincreasing rearrangement g_* as a step profile:
 * |{t : g_*(t) > a}| = |{x : g(x) > a}| for every a >= 0. Runs of equal
 * values are merged; trailing zeros are dropped (the profile vanishes
 * beyond its last knot). Requires g >= 0.
 */
Profile1D rearrangement_1d(const GridFunction& g);

/**
 * sup { int_A g : |A| = t } via the greedy cell-packing maximizer
 * (full cells in descending value order plus one fractional cell).
 * Equals cumulative_F(rearrangement_1d(g)) evaluated at t.
 */
double bathtub_oracle(const GridFunction& g, double t);

/// Binary indicator of {g > threshold}.
GridFunction superlevel_set(const GridFunction& g, double threshold);

}  // namespace gwrs
