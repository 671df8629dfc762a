#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gwrs/grid.hpp"

namespace gwrs {

/// Point / vector in R^d; only the first dim entries are meaningful.
using Vec = std::array<double, 3>;

/// Dense dim x dim matrix stored in a fixed 3x3 frame.
using Mat = std::array<std::array<double, 3>, 3>;

/**
 * Invertible affine map x -> A x + b on R^dim.
 * Composition and inversion are exact (closed-form for dim <= 3),
 * so affine images of analytic shapes keep exact measures.
 */
class AffineMap {
public:
    AffineMap(int dim, const Mat& linear, const Vec& shift);

    static AffineMap identity(int dim);
    static AffineMap translation(int dim, const Vec& shift);
    static AffineMap linear_map(int dim, const Mat& linear);

    int dim() const { return dim_; }
    const Mat& linear() const { return lin_; }
    const Vec& shift() const { return shift_; }

    Vec apply(const Vec& x) const;
    AffineMap inverse() const;
    /// Composition (*this after g): x -> this(g(x)).
    AffineMap after(const AffineMap& g) const;
    double det() const { return det_; }

private:
    int dim_;
    Mat lin_;
    Vec shift_;
    double det_;
    Mat inv_;  // inverse of lin_, cached at construction
};

enum class RasterMode { binary, fractional };

/**
 * Analytic shape description: a small expression tree over balls,
 * ellipsoids, axis-aligned boxes, finite unions, set differences, and
 * affine images. Membership, bounding boxes, and (where determinable)
 * exact measures are evaluated analytically, so affine maps act on the
 * description rather than on rasters.
 */
class ShapeSpec {
public:
    static ShapeSpec ball(int dim, const Vec& center, double radius);
    /// Solid ellipsoid { x : (x-c)^T M (x-c) <= 1 }, M symmetric positive definite.
    static ShapeSpec ellipsoid(int dim, const Vec& center, const Mat& m);
    /// Half-open axis box [lo_1, hi_1) x ... (half-open so aligned tilings do not overlap).
    static ShapeSpec box(int dim, const Vec& lo, const Vec& hi);
    static ShapeSpec union_of(std::vector<ShapeSpec> parts);
    static ShapeSpec difference(ShapeSpec a, ShapeSpec b);
    static ShapeSpec affine_image(const AffineMap& map, ShapeSpec child);

    int dim() const;
    bool contains(const Vec& x) const;
    /// Axis-aligned bounding box (lo, hi) of the shape.
    std::pair<Vec, Vec> bounding_box() const;
    /// Exact Lebesgue measure when determinable from the tree
    /// (primitives, provably disjoint unions, provably nested differences,
    /// affine images of the former); nullopt otherwise.
    std::optional<double> exact_measure() const;

    /// Measure if the shape is an affine image of a ball (an ellipsoid,
    /// possibly nested in affine_image nodes); nullopt otherwise.
    std::optional<double> ellipsoidal_measure() const;

    /// Serialization to/from a JSON document.
    std::string dump() const;
    static ShapeSpec parse(const std::string& json_text);

    struct Node;  // implementation detail, exposed for the evaluator

private:
    explicit ShapeSpec(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
    friend ShapeSpec apply_affine(const ShapeSpec&, const AffineMap&);
    friend struct ShapeOps;
};

/// Image of the shape under the map; exact on the description level.
ShapeSpec apply_affine(const ShapeSpec& shape, const AffineMap& map);

/**
 * Rasterize a shape on a grid. binary mode tests cell centers;
 * fractional mode samples subsamples^dim points per cell and stores the
 * occupied fraction. In strict mode a shape whose bounding box exceeds
 * the grid extent is an error; otherwise (and for margins thinner than
 * one cell) a warning is printed to stderr.
 */
GridFunction rasterize(const ShapeSpec& shape, const GridSpec& grid,
                       RasterMode mode = RasterMode::fractional,
                       int subsamples = 4, bool strict = true);

/// Same sampling scheme for an arbitrary membership predicate.
GridFunction rasterize_predicate(const GridSpec& grid,
                                 const std::function<bool(const Vec&)>& inside,
                                 RasterMode mode = RasterMode::fractional,
                                 int subsamples = 4);

/**
 * Fractional raster of the centered ball whose raster measure matches
 * target_measure as closely as the subsample resolution allows (bisection
 * on the radius). When the target is the measure of a centered-ball
 * raster on the same grid, the plateau structure of measure-vs-radius
 * makes the result reproduce that raster cell for cell, which is what
 * keeps symmetrized comparisons free of independent discretization bias.
 */
GridFunction matched_ball_raster(int dim, double target_measure,
                                 const GridSpec& grid, int subsamples = 4);

enum class RandomModel { boxes, perturbed_ellipsoid };

struct RandomSet {
    std::optional<ShapeSpec> spec;  // present when the sample is expressible analytically
    GridFunction raster;
};

/**
 * Deterministic random test sets. `boxes` draws a union of 2..5 random
 * axis boxes; `perturbed_ellipsoid` deforms the boundary radius of a
 * unit-measure centered ball by a smooth random field of relative
 * amplitude `amplitude` (amplitude 0 is exactly the ball).
 */
RandomSet random_set(RandomModel model, int dim, std::uint64_t seed,
                     const GridSpec& grid, double amplitude = 0.0);

}  // namespace gwrs
