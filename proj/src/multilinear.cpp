#include "gwrs/multilinear.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <vector>

#include "gwrs/common.hpp"
#include "gwrs/rearrange.hpp"

namespace gwrs {

namespace {

struct Cell {
    std::array<int, 3> ix{0, 0, 0};
    double v = 0.0;
};

std::vector<Cell> nonzero_cells(const GridFunction& f) {
    std::vector<Cell> cells;
    const auto vals = f.values();
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (vals[i] == 0.0) continue;
        cells.push_back(Cell{f.multi_index(i), vals[i]});
    }
    return cells;
}

double cell_volume_power(const GridSpec& g, int p) {
    double w = 1.0;
    for (int i = 0; i < p; ++i) w *= g.cell_volume();
    return w;
}

}  // namespace

SetTuple SetTuple::constant(const GridFunction& f, int k) {
    if (k < 1 || k > 30) throw ConfigError("SetTuple: order k out of range");
    SetTuple t;
    t.k = k;
    t.entries.assign(std::size_t{1} << k, f);
    return t;
}

void SetTuple::validate() const {
    if (k < 1 || k > 30) throw ConfigError("SetTuple: order k out of range");
    if (entries.size() != (std::size_t{1} << k))
        throw ConfigError("SetTuple: expected 2^k entries");
    const GridSpec& g = entries.front().spec();
    for (const GridFunction& e : entries) {
        if (!(e.spec() == g)) throw ConfigError("SetTuple: entries on mismatched grids");
    }
}

double t_form(const SetTuple& tuple, double budget) {
    tuple.validate();
    const int k = tuple.k;
    if (k != 2 && k != 3)
        throw ConfigError("t_form: only orders 2 and 3 are evaluated");

    for (const GridFunction& e : tuple.entries) {
        bool all_zero = true;
        for (double v : e.values()) {
            if (v != 0.0) {
                all_zero = false;
                break;
            }
        }
        if (all_zero) return 0.0;
    }

    const GridSpec& g = tuple.grid();
    const int n = g.cells();
    const int d = g.dim();
    const double cost = std::pow(static_cast<double>(n), static_cast<double>(d * (k + 1)));
    if (cost > budget) {
        throw BudgetError("t_form: cost model " + format_g17(cost) + " exceeds budget " +
                          format_g17(budget));
    }

    // Absolute positions: the base point and one position per shift. A
    // cross vertex with bit set S is evaluated at sum of those positions
    // minus (|S| - 1) times the base point, clamped out by range checks.
    auto in_range = [n](int t) { return t >= 0 && t < n; };
    const std::vector<Cell> base = nonzero_cells(tuple.entries[0]);
    if (base.empty()) return 0.0;

    std::vector<double> partials(base.size(), 0.0);
    const auto f_at = [&](std::size_t entry, const std::array<int, 3>& ix) {
        return tuple.entries[entry][tuple.entries[entry].flat_index(ix)];
    };

    if (k == 2) {
        const std::vector<Cell> l1 = nonzero_cells(tuple.entries[1]);
        const std::vector<Cell> l2 = nonzero_cells(tuple.entries[2]);
        parallel_blocks(base.size(), [&](std::size_t b0, std::size_t b1) {
            for (std::size_t ib = b0; ib < b1; ++ib) {
                const Cell& c0 = base[ib];
                double acc = 0.0;
                for (const Cell& c1 : l1) {
                    const double w01 = c0.v * c1.v;
                    for (const Cell& c2 : l2) {
                        std::array<int, 3> t{0, 0, 0};
                        bool ok = true;
                        for (int a = 0; a < d; ++a) {
                            t[a] = c1.ix[a] + c2.ix[a] - c0.ix[a];
                            if (!in_range(t[a])) {
                                ok = false;
                                break;
                            }
                        }
                        if (!ok) continue;
                        acc += w01 * c2.v * f_at(3, t);
                    }
                }
                partials[ib] = acc;
            }
        });
    } else {
        const std::vector<Cell> l1 = nonzero_cells(tuple.entries[1]);
        const std::vector<Cell> l2 = nonzero_cells(tuple.entries[2]);
        const std::vector<Cell> l4 = nonzero_cells(tuple.entries[4]);
        parallel_blocks(base.size(), [&](std::size_t b0, std::size_t b1) {
            for (std::size_t ib = b0; ib < b1; ++ib) {
                const Cell& c0 = base[ib];
                double acc = 0.0;
                for (const Cell& c1 : l1) {
                    for (const Cell& c2 : l2) {
                        std::array<int, 3> t12{0, 0, 0};
                        bool ok = true;
                        for (int a = 0; a < d; ++a) {
                            t12[a] = c1.ix[a] + c2.ix[a] - c0.ix[a];
                            if (!in_range(t12[a])) {
                                ok = false;
                                break;
                            }
                        }
                        if (!ok) continue;
                        const double w3 = f_at(3, t12);
                        if (w3 == 0.0) continue;
                        const double pre = c0.v * c1.v * c2.v * w3;
                        for (const Cell& c4 : l4) {
                            std::array<int, 3> t5{0, 0, 0}, t6{0, 0, 0}, t7{0, 0, 0};
                            bool ok2 = true;
                            for (int a = 0; a < d; ++a) {
                                t5[a] = c1.ix[a] + c4.ix[a] - c0.ix[a];
                                t6[a] = c2.ix[a] + c4.ix[a] - c0.ix[a];
                                t7[a] = t12[a] + c4.ix[a] - c0.ix[a];
                                if (!in_range(t5[a]) || !in_range(t6[a]) || !in_range(t7[a])) {
                                    ok2 = false;
                                    break;
                                }
                            }
                            if (!ok2) continue;
                            const double w5 = f_at(5, t5);
                            if (w5 == 0.0) continue;
                            const double w6 = f_at(6, t6);
                            if (w6 == 0.0) continue;
                            acc += pre * c4.v * w5 * w6 * f_at(7, t7);
                        }
                    }
                }
                partials[ib] = acc;
            }
        });
    }
    return cell_volume_power(g, k + 1) * pairwise_sum(partials);
}

namespace {

/// Dense cross-correlation sum_p a(p) b(p + lag) over the full lag box.
std::vector<double> cross_correlation_dense(const GridFunction& a, const GridFunction& b) {
    const GridSpec& g = a.spec();
    const int n = g.cells();
    const int d = g.dim();
    std::array<int, 3> dims{1, 1, 1};
    for (int ax = 0; ax < d; ++ax) dims[ax] = n;
    std::array<int, 3> ldims{1, 1, 1};
    for (int ax = 0; ax < d; ++ax) ldims[ax] = 2 * n - 1;

    const auto av = a.values();
    const auto bv = b.values();
    std::vector<double> out(static_cast<std::size_t>(ldims[0]) * ldims[1] * ldims[2], 0.0);
    for (std::size_t l = 0; l < out.size(); ++l) {
        std::size_t rest = l;
        std::array<int, 3> j{0, 0, 0};
        j[2] = static_cast<int>(rest % ldims[2]) - (dims[2] - 1);
        rest /= ldims[2];
        j[1] = static_cast<int>(rest % ldims[1]) - (dims[1] - 1);
        rest /= ldims[1];
        j[0] = static_cast<int>(rest) - (dims[0] - 1);

        std::array<int, 3> lo{0, 0, 0}, hi{1, 1, 1};
        bool nonempty = true;
        for (int ax = 0; ax < 3; ++ax) {
            lo[ax] = std::max(0, -j[ax]);
            hi[ax] = std::min(dims[ax], dims[ax] - j[ax]);
            if (lo[ax] >= hi[ax]) nonempty = false;
        }
        if (!nonempty) continue;
        double acc = 0.0;
        for (int i0 = lo[0]; i0 < hi[0]; ++i0)
            for (int i1 = lo[1]; i1 < hi[1]; ++i1) {
                const std::size_t ra =
                    (static_cast<std::size_t>(i0) * dims[1] + i1) * dims[2];
                const std::size_t rb =
                    (static_cast<std::size_t>(i0 + j[0]) * dims[1] + (i1 + j[1])) * dims[2] +
                    j[2];
                for (int i2 = lo[2]; i2 < hi[2]; ++i2) acc += av[ra + i2] * bv[rb + i2];
            }
        out[l] = acc;
    }
    return out;
}

}  // namespace

double t2_via_correlations(const SetTuple& tuple, double budget) {
    tuple.validate();
    if (tuple.k != 2) throw ConfigError("t2_via_correlations: order must be 2");
    const GridSpec& g = tuple.grid();
    const int n = g.cells();
    const int d = g.dim();
    const double cost = std::pow(static_cast<double>(n), static_cast<double>(d * 3));
    if (cost > budget) {
        throw BudgetError("t2_via_correlations: cost model " + format_g17(cost) +
                          " exceeds budget " + format_g17(budget));
    }
    const std::vector<double> D = cross_correlation_dense(tuple.entries[0], tuple.entries[2]);
    const std::vector<double> C = cross_correlation_dense(tuple.entries[1], tuple.entries[3]);
    std::vector<double> prod(D.size());
    for (std::size_t i = 0; i < D.size(); ++i) prod[i] = D[i] * C[i];
    return cell_volume_power(g, 3) * pairwise_sum(prod);
}

BllComparison bll_compare(const SetTuple& tuple, double budget) {
    tuple.validate();
    for (const GridFunction& e : tuple.entries) {
        for (double v : e.values()) {
            if (v < 0.0) throw ConfigError("bll_compare: negative entry value");
        }
    }
    BllComparison cmp;
    cmp.value = t_form(tuple, budget);
    SetTuple starred;
    starred.k = tuple.k;
    starred.entries.reserve(tuple.entries.size());
    for (const GridFunction& e : tuple.entries) starred.entries.push_back(radial_rearrangement(e));
    cmp.star_value = t_form(starred, budget);
    return cmp;
}

void SliceProfile::save_tsv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("SliceProfile: cannot open " + path.string());
    out << "radius\tvolume\tstderr\n";
    for (std::size_t i = 0; i < radii.size(); ++i) {
        out << format_g17(radii[i]) << '\t' << format_g17(volumes[i]) << '\t'
            << format_g17(i < stderrs.size() ? stderrs[i] : 0.0) << '\n';
    }
    if (!out) throw ConfigError("SliceProfile: write failed for " + path.string());
}

double slice_volume_closed_form_k2_d1(double radius, double y) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw ConfigError("slice_volume_closed_form_k2_d1: radius must be positive");
    if (!std::isfinite(y)) throw ConfigError("slice_volume_closed_form_k2_d1: y must be finite");
    y = std::abs(y);
    if (y >= 3.0 * radius) return 0.0;  // the integrand's support ends here
    // antiderivative of (2r - |u|)_+ from 0, odd in t
    auto P = [radius](double t) {
        const double s = t < 0.0 ? -1.0 : 1.0;
        const double tc = std::min(std::abs(t), 2.0 * radius);
        return s * (2.0 * radius * tc - 0.5 * tc * tc);
    };
    return std::max(0.0, P(radius - y) + P(radius + y));
}

namespace {

void validate_slice_args(int k, int dim, double radius, std::span<const double> radii) {
    if (k != 2 && k != 3) throw ConfigError("slice_volume_profile: order must be 2 or 3");
    if (dim < 1 || dim > 3) throw ConfigError("slice_volume_profile: dimension must be 1, 2, or 3");
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw ConfigError("slice_volume_profile: ball radius must be positive");
    for (double r : radii) {
        if (!(r >= 0.0) || !std::isfinite(r))
            throw ConfigError("slice_volume_profile: sample radii must be finite and >= 0");
    }
}

/// Lattice midpoints along one axis of the sampling box for offset y_a.
std::vector<double> axis_points(double radius, double ya, int n) {
    std::vector<double> pts(static_cast<std::size_t>(n));
    const double h = 2.0 * radius / n;
    for (int i = 0; i < n; ++i) pts[static_cast<std::size_t>(i)] = -radius - ya + (i + 0.5) * h;
    return pts;
}

struct Point {
    std::array<double, 3> x{0.0, 0.0, 0.0};
};

/// All lattice points of the box that satisfy the singleton constraint.
std::vector<Point> feasible_points(int dim, double radius, const std::array<double, 3>& y,
                                   int n) {
    std::array<std::vector<double>, 3> axes;
    for (int a = 0; a < dim; ++a) axes[a] = axis_points(radius, y[a], n);
    const double r2 = radius * radius;
    std::vector<Point> pts;
    std::array<int, 3> limit{1, 1, 1};
    for (int a = 0; a < dim; ++a) limit[a] = n;
    for (int i0 = 0; i0 < limit[0]; ++i0)
        for (int i1 = 0; i1 < limit[1]; ++i1)
            for (int i2 = 0; i2 < limit[2]; ++i2) {
                Point p;
                if (dim > 0) p.x[0] = axes[0][static_cast<std::size_t>(i0)];
                if (dim > 1) p.x[1] = axes[1][static_cast<std::size_t>(i1)];
                if (dim > 2) p.x[2] = axes[2][static_cast<std::size_t>(i2)];
                double q = 0.0;
                for (int a = 0; a < dim; ++a) {
                    const double c = y[a] + p.x[a];
                    q += c * c;
                }
                if (q <= r2) pts.push_back(p);
            }
    return pts;
}

bool ball_ok(int dim, double r2, const std::array<double, 3>& w) {
    double q = 0.0;
    for (int a = 0; a < dim; ++a) q += w[a] * w[a];
    return q <= r2;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

SliceProfile slice_volume_profile_lattice(int k, int dim, double radius,
                                          std::span<const double> radii, int n_per_axis) {
    validate_slice_args(k, dim, radius, radii);
    if (n_per_axis < 2) throw ConfigError("slice_volume_profile: n_per_axis must be >= 2");
    const double per_radius =
        std::pow(static_cast<double>(n_per_axis), static_cast<double>(k * dim));
    if (per_radius * std::max<std::size_t>(radii.size(), 1) > kDefaultFormBudget) {
        throw BudgetError("slice_volume_profile: lattice cost " +
                          format_g17(per_radius * radii.size()) + " exceeds budget " +
                          format_g17(kDefaultFormBudget));
    }

    SliceProfile prof;
    prof.k = k;
    prof.dim = dim;
    prof.radius = radius;
    prof.estimator = "lattice-sum";
    prof.radii.assign(radii.begin(), radii.end());
    prof.volumes.resize(radii.size(), 0.0);
    prof.stderrs.assign(radii.size(), 0.0);

    const double r2 = radius * radius;
    const double h = 2.0 * radius / n_per_axis;
    double cellvol = 1.0;
    for (int i = 0; i < k * dim; ++i) cellvol *= h;

    for (std::size_t ri = 0; ri < prof.radii.size(); ++ri) {
        const std::array<double, 3> y{prof.radii[ri], 0.0, 0.0};
        const std::vector<Point> pts = feasible_points(dim, radius, y, n_per_axis);
        if (pts.empty()) continue;

        std::vector<std::int64_t> counts(pts.size(), 0);
        parallel_blocks(pts.size(), [&](std::size_t b0, std::size_t b1) {
            for (std::size_t i = b0; i < b1; ++i) {
                const Point& p = pts[i];
                std::int64_t cnt = 0;
                if (k == 2) {
                    std::array<double, 3> base{0.0, 0.0, 0.0};
                    for (int a = 0; a < dim; ++a) base[a] = y[a] + p.x[a];
                    for (const Point& q : pts) {
                        std::array<double, 3> w = base;
                        for (int a = 0; a < dim; ++a) w[a] += q.x[a];
                        if (ball_ok(dim, r2, w)) ++cnt;
                    }
                } else {
                    for (const Point& q : pts) {
                        std::array<double, 3> pq{0.0, 0.0, 0.0};
                        for (int a = 0; a < dim; ++a) pq[a] = y[a] + p.x[a] + q.x[a];
                        if (!ball_ok(dim, r2, pq)) continue;
                        for (const Point& s : pts) {
                            std::array<double, 3> w1{}, w2{}, w3{};
                            bool ok = true;
                            for (int a = 0; a < dim; ++a) {
                                w1[a] = y[a] + p.x[a] + s.x[a];
                                w2[a] = y[a] + q.x[a] + s.x[a];
                                w3[a] = pq[a] + s.x[a];
                            }
                            ok = ball_ok(dim, r2, w1) && ball_ok(dim, r2, w2) &&
                                 ball_ok(dim, r2, w3);
                            if (ok) ++cnt;
                        }
                    }
                }
                counts[i] = cnt;
            }
        });
        std::int64_t total = 0;
        for (std::int64_t c : counts) total += c;
        prof.volumes[ri] = cellvol * static_cast<double>(total);
    }
    return prof;
}

SliceProfile slice_volume_profile_mc(int k, int dim, double radius,
                                     std::span<const double> radii, std::uint64_t seed,
                                     std::int64_t samples) {
    validate_slice_args(k, dim, radius, radii);
    if (samples < 1) throw ConfigError("slice_volume_profile: samples must be >= 1");

    SliceProfile prof;
    prof.k = k;
    prof.dim = dim;
    prof.radius = radius;
    prof.estimator = "monte-carlo";
    prof.seed = seed;
    prof.samples = samples;
    prof.radii.assign(radii.begin(), radii.end());
    prof.volumes.resize(radii.size(), 0.0);
    prof.stderrs.resize(radii.size(), 0.0);

    const double r2 = radius * radius;
    double box_volume = 1.0;
    for (int i = 0; i < k * dim; ++i) box_volume *= 2.0 * radius;

    constexpr std::int64_t kBlock = 65536;
    const std::size_t nblocks =
        static_cast<std::size_t>((samples + kBlock - 1) / kBlock);

    // constraint masks with at least two participating shifts
    std::vector<unsigned> cross;
    for (unsigned a = 1; a < (1u << k); ++a) {
        if ((a & (a - 1)) != 0) cross.push_back(a);
    }

    for (std::size_t ri = 0; ri < prof.radii.size(); ++ri) {
        const std::array<double, 3> y{prof.radii[ri], 0.0, 0.0};
        std::vector<std::int64_t> accepts(nblocks, 0);
        parallel_blocks(nblocks, [&](std::size_t b0, std::size_t b1) {
            for (std::size_t b = b0; b < b1; ++b) {
                std::uint64_t state = seed;
                (void)splitmix64(state);
                state ^= (static_cast<std::uint64_t>(ri) << 32) ^ static_cast<std::uint64_t>(b);
                std::mt19937_64 rng(splitmix64(state));
                const std::int64_t lo = static_cast<std::int64_t>(b) * kBlock;
                const std::int64_t hi = std::min(samples, lo + kBlock);
                std::int64_t acc = 0;
                std::array<std::array<double, 3>, 3> x{};
                for (std::int64_t s = lo; s < hi; ++s) {
                    for (int v = 0; v < k; ++v)
                        for (int a = 0; a < dim; ++a) {
                            const double u =
                                static_cast<double>(rng() >> 11) * 0x1.0p-53;
                            x[static_cast<std::size_t>(v)][static_cast<std::size_t>(a)] =
                                -radius - y[a] + 2.0 * radius * u;
                        }
                    bool ok = true;
                    for (int v = 0; v < k && ok; ++v) {
                        std::array<double, 3> w{};
                        for (int a = 0; a < dim; ++a)
                            w[a] = y[a] + x[static_cast<std::size_t>(v)][a];
                        ok = ball_ok(dim, r2, w);
                    }
                    for (std::size_t ci = 0; ci < cross.size() && ok; ++ci) {
                        std::array<double, 3> w{};
                        for (int a = 0; a < dim; ++a) w[a] = y[a];
                        for (int v = 0; v < k; ++v) {
                            if (cross[ci] & (1u << v)) {
                                for (int a = 0; a < dim; ++a)
                                    w[a] += x[static_cast<std::size_t>(v)][a];
                            }
                        }
                        ok = ball_ok(dim, r2, w);
                    }
                    if (ok) ++acc;
                }
                accepts[b] = acc;
            }
        });
        std::int64_t total = 0;
        for (std::int64_t a : accepts) total += a;
        const double p = static_cast<double>(total) / static_cast<double>(samples);
        prof.volumes[ri] = box_volume * p;
        prof.stderrs[ri] =
            box_volume * std::sqrt(std::max(0.0, p * (1.0 - p) / static_cast<double>(samples)));
    }
    return prof;
}

SliceProfile slice_volume_profile(int k, int dim, double radius, std::span<const double> radii,
                                  std::uint64_t seed, std::int64_t samples) {
    validate_slice_args(k, dim, radius, radii);
    if (k == 2 && dim <= 2) {
        return slice_volume_profile_lattice(k, dim, radius, radii, dim == 1 ? 4096 : 96);
    }
    return slice_volume_profile_mc(k, dim, radius, radii, seed,
                                   std::max<std::int64_t>(samples, 1000000));
}

}  // namespace gwrs
