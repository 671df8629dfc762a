// Acceptance battery: eleven numbered criteria, one PASS/FAIL line each,
// nonzero exit when anything fails. Frozen reference constants (the
// equality-gap floors and the exceptional-set constant) are read from
// fixtures/frozen.json; run with --calibrate to remeasure them and print
// suggested values instead of gating. --only 3,7 restricts the run.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gwrs/autocorr.hpp"
#include "gwrs/common.hpp"
#include "gwrs/gowers.hpp"
#include "gwrs/grid.hpp"
#include "gwrs/multilinear.hpp"
#include "gwrs/profile.hpp"
#include "gwrs/rearrange.hpp"
#include "gwrs/shapes.hpp"
#include "gwrs/stability.hpp"
#include "json.hpp"
#include "support.hpp"

namespace {

using namespace gwrs;
using gwrs::testing::random_density;
using gwrs::testing::random_indicator;
using gwrs::testing::runif;
using nlohmann::json;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string sci(double x) {
    std::ostringstream o;
    o.setf(std::ios::scientific);
    o.precision(2);
    o << x;
    return o.str();
}

std::string fix(double x, int prec = 1) {
    std::ostringstream o;
    o.setf(std::ios::fixed);
    o.precision(prec);
    o << x;
    return o.str();
}

struct Ctx {
    bool calibrate = false;
    json frozen;
    json measured;
};

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& why) {
        if (!ok) {
            pass = false;
            detail += " [violated: " + why + "]";
        }
    }
};

Mat diag2(double a, double b) {
    Mat m{};
    m[0][0] = a;
    m[1][1] = b;
    m[2][2] = 1.0;
    return m;
}

// ---------------------------------------------------------------- 1
// gamma constants against the 1-d closed forms, each estimate timed.
Outcome criterion1(Ctx&) {
    Outcome out;
    std::ostringstream d;
    for (int dim = 1; dim <= 3; ++dim) {
        GammaEstimate g1 = gamma_estimate(1, dim);
        out.require(g1.value == 1.0, "gamma(1," + std::to_string(dim) + ") != 1");
    }
    d << "gamma(1,d)=1 exact";

    struct Row {
        int k;
        double target;
        double tol;
    };
    const std::array<Row, 3> rows{{{2, 2.0 / 3.0, 1e-3}, {3, 1.0 / 3.0, 5e-3}, {4, 2.0 / 15.0, 5e-3}}};
    for (const Row& r : rows) {
        out.require(std::abs(gamma_closed_form_1d(r.k) - r.target) < 1e-15, "closed-form recursion");
        const auto t0 = Clock::now();
        GammaEstimate g = gamma_estimate(r.k, 1);
        const double dt = since(t0);
        const double err = g.value - r.target;
        d << "; gamma(" << r.k << ",1) err " << sci(err) << " (" << fix(dt) << " s)";
        out.require(std::abs(err) <= r.tol, "gamma(" + std::to_string(r.k) + ",1) off by " + sci(err));
        out.require(g.n_fine <= 4096, "resolution above 4096");
        out.require(dt < 60.0, "estimate exceeded 60 s");
    }
    out.detail = d.str() + out.detail;
    return out;
}

// ---------------------------------------------------------------- 2
// recursive order-2 evaluation against the spectral identity.
Outcome criterion2(Ctx&) {
    Outcome out;
    const auto t0 = Clock::now();
    double worst = 0.0;
    auto trial = [&](const GridFunction& f) {
        const double a = gowers_norm(f, 2).power_value;
        const double b = u2_via_fourier(f).power_value;
        worst = std::max(worst, std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}));
    };
    for (int i = 0; i < 5; ++i) trial(random_density(GridSpec(1, 256, 1.0), 1100 + i));
    for (int i = 0; i < 5; ++i) trial(random_indicator(GridSpec(1, 256, 1.0), 1200 + i));
    for (int i = 0; i < 5; ++i) trial(random_density(GridSpec(2, 64, 1.0), 1300 + i));
    for (int i = 0; i < 5; ++i) trial(random_indicator(GridSpec(2, 64, 1.0), 1400 + i));
    const double dt = since(t0);
    out.detail = "max relative gap " + sci(worst) + " over 20 functions (" + fix(dt) + " s)";
    out.require(worst <= 1e-9, "methods disagree beyond 1e-9");
    out.require(dt < 30.0, "ran over 30 s");
    return out;
}

// ---------------------------------------------------------------- 3
// greedy bathtub maximizer against the cumulative of the rearrangement.
Outcome criterion3(Ctx&) {
    Outcome out;
    const auto t0 = Clock::now();
    double worst = 0.0;
    int fn = 0;
    auto trial = [&](const GridFunction& g) {
        const Profile1D f_star = rearrangement_1d(g);
        const Profile1D F = cumulative_F(f_star);
        const double total = measure(g);
        std::mt19937_64 rng(9000 + fn);
        for (int j = 0; j < 10; ++j) {
            const double t = runif(rng) * 1.2 * total;
            const double a = bathtub_oracle(g, t);
            const double b = F.value_at(t);
            worst = std::max(worst, std::abs(a - b) / std::max({a, b, 1e-300}));
        }
        ++fn;
    };
    for (int i = 0; i < 15; ++i) trial(random_density(GridSpec(1, 128, 1.0), 3100 + i));
    for (int i = 0; i < 15; ++i) trial(random_indicator(GridSpec(1, 128, 1.0), 3200 + i));
    for (int i = 0; i < 10; ++i) trial(random_density(GridSpec(2, 32, 1.0), 3300 + i));
    for (int i = 0; i < 10; ++i) trial(random_indicator(GridSpec(2, 32, 1.0), 3400 + i));
    const double dt = since(t0);
    out.detail = "max relative gap " + sci(worst) + " over 50 functions x 10 levels (" + fix(dt) + " s)";
    out.require(worst <= 1e-12, "bathtub and cumulative disagree beyond 1e-12");
    out.require(dt < 10.0, "ran over 10 s");
    return out;
}

// ---------------------------------------------------------------- 4
// interpolation chain: monotone terms, sandwiched powers, flat for ellipsoids.
Outcome criterion4(Ctx&) {
    Outcome out;
    const auto t0 = Clock::now();

    struct Combo {
        int k, dim, n, count;
    };
    const std::array<Combo, 4> combos{{{2, 1, 512, 13}, {3, 1, 512, 12}, {2, 2, 96, 13}, {3, 2, 64, 12}}};
    double worst_violation = 0.0;
    int sandwich_failures = 0;
    int sets = 0;
    for (const Combo& c : combos) {
        const GridSpec grid(c.dim, c.n, 1.0);
        std::uint64_t seed = 4000u + 100u * static_cast<std::uint64_t>(c.k * 10 + c.dim);
        for (int i = 0; i < c.count; ++i) {
            GridFunction e = superlevel_set(random_set(RandomModel::boxes, c.dim, seed++, grid).raster, 0.5);
            while (measure(e) <= 0.0)
                e = superlevel_set(random_set(RandomModel::boxes, c.dim, seed++, grid).raster, 0.5);
            const ChainReport rep = chain_report(e, c.k);
            worst_violation = std::max(worst_violation, rep.max_monotone_violation());
            if (!(rep.lhs <= rep.terms.front() + rep.tol)) ++sandwich_failures;
            if (!(rep.terms.back() <= rep.rhs + rep.tol)) ++sandwich_failures;
            ++sets;
        }
    }

    Mat shear{};
    shear[0][0] = 1.0;
    shear[0][1] = 0.45;
    shear[1][1] = 1.0;
    shear[2][2] = 1.0;
    struct EllCase {
        ShapeSpec shape;
        int dim, n;
    };
    const std::vector<EllCase> ellipsoids{
        {ShapeSpec::ball(1, {0.15, 0.0, 0.0}, 0.5), 1, 1024},
        {ShapeSpec::ball(2, {0.1, -0.06, 0.0}, 0.45), 2, 128},
        {ShapeSpec::ellipsoid(2, {0.12, -0.07, 0.0}, diag2(1.0 / 0.5625, 1.0 / 0.1225)), 2, 128},
        {apply_affine(ShapeSpec::ellipsoid(2, {0.0, 0.0, 0.0}, diag2(1.0 / 0.36, 1.0 / 0.16)),
                      AffineMap::linear_map(2, shear)),
         2, 128},
    };
    double worst_spread = 0.0;
    for (const EllCase& ec : ellipsoids) {
        for (int k : {2, 3}) {
            const ChainReport rep = chain_report_for_shape(ec.shape, GridSpec(ec.dim, ec.n, 1.0), k);
            worst_spread = std::max(worst_spread, rep.spread());
        }
    }
    const double dt = since(t0);
    out.detail = "max monotone violation " + sci(worst_violation) + " over " + std::to_string(sets) +
                 " sets; sandwich failures " + std::to_string(sandwich_failures) +
                 "; ellipsoid chain spread " + sci(worst_spread) + " (" + fix(dt) + " s)";
    out.require(worst_violation <= 1e-8, "chain not monotone within 1e-8");
    out.require(sandwich_failures == 0, "sandwich inequality failed");
    out.require(worst_spread < 1e-6, "ellipsoid chain spread above 1e-6");
    out.require(dt < 300.0, "ran over 5 min");
    return out;
}

// ---------------------------------------------------------------- 5
// symmetrization never lowers the power; rearranged tuples dominate.
Outcome criterion5(Ctx& ctx) {
    Outcome out;
    const auto t0 = Clock::now();

    double worst_norm = -1.0;  // signed relative excess of the set over its star
    auto pair_trial = [&](const GridFunction& e, int k) {
        const double set_power = gowers_norm(e, k).power_value;
        const double star_power = gowers_norm(radial_rearrangement(e), k).power_value;
        worst_norm = std::max(worst_norm, (set_power - star_power) / std::max(star_power, 1e-300));
    };
    for (int i = 0; i < 6; ++i) {
        const GridSpec g1(1, 256, 1.0);
        pair_trial(superlevel_set(random_set(RandomModel::boxes, 1, 5100 + i, g1).raster, 0.5), 2);
        pair_trial(superlevel_set(random_set(RandomModel::boxes, 1, 5200 + i, g1).raster, 0.5), 3);
    }
    for (int i = 0; i < 6; ++i) {
        pair_trial(superlevel_set(
                       random_set(RandomModel::boxes, 2, 5300 + i, GridSpec(2, 96, 1.0)).raster, 0.5),
                   2);
        pair_trial(superlevel_set(
                       random_set(RandomModel::boxes, 2, 5400 + i, GridSpec(2, 64, 1.0)).raster, 0.5),
                   3);
    }
    for (int i = 0; i < 4; ++i) {
        pair_trial(random_set(RandomModel::perturbed_ellipsoid, 2, 5500 + i, GridSpec(2, 96, 1.0), 0.12)
                       .raster,
                   2);
    }

    double worst_bll = -1.0;
    const GridSpec tg(1, 64, 1.0);
    for (int i = 0; i < 20; ++i) {
        SetTuple tuple;
        tuple.k = 2;
        for (int j = 0; j < 4; ++j)
            tuple.entries.push_back(random_indicator(tg, 5600 + 4 * i + j, 0.35));
        const BllComparison cmp = bll_compare(tuple);
        worst_bll = std::max(worst_bll, (cmp.value - cmp.star_value) / std::max(1.0, cmp.star_value));
    }
    const double dt = since(t0);
    if (ctx.calibrate) {
        ctx.measured["criterion5"] = {{"worst_norm_excess", worst_norm}, {"worst_bll_excess", worst_bll}};
    }
    out.detail = "max set-over-star excess " + sci(worst_norm) + " on 28 sets; max tuple excess " +
                 sci(worst_bll) + " on 20 four-tuples (" + fix(dt) + " s)";
    out.require(worst_norm <= 1e-8, "rearrangement lowered a power beyond slack");
    out.require(worst_bll <= 1e-12, "rearranged tuple lost to the raw tuple");
    out.require(dt < 120.0, "ran over 2 min");
    return out;
}

// ---------------------------------------------------------------- 6
// equality gap: ellipsoids near zero, catalog non-ellipsoids above a
// frozen floor that survives grid refinement.
Outcome criterion6(Ctx& ctx) {
    Outcome out;
    const auto t0 = Clock::now();

    auto delta_of = [&](const ShapeSpec& shape, int dim, int n, double extent) {
        const GridFunction raster = rasterize(shape, GridSpec(dim, n, extent));
        const double m = measure(raster);
        const double power = u2_via_fourier(raster).power_value;
        const double gamma = gamma_estimate(2, dim).value;
        return 1.0 - power / (gamma * m * m * m);
    };

    Mat shear{};
    shear[0][0] = 1.0;
    shear[0][1] = 0.45;
    shear[1][1] = 1.0;
    shear[2][2] = 1.0;
    struct Ell {
        const char* name;
        ShapeSpec shape;
        int dim, n;
        double extent;
    };
    const std::vector<Ell> ells{
        {"interval", ShapeSpec::ball(1, {0.0, 0.0, 0.0}, 0.5), 1, 1024, 1.0},
        {"disc", ShapeSpec::ball(2, {0.0, 0.0, 0.0}, 0.5), 2, 128, 1.0},
        {"ellipse", ShapeSpec::ellipsoid(2, {0.12, -0.07, 0.0}, diag2(1.0 / 0.5625, 1.0 / 0.1225)), 2,
         128, 1.0},
        {"sheared", apply_affine(ShapeSpec::ellipsoid(2, {0.0, 0.0, 0.0}, diag2(1.0 / 0.36, 1.0 / 0.16)),
                    AffineMap::linear_map(2, shear)), 2, 128, 1.0},
        {"ball3", ShapeSpec::ball(3, {0.0, 0.0, 0.0}, 0.45), 3, 64, 1.0},
    };
    double worst_ell = 0.0;
    for (const Ell& e : ells) {
        for (int n : {e.n, 2 * e.n}) {
            const double delta = delta_of(e.shape, e.dim, n, e.extent);
            worst_ell = std::max(worst_ell, delta / (5.0 * tol_disc(2, e.dim, n)));
            out.require(delta <= 5.0 * tol_disc(2, e.dim, n),
                        std::string(e.name) + " delta above 5*tol_disc at n=" + std::to_string(n));
        }
    }

    const double two_r = std::sqrt(0.5 / std::numbers::pi);
    struct NonEll {
        const char* name;
        ShapeSpec shape;
    };
    const std::vector<NonEll> cat{
        {"two_balls", ShapeSpec::union_of({ShapeSpec::ball(2, {-0.8, 0.0, 0.0}, two_r),
                                           ShapeSpec::ball(2, {0.8, 0.0, 0.0}, two_r)})},
        {"square", ShapeSpec::box(2, {-0.5, -0.5, 0.0}, {0.5, 0.5, 0.0})},
        {"annulus", ShapeSpec::difference(ShapeSpec::ball(2, {0.0, 0.0, 0.0}, 0.65),
                                          ShapeSpec::ball(2, {0.0, 0.0, 0.0}, 0.32279))},
        {"l_shape", ShapeSpec::union_of({ShapeSpec::box(2, {-0.75, -0.75, 0.0}, {0.75, -0.25, 0.0}),
                                         ShapeSpec::box(2, {-0.75, -0.25, 0.0}, {-0.25, 0.75, 0.0})})},
    };
    std::ostringstream d;
    d << "ellipsoid delta <= " << fix(100.0 * worst_ell) << "% of allowance;";
    json floors;
    for (const NonEll& s : cat) {
        const double d1 = delta_of(s.shape, 2, 128, 2.0);
        const double d2 = delta_of(s.shape, 2, 256, 2.0);
        d << " " << s.name << " " << sci(d1) << "/" << sci(d2);
        out.require(d2 >= 0.8 * d1, std::string(s.name) + " delta fell by 20% under refinement");
        if (ctx.calibrate) {
            floors[s.name] = 0.5 * std::min(d1, d2);
        } else {
            const double floor = ctx.frozen.at("criterion6").at("floors").at(s.name).get<double>();
            out.require(std::min(d1, d2) > floor,
                        std::string(s.name) + " delta at or below the frozen floor " + sci(floor));
        }
    }
    if (ctx.calibrate) ctx.measured["criterion6"] = {{"floors", floors}};
    const double dt = since(t0);
    out.detail = d.str() + " (" + fix(dt) + " s)";
    return out;
}

// ---------------------------------------------------------------- 7
// stability sweep: distance to the fitted ellipsoid tracks the deficit.
Outcome criterion7(Ctx&) {
    Outcome out;
    const auto t0 = Clock::now();
    const std::vector<double> amplitudes{0.05, 0.15, 0.30, 0.45};
    std::vector<std::uint64_t> seeds(10);
    std::iota(seeds.begin(), seeds.end(), 101u);
    const std::vector<StabilityRecord> records =
        stability_sweep(2, 2, GridSpec(2, 256, 1.0), amplitudes, seeds);

    std::vector<double> deltas, epsilons;
    for (const StabilityRecord& r : records) {
        deltas.push_back(r.delta);
        epsilons.push_back(r.epsilon);
    }
    const double rho = spearman_correlation(deltas, epsilons);

    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return deltas[a] < deltas[b]; });
    std::array<double, 4> bin_mean{};
    for (std::size_t i = 0; i < order.size(); ++i)
        bin_mean[i / 10] += epsilons[order[i]] / 10.0;
    bool nondecreasing = true;
    for (int b = 0; b + 1 < 4; ++b)
        if (bin_mean[b + 1] < bin_mean[b] - 1e-12) nondecreasing = false;

    const double dt = since(t0);
    std::ostringstream d;
    d << "Spearman " << fix(rho, 3) << " over 40 records; binned epsilon";
    for (double m : bin_mean) d << " " << fix(m, 4);
    out.detail = d.str() + " (" + fix(dt) + " s)";
    out.require(rho > 0.8, "rank correlation at or below 0.8");
    out.require(nondecreasing, "binned epsilon not nondecreasing");
    out.require(dt < 900.0, "ran over 15 min");
    return out;
}

// ---------------------------------------------------------------- 8
// exceptional shift set: empty for balls, sqrt-delta small for the family.
Outcome criterion8(Ctx& ctx) {
    Outcome out;
    const auto t0 = Clock::now();
    std::vector<double> deltas;
    for (int i = 0; i <= 8; ++i) deltas.push_back(std::ldexp(1.0, -i));

    double ball_bad = 0.0;
    const GridFunction ball1 = matched_ball_raster(1, 1.0, GridSpec(1, 1024, 1.0));
    const GridFunction ball2 = matched_ball_raster(2, 1.0, GridSpec(2, 256, 1.0));
    for (double delta : deltas) {
        ball_bad = std::max(ball_bad, exceptional_measure(ball1, 2, 0.25, 1.75, delta).mu_bad);
        ball_bad = std::max(ball_bad, exceptional_measure(ball2, 2, 0.25, 3.75, delta).mu_bad);
    }
    out.require(ball_bad == 0.0, "ball has a nonempty exceptional set");

    // same family as the stability sweep: 4 amplitudes x 10 seeds at n=256
    double worst_ratio = 0.0;
    const GridSpec grid(2, 256, 1.0);
    for (double amp : {0.05, 0.15, 0.30, 0.45}) {
        for (std::uint64_t seed = 101; seed <= 110; ++seed) {
            const GridFunction e =
                random_set(RandomModel::perturbed_ellipsoid, 2, seed, grid, amp).raster;
            for (double delta : deltas)
                worst_ratio = std::max(worst_ratio, exceptional_measure(e, 2, 0.25, 3.75, delta).ratio);
        }
    }
    if (ctx.calibrate) {
        // the positive floor keeps the frozen constant meaningful when the
        // whole family measures zero; one exceptional autocorr cell at this
        // grid carries ~6e-5, so the floor cannot hide a real failure
        ctx.measured["criterion8"] = {{"c_frozen", std::max(1.25 * worst_ratio, 1e-6)}};
    } else {
        const double c_frozen = ctx.frozen.at("criterion8").at("c_frozen").get<double>();
        out.require(worst_ratio <= c_frozen,
                    "mu_bad / sqrt(delta) = " + sci(worst_ratio) + " above the frozen constant");
    }
    const double dt = since(t0);
    out.detail = "balls empty at 9 dyadic deltas; family max mu_bad/sqrt(delta) " + sci(worst_ratio) +
                 " over 40 sets (" + fix(dt) + " s)";
    out.require(dt < 600.0, "ran over 10 min");
    return out;
}

// ---------------------------------------------------------------- 9
// slice volumes of the constraint body for the unit-measure 1-d ball.
Outcome criterion9(Ctx&) {
    Outcome out;
    const auto t0 = Clock::now();
    const double r = 0.5;  // |B| = 1 in one dimension
    const int npa = 4096;

    const std::vector<double> origin{0.0};
    const double L0 = slice_volume_profile_lattice(2, 1, r, origin, npa).volumes.front();
    out.require(std::abs(L0 - 0.75) <= 2e-3, "L(0) off by " + sci(L0 - 0.75));

    std::vector<double> mids(64);
    for (int i = 0; i < 64; ++i) mids[static_cast<std::size_t>(i)] = (i + 0.5) * r / 64.0;
    const SliceProfile mid_prof = slice_volume_profile_lattice(2, 1, r, mids, npa);
    double integral = 0.0;
    for (double v : mid_prof.volumes) integral += v * (r / 64.0) * 2.0;
    out.require(std::abs(integral - 2.0 / 3.0) <= 5e-3,
                "integral over B off by " + sci(integral - 2.0 / 3.0));

    std::vector<double> samples(8);
    for (int j = 0; j < 8; ++j) samples[static_cast<std::size_t>(j)] = j * r / 8.0;
    const SliceProfile lat = slice_volume_profile_lattice(2, 1, r, samples, npa);
    for (int j = 0; j + 1 < 8; ++j)
        out.require(lat.volumes[j] > lat.volumes[j + 1], "lattice profile not strictly decreasing");

    const SliceProfile mc = slice_volume_profile_mc(2, 1, r, samples, 777, 1000000);
    for (int j = 0; j + 1 < 8; ++j) {
        const double se = std::hypot(mc.stderrs[j], mc.stderrs[j + 1]);
        out.require(mc.volumes[j] - mc.volumes[j + 1] > 2.0 * se,
                    "sampled decrease within 2 standard errors");
    }

    double worst_logc = 1e300;
    for (int step = 1; step <= 3; ++step) {
        for (int i = 0; i + 2 * step < 8; ++i) {
            const double lhs = lat.volumes[i + step] * lat.volumes[i + step];
            const double rhs = lat.volumes[i] * lat.volumes[i + 2 * step];
            worst_logc = std::min(worst_logc, lhs / rhs - 1.0);
            out.require(lhs >= rhs * (1.0 - 1e-9), "log-concavity midpoint inequality failed");
        }
    }
    const double dt = since(t0);
    out.detail = "L(0) err " + sci(L0 - 0.75) + "; integral err " + sci(integral - 2.0 / 3.0) +
                 "; min midpoint margin " + sci(worst_logc) + " (" + fix(dt) + " s)";
    out.require(dt < 300.0, "ran over 5 min");
    return out;
}

// ---------------------------------------------------------------- 10
// comparison measure: exact density in one dimension, unit total masses.
Outcome criterion10(Ctx&) {
    Outcome out;
    const MuMeasure mu = mu_density(1, 2, 1.0);
    const Profile1D dens = mu.density_profile();
    out.require(dens.kind() == ProfileKind::step, "density is not a step profile");
    out.require(dens.knots().size() == 2 && dens.knots()[0] == 0.0 && dens.knots()[1] == 2.0,
                "density knots are not {0, 2}");
    out.require(dens.knot_values()[0] == 0.5 && dens.knot_values()[1] == 0.0,
                "density is not exactly 1/2 on (0, 2)");
    out.require(mu.density_at(1.0) == 0.5, "pointwise density differs from 1/2");

    double worst = 0.0;
    for (int dim = 1; dim <= 3; ++dim)
        for (int k : {2, 3, 4})
            worst = std::max(worst, std::abs(mu_density(dim, k, 1.0).mass() - 1.0));
    out.detail = "density exactly 1/2 on (0,2); max unit-mass error " + sci(worst) +
                 " over k in {2,3,4}, d in {1,2,3}";
    out.require(worst <= 1e-6, "total mass misses the k-th power law");
    return out;
}

// ---------------------------------------------------------------- 11
// affine invariance of the normalized ratio under unimodular shears.
Outcome criterion11(Ctx&) {
    Outcome out;
    const auto t0 = Clock::now();
    const GridSpec grid(2, 512, 1.0);
    const ShapeSpec base = ShapeSpec::ellipsoid(2, {0.0, 0.0, 0.0}, diag2(1.0 / 0.49, 1.0 / 0.25));
    const double r0 = normalized_ratio(rasterize(base, grid), 2);

    std::mt19937_64 rng(11011);
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
        const double s = (2.0 * runif(rng) - 1.0) * 0.45;
        const double t = (2.0 * runif(rng) - 1.0) * 0.45;
        Mat upper{};
        upper[0][0] = 1.0;
        upper[0][1] = s;
        upper[1][1] = 1.0;
        upper[2][2] = 1.0;
        Mat lower{};
        lower[0][0] = 1.0;
        lower[1][0] = t;
        lower[1][1] = 1.0;
        lower[2][2] = 1.0;
        const AffineMap map =
            AffineMap::linear_map(2, upper).after(AffineMap::linear_map(2, lower));
        const ShapeSpec sheared = apply_affine(base, map);
        const double ri = normalized_ratio(rasterize(sheared, grid), 2);
        worst = std::max(worst, std::abs(ri - r0) / r0);
    }
    const double dt = since(t0);
    out.detail = "max ratio drift " + sci(worst) + " over 5 unimodular shears at n=512 (" + fix(dt) +
                 " s)";
    out.require(worst <= 1e-2, "normalized ratio drifted beyond 1e-2");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    Ctx ctx;
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--calibrate") {
            ctx.calibrate = true;
        } else if (arg == "--only" && i + 1 < argc) {
            std::istringstream list(argv[++i]);
            std::string tok;
            while (std::getline(list, tok, ',')) only.insert(std::stoi(tok));
        } else {
            std::cerr << "usage: gwrs_acceptance [--calibrate] [--only N,M,...]\n";
            return 2;
        }
    }
    if (!ctx.calibrate) {
        std::ifstream in(gwrs::testing::fixture_dir() / "frozen.json");
        if (!in) {
            std::cerr << "missing fixtures/frozen.json; run with --calibrate to generate values\n";
            return 2;
        }
        in >> ctx.frozen;
    }

    using Fn = std::function<Outcome(Ctx&)>;
    const std::vector<std::pair<int, Fn>> battery{
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
        {5, criterion5}, {6, criterion6}, {7, criterion7}, {8, criterion8},
        {9, criterion9}, {10, criterion10}, {11, criterion11},
    };

    int failures = 0;
    int ran = 0;
    for (const auto& [id, fn] : battery) {
        if (!only.empty() && !only.count(id)) continue;
        Outcome o;
        try {
            o = fn(ctx);
        } catch (const std::exception& ex) {
            o.pass = false;
            o.detail = std::string("exception: ") + ex.what();
        }
        ++ran;
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << o.detail
                  << std::endl;
    }
    std::cout << "acceptance: " << (ran - failures) << "/" << ran << " criteria passed" << std::endl;
    if (ctx.calibrate && !ctx.measured.empty())
        std::cout << "suggested frozen.json:\n" << ctx.measured.dump(2) << std::endl;
    return failures == 0 ? 0 : 1;
}
