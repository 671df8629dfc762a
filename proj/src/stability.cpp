#include "gwrs/stability.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gwrs/autocorr.hpp"
#include "gwrs/common.hpp"
#include "gwrs/profile.hpp"
#include "gwrs/rearrange.hpp"

namespace gwrs {

ShapeSpec EllipsoidFit::spec() const { return ShapeSpec::ellipsoid(dim, center, matrix); }

EllipsoidFit fit_ellipsoid(const GridFunction& e) {
    const int d = e.spec().dim();
    const double m = measure(e);
    if (m <= 0.0) throw ConfigError("fit_ellipsoid: input has zero measure");

    const auto vals = e.values();
    double wsum = 0.0;
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (vals[i] == 0.0) continue;
        const std::array<double, 3> x = e.cell_center(i);
        wsum += vals[i];
        for (int a = 0; a < d; ++a) c(a) += vals[i] * x[a];
    }
    c /= wsum;

    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (vals[i] == 0.0) continue;
        const std::array<double, 3> x = e.cell_center(i);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                sigma(a, b) += vals[i] * (x[a] - c(a)) * (x[b] - c(b));
    }
    sigma /= wsum;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    const Eigen::VectorXd lam = es.eigenvalues();
    if (!(lam.minCoeff() > 1e-14 * std::max(lam.maxCoeff(), 1e-300)))
        throw ConfigError("fit_ellipsoid: measure-zero thickness");

    // uniform mass on { x^T A x <= 1 } has covariance A^{-1} / (d + 2)
    Eigen::MatrixXd a0 = Eigen::MatrixXd::Zero(d, d);
    double det_sigma = 1.0;
    for (int i = 0; i < d; ++i) {
        a0 += es.eigenvectors().col(i) * es.eigenvectors().col(i).transpose() /
              ((d + 2) * lam(i));
        det_sigma *= lam(i);
    }
    const double vol0 = unit_ball_volume(d) *
                        std::pow(static_cast<double>(d + 2), 0.5 * d) * std::sqrt(det_sigma);
    const double scale = std::pow(vol0 / m, 2.0 / d);

    EllipsoidFit fit;
    fit.dim = d;
    for (int a = 0; a < d; ++a) fit.center[a] = c(a);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) fit.matrix[a][b] = a0(a, b) * scale;
    return fit;
}

double symmetric_difference_ratio(const GridFunction& e, const EllipsoidFit& fit) {
    const double m = measure(e);
    if (m <= 0.0) throw ConfigError("symmetric_difference_ratio: input has zero measure");
    const GridFunction raster =
        rasterize(fit.spec(), e.spec(), RasterMode::fractional, 4, false);
    return symmetric_difference(e, raster) / m;
}

namespace {

bool positive_definite(const Mat& m, int d) {
    // leading principal minors, d <= 3
    if (!(m[0][0] > 0.0)) return false;
    if (d >= 2) {
        if (!(m[0][0] * m[1][1] - m[0][1] * m[1][0] > 0.0)) return false;
    }
    if (d >= 3) {
        const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        if (!(det > 0.0)) return false;
    }
    return true;
}

}  // namespace

EllipsoidFit refine_fit(const GridFunction& e, const EllipsoidFit& init, int sweeps) {
    if (sweeps < 0) throw ConfigError("refine_fit: sweeps must be >= 0");
    const int d = init.dim;
    EllipsoidFit best = init;
    double best_obj = symmetric_difference_ratio(e, best);

    double center_step = e.spec().cell_width();
    double trace = 0.0;
    for (int a = 0; a < d; ++a) trace += init.matrix[a][a];
    double matrix_step = 0.05 * trace / d;

    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (int a = 0; a < d; ++a) {
            for (double sgn : {1.0, -1.0}) {
                EllipsoidFit trial = best;
                trial.center[a] += sgn * center_step;
                const double obj = symmetric_difference_ratio(e, trial);
                if (obj < best_obj) {
                    best = trial;
                    best_obj = obj;
                }
            }
        }
        for (int a = 0; a < d; ++a)
            for (int b = a; b < d; ++b) {
                for (double sgn : {1.0, -1.0}) {
                    EllipsoidFit trial = best;
                    trial.matrix[a][b] += sgn * matrix_step;
                    trial.matrix[b][a] = trial.matrix[a][b];
                    if (!positive_definite(trial.matrix, d)) continue;
                    const double obj = symmetric_difference_ratio(e, trial);
                    if (obj < best_obj) {
                        best = trial;
                        best_obj = obj;
                    }
                }
            }
        center_step *= 0.5;
        matrix_step *= 0.5;
    }
    return best;
}

std::vector<StabilityRecord> stability_sweep(int dim, int k, const GridSpec& grid,
                                             std::span<const double> amplitudes,
                                             std::span<const std::uint64_t> seeds,
                                             bool refine, double budget) {
    if (grid.dim() != dim) throw ConfigError("stability_sweep: grid dimension mismatch");
    if (k < 1) throw ConfigError("stability_sweep: order k must be >= 1");
    for (double a : amplitudes) {
        if (!(a >= 0.0) || !std::isfinite(a))
            throw ConfigError("stability_sweep: amplitudes must be finite and >= 0");
    }
    const double gamma = gamma_estimate(k, dim, budget).value;

    const std::size_t total = amplitudes.size() * seeds.size();
    std::vector<StabilityRecord> records(total);
    parallel_blocks(total, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t idx = lo; idx < hi; ++idx) {
            const std::size_t ai = idx / seeds.size();
            const std::size_t si = idx % seeds.size();
            StabilityRecord rec;
            rec.seed = seeds[si];
            rec.amplitude = amplitudes[ai];
            rec.k = k;
            rec.dim = dim;
            rec.n = grid.cells();

            const RandomSet rs = random_set(RandomModel::perturbed_ellipsoid, dim,
                                            rec.seed, grid, rec.amplitude);
            const GridFunction& e = rs.raster;
            rec.measure = measure(e);
            rec.power_value = gowers_norm(e, k, budget).power_value;
            rec.gamma_ref = gamma;
            rec.delta_raw =
                1.0 - rec.power_value /
                          (gamma * std::pow(rec.measure, static_cast<double>(k + 1)));
            rec.delta = std::clamp(rec.delta_raw, 0.0, 1.0);
            rec.fit = fit_ellipsoid(e);
            if (refine) rec.fit = refine_fit(e, rec.fit);
            rec.epsilon = symmetric_difference_ratio(e, rec.fit);
            records[idx] = rec;
        }
    });
    return records;
}

namespace {

std::vector<double> average_ranks(std::span<const double> xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;  // average of 1-based ranks
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman_correlation(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw ConfigError("spearman_correlation: length mismatch");
    if (xs.size() < 2) throw ConfigError("spearman_correlation: need at least two points");
    const std::vector<double> rx = average_ranks(xs);
    const std::vector<double> ry = average_ranks(ys);
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0)
        throw ConfigError("spearman_correlation: constant input has no rank correlation");
    return sxy / std::sqrt(sxx * syy);
}

ExceptionalSetReport exceptional_measure(const GridFunction& e, int k, double j_lo, double j_hi,
                                         double delta, TildeSource tilde) {
    const int d = e.spec().dim();
    if (k < 2) throw ConfigError("exceptional_measure: order k must be >= 2");
    if (!(delta > 0.0) || !(delta <= 1.0) || !std::isfinite(delta))
        throw ConfigError("exceptional_measure: delta must lie in (0, 1]");
    const double top = std::ldexp(1.0, d);  // 2^d after unit normalization
    if (!(j_lo > 0.0) || !(j_hi < top) || !(j_lo < j_hi))
        throw ConfigError("exceptional_measure: J outside (0, 2^d)");
    const double m = measure(e);
    if (m <= 0.0) throw ConfigError("exceptional_measure: input has zero measure");

    const Autocorrelation ac = autocorrelation(e);
    const Profile1D f_star = rearrangement_1d(ac.values).unit_mass_rescaled(m);
    const Profile1D tilde_p =
        tilde == TildeSource::matched_raster
            ? rearrangement_1d(
                  autocorrelation(matched_ball_raster(d, m, e.spec())).values)
                  .unit_mass_rescaled(m)
            : tilde_f_star(d, 1.0);
    const MuMeasure mu = mu_density(d, k, 1.0);

    ExceptionalSetReport rep;
    rep.k = k;
    rep.dim = d;
    rep.j_lo = j_lo;
    rep.j_hi = j_hi;
    rep.delta = delta;
    rep.mu_total = mu.interval_mass(j_lo, j_hi);

    const double c = 1.0 - std::sqrt(delta);

    std::vector<double> knots{j_lo, j_hi};
    for (double t : f_star.knots()) {
        if (t > j_lo && t < j_hi) knots.push_back(t);
    }
    for (double t : tilde_p.knots()) {
        if (t > j_lo && t < j_hi) knots.push_back(t);
    }
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    double mu_bad = 0.0;
    auto add_bad = [&](double a, double b) {
        if (b > a) mu_bad += mu.interval_mass(a, b);
    };

    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double a = knots[i];
        const double b = knots[i + 1];
        const double len = b - a;
        if (!(len > 0.0)) continue;

        // G(a + u) = C + B u + A u^2 on [0, len], from exact interval data
        const double ga = f_star.cumulative_at(a) - c * tilde_p.cumulative_at(a);
        const double vf = (f_star.cumulative_at(b) - f_star.cumulative_at(a)) / len;
        const double ti = tilde_p.cumulative_at(b) - tilde_p.cumulative_at(a);
        double q = 0.0;
        if (tilde_p.kind() == ProfileKind::linear)
            q = (tilde_p.value_at(b) - tilde_p.value_at(a)) / len;
        const double p = ti / len - 0.5 * q * len;

        const double A = -0.5 * c * q;
        const double B = vf - c * p;
        const double C = ga;

        if (std::abs(A) < 1e-300) {
            if (B == 0.0) {
                if (C <= 0.0) add_bad(a, b);
            } else {
                const double u0 = std::clamp(-C / B, 0.0, len);
                if (B > 0.0) {
                    if (C <= 0.0) add_bad(a, a + u0);
                } else {
                    add_bad(a + u0, b);
                }
            }
            continue;
        }
        const double disc = B * B - 4.0 * A * C;
        if (disc < 0.0) {
            if (A < 0.0) add_bad(a, b);  // no real roots, negative leading term
            continue;
        }
        const double s = std::sqrt(disc);
        double u1 = (-B - s) / (2.0 * A);
        double u2 = (-B + s) / (2.0 * A);
        if (u1 > u2) std::swap(u1, u2);
        if (A > 0.0) {
            add_bad(a + std::clamp(u1, 0.0, len), a + std::clamp(u2, 0.0, len));
        } else {
            add_bad(a, a + std::clamp(u1, 0.0, len));
            add_bad(a + std::clamp(u2, 0.0, len), b);
        }
    }
    rep.mu_bad = mu_bad;
    rep.ratio = mu_bad / std::sqrt(delta);
    return rep;
}

}  // namespace gwrs
