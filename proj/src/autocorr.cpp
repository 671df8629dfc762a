#include "gwrs/autocorr.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gwrs/fft.hpp"

namespace gwrs {

double Autocorrelation::at_shift(const std::array<int, 3>& j) const {
    const int half = (values.spec().cells() - 1) / 2;
    std::array<int, 3> idx{0, 0, 0};
    for (int a = 0; a < values.spec().dim(); ++a) {
        if (j[a] < -half || j[a] > half)
            throw ConfigError("Autocorrelation::at_shift: shift index out of range");
        idx[a] = j[a] + half;
    }
    return values[values.flat_index(idx)];
}

Autocorrelation autocorrelation(const GridFunction& e, bool strict) {
    const GridSpec& g = e.spec();
    const int d = g.dim();
    const int n = g.cells();

    if (e.min_value() < 0.0)
        throw ConfigError("autocorrelation: input must be nonnegative");

    if (strict) {
        const auto vals = e.values();
        for (std::size_t flat = 0; flat < vals.size(); ++flat) {
            if (vals[flat] == 0.0) continue;
            std::size_t rest = flat;
            for (int a = d - 1; a >= 0; --a) {
                const int i = static_cast<int>(rest % static_cast<std::size_t>(n));
                rest /= static_cast<std::size_t>(n);
                if (i == 0 || i == n - 1)
                    throw ConfigError(
                        "autocorrelation: support touches the grid boundary "
                        "(raster may be truncated; enlarge the extent or disable strict mode)");
            }
        }
    }

    std::array<int, 3> dims{n, n, n};
    double min_raw = 0.0;
    std::vector<double> corr =
        fft::self_correlation(std::vector<double>(e.values().begin(), e.values().end()),
                              dims, d, &min_raw);

    const double m = e.measure();
    const double cv = g.cell_volume();
    if (min_raw * cv < -1e-9 * std::max(m, 1e-300))
        throw ConfigError("autocorrelation: numerically inconsistent negative values");
    // spectral round-off leaves dust of either sign where exact zeros belong;
    // flush everything below the noise scale so supports stay sharp
    const double noise = 1e-12 * m;
    for (auto& v : corr) {
        v *= cv;
        if (v <= noise) v = 0.0;
    }

    GridSpec shift_grid(d, 2 * n - 1, g.extent() * (2.0 * n - 1.0) / n);
    return Autocorrelation{GridFunction(shift_grid, std::move(corr)), m};
}

double ball_autocorrelation_closed_form(int dim, double radius, double s) {
    if (!(radius > 0.0)) throw ConfigError("ball_autocorrelation_closed_form: radius must be positive");
    s = std::abs(s);
    if (s >= 2.0 * radius) return 0.0;
    switch (dim) {
        case 1:
            return 2.0 * radius - s;
        case 2: {
            const double r2 = radius * radius;
            return 2.0 * r2 * std::acos(s / (2.0 * radius)) -
                   0.5 * s * std::sqrt(4.0 * r2 - s * s);
        }
        case 3: {
            const double d = 2.0 * radius - s;
            return std::numbers::pi * d * d * (4.0 * radius + s) / 12.0;
        }
        default:
            throw ConfigError("ball_autocorrelation_closed_form: dim must be 1, 2, or 3");
    }
}

Profile1D tilde_f_star(int dim, double measure, int samples) {
    if (!(measure > 0.0)) throw ConfigError("tilde_f_star: measure must be positive");
    if (dim == 1) {
        // Exactly linear: measure - t/2 on [0, 2*measure].
        return Profile1D(ProfileKind::linear, {0.0, 2.0 * measure}, {measure, 0.0});
    }
    if (dim != 2 && dim != 3) throw ConfigError("tilde_f_star: dim must be 1, 2, or 3");
    if (samples < 8) throw ConfigError("tilde_f_star: need at least 8 samples");

    const double omega = unit_ball_volume(dim);
    const double r = std::pow(measure / omega, 1.0 / dim);
    std::vector<double> knots(samples + 1), values(samples + 1);
    for (int i = 0; i <= samples; ++i) {
        const double s = 2.0 * r * i / samples;
        knots[i] = omega * std::pow(s, dim);
        values[i] = ball_autocorrelation_closed_form(dim, r, s);
    }
    knots[0] = 0.0;
    values[0] = measure;  // f~(0) = |B|
    values[samples] = 0.0;
    return Profile1D(ProfileKind::linear, std::move(knots), std::move(values));
}

double MuMeasure::mass() const { return std::pow(tilde.value_at(0.0), k - 1); }

double MuMeasure::interval_mass(double a, double b) const {
    if (!(a <= b)) throw ConfigError("MuMeasure::interval_mass: need a <= b");
    a = std::max(a, 0.0);
    return std::pow(tilde.value_at(a), k - 1) - std::pow(tilde.value_at(b), k - 1);
}

double MuMeasure::density_at(double t) const {
    const auto knots = tilde.knots();
    const auto vals = tilde.knot_values();
    if (t < 0.0 || t >= knots.back()) return 0.0;
    const auto it = std::upper_bound(knots.begin(), knots.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - knots.begin()) - 1;
    const double slope = (vals[i + 1] - vals[i]) / (knots[i + 1] - knots[i]);
    return -(k - 1) * std::pow(tilde.value_at(t), k - 2) * slope;
}

Profile1D MuMeasure::density_profile() const {
    const auto knots = tilde.knots();
    const auto vals = tilde.knot_values();
    if (k == 2) {
        // density = -slope, exactly piecewise constant.
        std::vector<double> kk(knots.begin(), knots.end());
        std::vector<double> vv(knots.size());
        for (std::size_t i = 0; i + 1 < knots.size(); ++i)
            vv[i] = -(vals[i + 1] - vals[i]) / (knots[i + 1] - knots[i]);
        vv.back() = 0.0;
        return Profile1D(ProfileKind::step, std::move(kk), std::move(vv));
    }
    if (k == 3 && knots.size() == 2) {
        // density = 2 * tilde * (-slope), a single exact linear piece.
        const double slope = (vals[1] - vals[0]) / (knots[1] - knots[0]);
        return Profile1D(ProfileKind::linear, {knots[0], knots[1]},
                         {-2.0 * vals[0] * slope, 0.0});
    }
    // General case: step profile through interval midpoints on a refined grid.
    std::vector<double> kk, vv;
    const int subdiv = knots.size() == 2 ? 1024 : 1;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double dt = (knots[i + 1] - knots[i]) / subdiv;
        for (int s = 0; s < subdiv; ++s) {
            const double a = knots[i] + s * dt;
            kk.push_back(a);
            vv.push_back(density_at(a + 0.5 * dt));
        }
    }
    kk.push_back(knots.back());
    vv.push_back(0.0);
    return Profile1D(ProfileKind::step, std::move(kk), std::move(vv));
}

double MuMeasure::integrate(const std::function<double(double)>& phi) const {
    // 5-point Gauss per knot interval of tilde; the density is polynomial of
    // degree k-2 there, so this is exact for polynomial phi up to degree 11-k.
    static constexpr double kX[] = {-0.90617984593866399, -0.53846931010568309, 0.0,
                                    0.53846931010568309, 0.90617984593866399};
    static constexpr double kW[] = {0.23692688505618909, 0.47862867049936647,
                                    0.56888888888888889, 0.47862867049936647,
                                    0.23692688505618909};
    const auto knots = tilde.knots();
    std::vector<double> parts(knots.size() - 1, 0.0);
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double a = knots[i], b = knots[i + 1];
        const double half = 0.5 * (b - a);
        double acc = 0.0;
        for (int g = 0; g < 5; ++g) {
            const double t = a + half * (1.0 + kX[g]);
            acc += kW[g] * phi(t) * density_at(t);
        }
        parts[i] = acc * half;
    }
    return pairwise_sum(parts);
}

MuMeasure mu_density(int dim, int k, double measure, int samples) {
    if (k < 2) throw ConfigError("mu_density: k must be >= 2");
    return MuMeasure{k, tilde_f_star(dim, measure, samples)};
}

}  // namespace gwrs
