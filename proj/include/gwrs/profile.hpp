#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "gwrs/common.hpp"

namespace gwrs {

enum class ProfileKind { step, linear };

/**
 * Piecewise profile on [0, infinity) with knots 0 = t_0 < t_1 < ... < t_m.
 *
 *  step:   value on [t_i, t_{i+1}) is v_i; beyond t_m the value is v_m.
 *  linear: linear interpolation between knot values; constant v_m beyond t_m.
 *
 * Compactly supported profiles end with v_m = 0. Cumulative integrals are
 * evaluated exactly (linear pieces for step profiles, quadratic pieces for
 * linear profiles).
 */
class Profile1D {
public:
    Profile1D(ProfileKind kind, std::vector<double> knots, std::vector<double> values);

    ProfileKind kind() const { return kind_; }
    std::span<const double> knots() const { return knots_; }
    std::span<const double> knot_values() const { return values_; }

    double value_at(double t) const;

    /// Exact integral over [0, t].
    double cumulative_at(double t) const;

    /// Exact integral over [0, infinity); requires a trailing zero value.
    double integral() const;

    /// Smallest T such that the profile vanishes on [T, infinity); requires
    /// a trailing zero value.
    double support_end() const;

    bool nonincreasing(double slack = 0.0) const;

    /// Exact profile of f'(t) = f(m t) / m. If this profile describes the
    /// autocorrelation rearrangement of a set of measure m, the result
    /// describes the unit-measure dilate of that set.
    Profile1D unit_mass_rescaled(double m) const;

    /// Two-column text table with a `# profile {step|linear}` header.
    void save(const std::filesystem::path& path) const;
    static Profile1D load(const std::filesystem::path& path);

private:
    ProfileKind kind_;
    std::vector<double> knots_;
    std::vector<double> values_;
    std::vector<double> prefix_;  // cumulative integral at each knot

    friend double integrate_product(std::span<const Profile1D* const> profiles,
                                    std::span<const int> exponents);
};

/**
 * Exact integral over [0, infinity) of the product of profiles raised to
 * nonnegative integer exponents. Each factor is affine on the common knot
 * refinement, so Gauss-Legendre quadrature of sufficient order is exact.
 * All profiles must be compactly supported or at least one exponent-weighted
 * factor must vanish beyond the last knot.
 */
double integrate_product(std::span<const Profile1D* const> profiles,
                         std::span<const int> exponents);

/// Convenience: exact integral of p^k.
double integrate_power(const Profile1D& p, int k);

/// Convenience: exact integral of a^i * b^j.
double integrate_mixed(const Profile1D& a, int i, const Profile1D& b, int j);

/**
 * Running integral F(t) = int_0^t p as a Profile1D. For a step input the
 * result is exactly piecewise linear. For a linear input the true F is
 * piecewise quadratic; the returned linear profile subdivides each interval
 * (chord error O(dt^2)); use Profile1D::cumulative_at for exact values.
 */
Profile1D cumulative_F(const Profile1D& p, int subdivisions = 64);

}  // namespace gwrs
