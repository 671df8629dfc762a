#include "gwrs/profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gwrs {

namespace {

// Gauss-Legendre nodes/weights on [-1, 1]; q points integrate degree 2q-1.
struct GaussRule {
    int points;
    const double* x;
    const double* w;
};

constexpr double kX1[] = {0.0};
constexpr double kW1[] = {2.0};
constexpr double kX2[] = {-0.57735026918962576, 0.57735026918962576};
constexpr double kW2[] = {1.0, 1.0};
constexpr double kX3[] = {-0.77459666924148338, 0.0, 0.77459666924148338};
constexpr double kW3[] = {0.55555555555555556, 0.88888888888888889, 0.55555555555555556};
constexpr double kX4[] = {-0.86113631159405258, -0.33998104358485626, 0.33998104358485626,
                          0.86113631159405258};
constexpr double kW4[] = {0.34785484513745386, 0.65214515486254614, 0.65214515486254614,
                          0.34785484513745386};
constexpr double kX5[] = {-0.90617984593866399, -0.53846931010568309, 0.0,
                          0.53846931010568309, 0.90617984593866399};
constexpr double kW5[] = {0.23692688505618909, 0.47862867049936647, 0.56888888888888889,
                          0.47862867049936647, 0.23692688505618909};

GaussRule gauss_rule(int degree) {
    const int q = degree / 2 + 1;
    switch (q) {
        case 1: return {1, kX1, kW1};
        case 2: return {2, kX2, kW2};
        case 3: return {3, kX3, kW3};
        case 4: return {4, kX4, kW4};
        case 5: return {5, kX5, kW5};
        default: throw ConfigError("integrate_product: polynomial degree too high");
    }
}

}  // namespace

Profile1D::Profile1D(ProfileKind kind, std::vector<double> knots, std::vector<double> values)
    : kind_(kind), knots_(std::move(knots)), values_(std::move(values)) {
    if (knots_.empty() || knots_.size() != values_.size())
        throw ConfigError("Profile1D: knots and values must be nonempty and equal-length");
    if (knots_.front() != 0.0) throw ConfigError("Profile1D: first knot must be 0");
    for (std::size_t i = 0; i < knots_.size(); ++i) {
        if (!std::isfinite(knots_[i]) || !std::isfinite(values_[i]))
            throw ConfigError("Profile1D: non-finite entry");
        if (i > 0 && !(knots_[i] > knots_[i - 1]))
            throw ConfigError("Profile1D: knots must be strictly increasing");
    }
    prefix_.resize(knots_.size());
    prefix_[0] = 0.0;
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
        const double dt = knots_[i + 1] - knots_[i];
        const double piece = kind_ == ProfileKind::step
                                 ? values_[i] * dt
                                 : 0.5 * (values_[i] + values_[i + 1]) * dt;
        prefix_[i + 1] = prefix_[i] + piece;
    }
}

double Profile1D::value_at(double t) const {
    if (t < 0.0) return 0.0;
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
    if (i + 1 >= knots_.size()) return values_.back();
    if (kind_ == ProfileKind::step) return values_[i];
    const double u = (t - knots_[i]) / (knots_[i + 1] - knots_[i]);
    return values_[i] + u * (values_[i + 1] - values_[i]);
}

double Profile1D::cumulative_at(double t) const {
    if (t <= 0.0) return 0.0;
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
    const double tau = t - knots_[i];
    if (i + 1 >= knots_.size()) return prefix_.back() + values_.back() * tau;
    if (kind_ == ProfileKind::step) return prefix_[i] + values_[i] * tau;
    const double slope = (values_[i + 1] - values_[i]) / (knots_[i + 1] - knots_[i]);
    return prefix_[i] + values_[i] * tau + 0.5 * slope * tau * tau;
}

double Profile1D::integral() const {
    if (values_.back() != 0.0)
        throw ConfigError("Profile1D::integral: profile is not compactly supported");
    return prefix_.back();
}

double Profile1D::support_end() const {
    if (values_.back() != 0.0)
        throw ConfigError("Profile1D::support_end: profile is not compactly supported");
    std::size_t j = values_.size();
    while (j > 0 && values_[j - 1] == 0.0) --j;
    if (j == 0) return 0.0;
    // values_[j-1] != 0; the profile can first vanish at knot j.
    return j < knots_.size() ? knots_[j] : knots_.back();
}

bool Profile1D::nonincreasing(double slack) const {
    double vmax = 0.0;
    for (double v : values_) vmax = std::max(vmax, std::abs(v));
    const double allow = slack * std::max(vmax, 1e-300);
    for (std::size_t i = 0; i + 1 < values_.size(); ++i)
        if (values_[i + 1] > values_[i] + allow) return false;
    return true;
}

Profile1D Profile1D::unit_mass_rescaled(double m) const {
    if (!(m > 0.0)) throw ConfigError("Profile1D::unit_mass_rescaled: measure must be positive");
    std::vector<double> k(knots_.size()), v(values_.size());
    for (std::size_t i = 0; i < knots_.size(); ++i) {
        k[i] = knots_[i] / m;
        v[i] = values_[i] / m;
    }
    return Profile1D(kind_, std::move(k), std::move(v));
}

void Profile1D::save(const std::filesystem::path& path) const {
    std::ofstream os(path);
    if (!os) throw ConfigError("Profile1D::save: cannot open " + path.string());
    os << "# profile " << (kind_ == ProfileKind::step ? "step" : "linear") << "\n";
    for (std::size_t i = 0; i < knots_.size(); ++i)
        os << format_g17(knots_[i]) << " " << format_g17(values_[i]) << "\n";
    if (!os) throw ConfigError("Profile1D::save: write failed for " + path.string());
}

Profile1D Profile1D::load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("Profile1D::load: cannot open " + path.string());
    std::string header;
    std::getline(is, header);
    ProfileKind kind;
    if (header == "# profile step")
        kind = ProfileKind::step;
    else if (header == "# profile linear")
        kind = ProfileKind::linear;
    else
        throw ConfigError("Profile1D::load: missing `# profile {step|linear}` header");
    std::vector<double> knots, values;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        double t = 0.0, v = 0.0;
        if (!(row >> t >> v)) throw ConfigError("Profile1D::load: malformed row: " + line);
        knots.push_back(t);
        values.push_back(v);
    }
    return Profile1D(kind, std::move(knots), std::move(values));
}

double integrate_product(std::span<const Profile1D* const> profiles,
                         std::span<const int> exponents) {
    if (profiles.size() != exponents.size() || profiles.empty())
        throw ConfigError("integrate_product: profiles and exponents must match");
    int degree = 0;
    double t_end = -1.0;
    bool all_step = true;
    for (std::size_t f = 0; f < profiles.size(); ++f) {
        if (exponents[f] < 0) throw ConfigError("integrate_product: exponents must be >= 0");
        if (exponents[f] == 0) continue;
        const auto& p = *profiles[f];
        if (p.kind() == ProfileKind::linear) {
            degree += exponents[f];
            all_step = false;
        }
        if (p.knot_values().back() == 0.0) {
            const double s = p.support_end();
            t_end = t_end < 0.0 ? s : std::min(t_end, s);
        }
    }
    if (t_end < 0.0)
        throw ConfigError("integrate_product: no compactly supported factor with positive exponent");
    if (t_end == 0.0) return 0.0;

    // Common knot refinement clipped to [0, t_end].
    std::vector<double> grid;
    for (std::size_t f = 0; f < profiles.size(); ++f) {
        if (exponents[f] == 0) continue;
        for (double t : profiles[f]->knots())
            if (t < t_end) grid.push_back(t);
    }
    grid.push_back(0.0);
    grid.push_back(t_end);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const GaussRule rule = all_step ? GaussRule{0, nullptr, nullptr} : gauss_rule(degree);

    std::vector<double> parts(grid.size() - 1);
    // Per-profile cursor into its knot array, advanced monotonically.
    std::vector<std::size_t> cursor(profiles.size(), 0);
    for (std::size_t seg = 0; seg + 1 < grid.size(); ++seg) {
        const double a = grid[seg];
        const double b = grid[seg + 1];
        const double dt = b - a;
        if (all_step) {
            double prod = 1.0;
            for (std::size_t f = 0; f < profiles.size(); ++f) {
                if (exponents[f] == 0) continue;
                const auto& p = *profiles[f];
                const auto knots = p.knots();
                auto& c = cursor[f];
                while (c + 1 < knots.size() && knots[c + 1] <= a) ++c;
                const double v = p.knot_values()[c];
                for (int e = 0; e < exponents[f]; ++e) prod *= v;
            }
            parts[seg] = prod * dt;
            continue;
        }
        // Affine coefficients of each factor on [a, b].
        double acc = 0.0;
        std::array<double, 8> va{}, slope{};
        std::size_t nf = 0;
        std::array<int, 8> exp_of{};
        for (std::size_t f = 0; f < profiles.size(); ++f) {
            if (exponents[f] == 0) continue;
            if (nf >= va.size()) throw ConfigError("integrate_product: too many factors");
            const auto& p = *profiles[f];
            const auto knots = p.knots();
            const auto vals = p.knot_values();
            auto& c = cursor[f];
            while (c + 1 < knots.size() && knots[c + 1] <= a) ++c;
            if (p.kind() == ProfileKind::step) {
                va[nf] = vals[c];
                slope[nf] = 0.0;
            } else if (c + 1 >= knots.size()) {
                va[nf] = vals.back();
                slope[nf] = 0.0;
            } else {
                const double s = (vals[c + 1] - vals[c]) / (knots[c + 1] - knots[c]);
                va[nf] = vals[c] + s * (a - knots[c]);
                slope[nf] = s;
            }
            exp_of[nf] = exponents[f];
            ++nf;
        }
        for (int g = 0; g < rule.points; ++g) {
            const double tau = 0.5 * dt * (1.0 + rule.x[g]);
            double prod = 1.0;
            for (std::size_t f = 0; f < nf; ++f) {
                const double v = va[f] + slope[f] * tau;
                for (int e = 0; e < exp_of[f]; ++e) prod *= v;
            }
            acc += rule.w[g] * prod;
        }
        parts[seg] = acc * 0.5 * dt;
    }
    return pairwise_sum(parts);
}

double integrate_power(const Profile1D& p, int k) {
    const Profile1D* ps[] = {&p};
    const int es[] = {k};
    return integrate_product(ps, es);
}

double integrate_mixed(const Profile1D& a, int i, const Profile1D& b, int j) {
    const Profile1D* ps[] = {&a, &b};
    const int es[] = {i, j};
    return integrate_product(ps, es);
}

Profile1D cumulative_F(const Profile1D& p, int subdivisions) {
    if (subdivisions < 1) throw ConfigError("cumulative_F: subdivisions must be >= 1");
    const auto knots = p.knots();
    std::vector<double> k, v;
    if (p.kind() == ProfileKind::step) {
        k.assign(knots.begin(), knots.end());
        v.resize(k.size());
        for (std::size_t i = 0; i < k.size(); ++i) v[i] = p.cumulative_at(k[i]);
        return Profile1D(ProfileKind::linear, std::move(k), std::move(v));
    }
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double a = knots[i];
        const double dt = (knots[i + 1] - a) / subdivisions;
        for (int s = 0; s < subdivisions; ++s) {
            const double t = a + s * dt;
            k.push_back(t);
            v.push_back(p.cumulative_at(t));
        }
    }
    k.push_back(knots.back());
    v.push_back(p.cumulative_at(knots.back()));
    return Profile1D(ProfileKind::linear, std::move(k), std::move(v));
}

}  // namespace gwrs
