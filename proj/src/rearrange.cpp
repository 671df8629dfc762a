#include "gwrs/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gwrs/common.hpp"

namespace gwrs {

GridFunction radial_rearrangement(const GridFunction& g) {
    const GridSpec& spec = g.spec();
    const std::size_t total = spec.total_cells();

    // Order cells by squared distance of their centers from the origin.
    // The squared distance is a sum of exact per-axis values, so equal
    // radii compare equal and the flat-index tiebreak makes the cell
    // order (and therefore the output) independent of the sort
    // implementation.
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> dist2(total);
    for (std::size_t i = 0; i < total; ++i) {
        const auto c = g.cell_center(i);
        double r2 = 0.0;
        for (int a = 0; a < spec.dim(); ++a) r2 += c[a] * c[a];
        dist2[i] = r2;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (dist2[a] != dist2[b]) return dist2[a] < dist2[b];
        return a < b;
    });

    std::vector<double> vals(g.values().begin(), g.values().end());
    std::sort(vals.begin(), vals.end(), std::greater<double>());

    GridFunction out(spec);
    for (std::size_t i = 0; i < total; ++i) out[order[i]] = vals[i];
    return out;
}

Profile1D rearrangement_1d(const GridFunction& g) {
    for (double v : g.values()) {
        if (v < 0.0) throw ConfigError("rearrangement_1d: negative value in input");
    }
    std::vector<double> vals(g.values().begin(), g.values().end());
    std::sort(vals.begin(), vals.end(), std::greater<double>());
    while (!vals.empty() && vals.back() == 0.0) vals.pop_back();

    const double cv = g.spec().cell_volume();
    std::vector<double> knots{0.0};
    std::vector<double> values;
    std::size_t i = 0;
    while (i < vals.size()) {
        std::size_t j = i;
        while (j < vals.size() && vals[j] == vals[i]) ++j;
        values.push_back(vals[i]);
        knots.push_back(knots.back() + cv * static_cast<double>(j - i));
        i = j;
    }
    values.push_back(0.0);  // vanish beyond the support
    if (knots.size() == 1) {
        // identically zero input: a single zero knot value
        return Profile1D(ProfileKind::step, {0.0}, {0.0});
    }
    return Profile1D(ProfileKind::step, std::move(knots), std::move(values));
}

double bathtub_oracle(const GridFunction& g, double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw ConfigError("bathtub_oracle: t must be finite and nonnegative");
    }
    for (double v : g.values()) {
        if (v < 0.0) throw ConfigError("bathtub_oracle: negative value in input");
    }
    std::vector<double> vals(g.values().begin(), g.values().end());
    std::sort(vals.begin(), vals.end(), std::greater<double>());

    const double cv = g.spec().cell_volume();
    double remaining = t;
    std::vector<double> parts;
    parts.reserve(vals.size());
    for (double v : vals) {
        if (remaining <= 0.0 || v == 0.0) break;
        const double take = std::min(remaining, cv);
        parts.push_back(v * take);
        remaining -= take;
    }
    return pairwise_sum(parts);
}

GridFunction superlevel_set(const GridFunction& g, double threshold) {
    GridFunction out(g.spec());
    const auto src = g.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > threshold ? 1.0 : 0.0;
    return out;
}

}  // namespace gwrs
