#include "gwrs/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>
#include <variant>

#include <json.hpp>

namespace gwrs {

namespace {

using nlohmann::json;

double det_mat(const Mat& m, int dim) {
    if (dim == 1) return m[0][0];
    if (dim == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

Mat inverse_mat(const Mat& m, int dim, double det) {
    Mat inv{};
    if (dim == 1) {
        inv[0][0] = 1.0 / det;
    } else if (dim == 2) {
        inv[0][0] = m[1][1] / det;
        inv[0][1] = -m[0][1] / det;
        inv[1][0] = -m[1][0] / det;
        inv[1][1] = m[0][0] / det;
    } else {
        inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
        inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
        inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
        inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
        inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
        inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
        inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
        inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
        inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
    }
    return inv;
}

Mat mul_mat(const Mat& a, const Mat& b, int dim) {
    Mat r{};
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            double s = 0.0;
            for (int l = 0; l < dim; ++l) s += a[i][l] * b[l][j];
            r[i][j] = s;
        }
    return r;
}

Mat transpose_mat(const Mat& a, int dim) {
    Mat r{};
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) r[i][j] = a[j][i];
    return r;
}

bool symmetric_positive_definite(const Mat& m, int dim) {
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            const double scale = std::abs(m[i][j]) + std::abs(m[j][i]) + 1.0;
            if (std::abs(m[i][j] - m[j][i]) > 1e-12 * scale) return false;
        }
    // Sylvester criterion on leading principal minors.
    if (!(m[0][0] > 0.0)) return false;
    if (dim >= 2 && !(m[0][0] * m[1][1] - m[0][1] * m[1][0] > 0.0)) return false;
    if (dim >= 3 && !(det_mat(m, 3) > 0.0)) return false;
    return true;
}

}  // namespace

AffineMap::AffineMap(int dim, const Mat& linear, const Vec& shift)
    : dim_(dim), lin_(linear), shift_(shift) {
    if (dim < 1 || dim > 3) throw ConfigError("AffineMap: dim must be 1, 2, or 3");
    det_ = det_mat(lin_, dim_);
    double scale = 0.0;
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) scale = std::max(scale, std::abs(lin_[i][j]));
    if (!(std::abs(det_) > 1e-14 * std::max(1.0, scale * scale * scale)))
        throw ConfigError("AffineMap: linear part is singular");
    inv_ = inverse_mat(lin_, dim_, det_);
}

AffineMap AffineMap::identity(int dim) {
    Mat m{};
    for (int i = 0; i < dim; ++i) m[i][i] = 1.0;
    return AffineMap(dim, m, Vec{0.0, 0.0, 0.0});
}

AffineMap AffineMap::translation(int dim, const Vec& shift) {
    Mat m{};
    for (int i = 0; i < dim; ++i) m[i][i] = 1.0;
    return AffineMap(dim, m, shift);
}

AffineMap AffineMap::linear_map(int dim, const Mat& linear) {
    return AffineMap(dim, linear, Vec{0.0, 0.0, 0.0});
}

Vec AffineMap::apply(const Vec& x) const {
    Vec y{0.0, 0.0, 0.0};
    for (int i = 0; i < dim_; ++i) {
        double s = shift_[i];
        for (int j = 0; j < dim_; ++j) s += lin_[i][j] * x[j];
        y[i] = s;
    }
    return y;
}

AffineMap AffineMap::inverse() const {
    Vec s{0.0, 0.0, 0.0};
    for (int i = 0; i < dim_; ++i) {
        double acc = 0.0;
        for (int j = 0; j < dim_; ++j) acc += inv_[i][j] * shift_[j];
        s[i] = -acc;
    }
    return AffineMap(dim_, inv_, s);
}

AffineMap AffineMap::after(const AffineMap& g) const {
    if (g.dim_ != dim_) throw ConfigError("AffineMap::after: dimension mismatch");
    const Mat lin = mul_mat(lin_, g.lin_, dim_);
    Vec shift = apply(g.shift_);
    return AffineMap(dim_, lin, shift);
}

// ---------------------------------------------------------------------------
// Shape tree

namespace {

struct BallNode {
    int dim;
    Vec center;
    double radius;
};

struct EllipsoidNode {
    int dim;
    Vec center;
    Mat m;       // quadratic form
    Mat m_inv;   // cached inverse for bounding boxes
};

struct BoxNode {
    int dim;
    Vec lo, hi;
};

struct UnionNode {
    std::vector<ShapeSpec> parts;
};

struct DiffNode {
    ShapeSpec a, b;
};

struct AffineNode {
    AffineMap map;      // forward map
    AffineMap inv;      // cached inverse
    ShapeSpec child;
};

}  // namespace

struct ShapeSpec::Node {
    std::variant<BallNode, EllipsoidNode, BoxNode, UnionNode, DiffNode, AffineNode> v;
};

// Internal helpers that need access to ShapeSpec's node pointer.
struct ShapeOps {
    static const ShapeSpec::Node& node(const ShapeSpec& s) { return *s.node_; }
    static ShapeSpec wrap(ShapeSpec::Node&& n) {
        return ShapeSpec(std::make_shared<const ShapeSpec::Node>(std::move(n)));
    }
};

namespace {

const auto& node_of(const ShapeSpec& s) { return ShapeOps::node(s).v; }

template <class N>
ShapeSpec make_shape(N&& n) {
    return ShapeOps::wrap(ShapeSpec::Node{std::forward<N>(n)});
}

std::pair<Vec, Vec> bbox_of(const ShapeSpec& s);

bool bbox_disjoint(const ShapeSpec& a, const ShapeSpec& b) {
    const auto [alo, ahi] = bbox_of(a);
    const auto [blo, bhi] = bbox_of(b);
    for (int i = 0; i < a.dim(); ++i)
        if (ahi[i] <= blo[i] || bhi[i] <= alo[i]) return true;
    return false;
}

double center_distance(const Vec& a, const Vec& b, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

/// Provably measure-disjoint (up to null sets).
bool provably_disjoint(const ShapeSpec& a, const ShapeSpec& b) {
    if (bbox_disjoint(a, b)) return true;
    const auto* ball_a = std::get_if<BallNode>(&node_of(a));
    const auto* ball_b = std::get_if<BallNode>(&node_of(b));
    if (ball_a && ball_b)
        return center_distance(ball_a->center, ball_b->center, ball_a->dim) >=
               ball_a->radius + ball_b->radius;
    return false;
}

/// Provably b subset of a (up to null sets).
bool provably_nested(const ShapeSpec& a, const ShapeSpec& b) {
    const auto* ball_a = std::get_if<BallNode>(&node_of(a));
    const auto* ball_b = std::get_if<BallNode>(&node_of(b));
    if (ball_a && ball_b)
        return center_distance(ball_a->center, ball_b->center, ball_a->dim) +
                   ball_b->radius <= ball_a->radius;
    const auto* box_a = std::get_if<BoxNode>(&node_of(a));
    const auto* box_b = std::get_if<BoxNode>(&node_of(b));
    if (box_a && box_b) {
        for (int i = 0; i < box_a->dim; ++i)
            if (box_b->lo[i] < box_a->lo[i] || box_b->hi[i] > box_a->hi[i]) return false;
        return true;
    }
    return false;
}

std::pair<Vec, Vec> bbox_of(const ShapeSpec& s) { return s.bounding_box(); }

}  // namespace

ShapeSpec ShapeSpec::ball(int dim, const Vec& center, double radius) {
    if (dim < 1 || dim > 3) throw ConfigError("ShapeSpec::ball: dim must be 1, 2, or 3");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("ShapeSpec::ball: radius must be positive");
    return make_shape(BallNode{dim, center, radius});
}

ShapeSpec ShapeSpec::ellipsoid(int dim, const Vec& center, const Mat& m) {
    if (dim < 1 || dim > 3) throw ConfigError("ShapeSpec::ellipsoid: dim must be 1, 2, or 3");
    if (!symmetric_positive_definite(m, dim))
        throw ConfigError("ShapeSpec::ellipsoid: matrix must be symmetric positive definite");
    const double det = det_mat(m, dim);
    return make_shape(EllipsoidNode{dim, center, m, inverse_mat(m, dim, det)});
}

ShapeSpec ShapeSpec::box(int dim, const Vec& lo, const Vec& hi) {
    if (dim < 1 || dim > 3) throw ConfigError("ShapeSpec::box: dim must be 1, 2, or 3");
    for (int i = 0; i < dim; ++i)
        if (!(lo[i] < hi[i])) throw ConfigError("ShapeSpec::box: lo must be < hi on every axis");
    return make_shape(BoxNode{dim, lo, hi});
}

ShapeSpec ShapeSpec::union_of(std::vector<ShapeSpec> parts) {
    if (parts.empty()) throw ConfigError("ShapeSpec::union_of: need at least one part");
    const int d = parts.front().dim();
    for (const auto& p : parts)
        if (p.dim() != d) throw ConfigError("ShapeSpec::union_of: dimension mismatch");
    if (parts.size() == 1) return parts.front();
    return make_shape(UnionNode{std::move(parts)});
}

ShapeSpec ShapeSpec::difference(ShapeSpec a, ShapeSpec b) {
    if (a.dim() != b.dim()) throw ConfigError("ShapeSpec::difference: dimension mismatch");
    return make_shape(DiffNode{std::move(a), std::move(b)});
}

ShapeSpec ShapeSpec::affine_image(const AffineMap& map, ShapeSpec child) {
    return apply_affine(child, map);
}

int ShapeSpec::dim() const {
    return std::visit(
        [](const auto& n) -> int {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, BallNode> || std::is_same_v<T, EllipsoidNode> ||
                          std::is_same_v<T, BoxNode>)
                return n.dim;
            else if constexpr (std::is_same_v<T, UnionNode>)
                return n.parts.front().dim();
            else if constexpr (std::is_same_v<T, DiffNode>)
                return n.a.dim();
            else
                return n.map.dim();
        },
        node_->v);
}

bool ShapeSpec::contains(const Vec& x) const {
    return std::visit(
        [&x](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, BallNode>) {
                double s = 0.0;
                for (int i = 0; i < n.dim; ++i) s += (x[i] - n.center[i]) * (x[i] - n.center[i]);
                return s <= n.radius * n.radius;
            } else if constexpr (std::is_same_v<T, EllipsoidNode>) {
                double q = 0.0;
                for (int i = 0; i < n.dim; ++i)
                    for (int j = 0; j < n.dim; ++j)
                        q += (x[i] - n.center[i]) * n.m[i][j] * (x[j] - n.center[j]);
                return q <= 1.0;
            } else if constexpr (std::is_same_v<T, BoxNode>) {
                for (int i = 0; i < n.dim; ++i)
                    if (x[i] < n.lo[i] || x[i] >= n.hi[i]) return false;
                return true;
            } else if constexpr (std::is_same_v<T, UnionNode>) {
                for (const auto& p : n.parts)
                    if (p.contains(x)) return true;
                return false;
            } else if constexpr (std::is_same_v<T, DiffNode>) {
                return n.a.contains(x) && !n.b.contains(x);
            } else {
                return n.child.contains(n.inv.apply(x));
            }
        },
        node_->v);
}

std::pair<Vec, Vec> ShapeSpec::bounding_box() const {
    return std::visit(
        [this](const auto& n) -> std::pair<Vec, Vec> {
            using T = std::decay_t<decltype(n)>;
            Vec lo{0.0, 0.0, 0.0}, hi{0.0, 0.0, 0.0};
            if constexpr (std::is_same_v<T, BallNode>) {
                for (int i = 0; i < n.dim; ++i) {
                    lo[i] = n.center[i] - n.radius;
                    hi[i] = n.center[i] + n.radius;
                }
            } else if constexpr (std::is_same_v<T, EllipsoidNode>) {
                for (int i = 0; i < n.dim; ++i) {
                    const double h = std::sqrt(std::max(0.0, n.m_inv[i][i]));
                    lo[i] = n.center[i] - h;
                    hi[i] = n.center[i] + h;
                }
            } else if constexpr (std::is_same_v<T, BoxNode>) {
                lo = n.lo;
                hi = n.hi;
            } else if constexpr (std::is_same_v<T, UnionNode>) {
                bool first = true;
                for (const auto& p : n.parts) {
                    const auto [plo, phi] = p.bounding_box();
                    for (int i = 0; i < p.dim(); ++i) {
                        lo[i] = first ? plo[i] : std::min(lo[i], plo[i]);
                        hi[i] = first ? phi[i] : std::max(hi[i], phi[i]);
                    }
                    first = false;
                }
            } else if constexpr (std::is_same_v<T, DiffNode>) {
                return n.a.bounding_box();
            } else {
                const auto [clo, chi] = n.child.bounding_box();
                const int d = n.map.dim();
                const int corners = 1 << d;
                bool first = true;
                for (int c = 0; c < corners; ++c) {
                    Vec corner{0.0, 0.0, 0.0};
                    for (int i = 0; i < d; ++i) corner[i] = (c >> i) & 1 ? chi[i] : clo[i];
                    const Vec y = n.map.apply(corner);
                    for (int i = 0; i < d; ++i) {
                        lo[i] = first ? y[i] : std::min(lo[i], y[i]);
                        hi[i] = first ? y[i] : std::max(hi[i], y[i]);
                    }
                    first = false;
                }
            }
            return {lo, hi};
        },
        node_->v);
}

std::optional<double> ShapeSpec::exact_measure() const {
    return std::visit(
        [](const auto& n) -> std::optional<double> {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, BallNode>) {
                return unit_ball_volume(n.dim) * std::pow(n.radius, n.dim);
            } else if constexpr (std::is_same_v<T, EllipsoidNode>) {
                return unit_ball_volume(n.dim) / std::sqrt(det_mat(n.m, n.dim));
            } else if constexpr (std::is_same_v<T, BoxNode>) {
                double v = 1.0;
                for (int i = 0; i < n.dim; ++i) v *= n.hi[i] - n.lo[i];
                return v;
            } else if constexpr (std::is_same_v<T, UnionNode>) {
                double total = 0.0;
                for (std::size_t i = 0; i < n.parts.size(); ++i) {
                    const auto m = n.parts[i].exact_measure();
                    if (!m) return std::nullopt;
                    total += *m;
                    for (std::size_t j = i + 1; j < n.parts.size(); ++j)
                        if (!provably_disjoint(n.parts[i], n.parts[j])) return std::nullopt;
                }
                return total;
            } else if constexpr (std::is_same_v<T, DiffNode>) {
                const auto ma = n.a.exact_measure();
                if (!ma) return std::nullopt;
                if (provably_disjoint(n.a, n.b)) return ma;
                const auto mb = n.b.exact_measure();
                if (mb && provably_nested(n.a, n.b)) return *ma - *mb;
                return std::nullopt;
            } else {
                const auto m = n.child.exact_measure();
                if (!m) return std::nullopt;
                return std::abs(n.map.det()) * *m;
            }
        },
        node_->v);
}

std::optional<double> ShapeSpec::ellipsoidal_measure() const {
    return std::visit(
        [](const auto& n) -> std::optional<double> {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, BallNode>) {
                return unit_ball_volume(n.dim) * std::pow(n.radius, n.dim);
            } else if constexpr (std::is_same_v<T, EllipsoidNode>) {
                return unit_ball_volume(n.dim) / std::sqrt(det_mat(n.m, n.dim));
            } else if constexpr (std::is_same_v<T, AffineNode>) {
                const auto m = n.child.ellipsoidal_measure();
                if (!m) return std::nullopt;
                return std::abs(n.map.det()) * *m;
            } else {
                return std::nullopt;
            }
        },
        node_->v);
}

ShapeSpec apply_affine(const ShapeSpec& shape, const AffineMap& map) {
    if (shape.dim() != map.dim()) throw ConfigError("apply_affine: dimension mismatch");
    return std::visit(
        [&map](const auto& n) -> ShapeSpec {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, BallNode>) {
                // Ball is the ellipsoid with form I / r^2; transform that form.
                Mat form{};
                for (int i = 0; i < n.dim; ++i) form[i][i] = 1.0 / (n.radius * n.radius);
                const AffineMap inv = map.inverse();
                const Mat a_inv = inv.linear();
                const Mat new_form = mul_mat(transpose_mat(a_inv, n.dim), mul_mat(form, a_inv, n.dim), n.dim);
                return ShapeSpec::ellipsoid(n.dim, map.apply(n.center), new_form);
            } else if constexpr (std::is_same_v<T, EllipsoidNode>) {
                const AffineMap inv = map.inverse();
                const Mat a_inv = inv.linear();
                const Mat new_form = mul_mat(transpose_mat(a_inv, n.dim), mul_mat(n.m, a_inv, n.dim), n.dim);
                return ShapeSpec::ellipsoid(n.dim, map.apply(n.center), new_form);
            } else if constexpr (std::is_same_v<T, BoxNode>) {
                ShapeSpec child = ShapeSpec::box(n.dim, n.lo, n.hi);
                return make_shape(AffineNode{map, map.inverse(), std::move(child)});
            } else if constexpr (std::is_same_v<T, UnionNode>) {
                std::vector<ShapeSpec> parts;
                parts.reserve(n.parts.size());
                for (const auto& p : n.parts) parts.push_back(apply_affine(p, map));
                return ShapeSpec::union_of(std::move(parts));
            } else if constexpr (std::is_same_v<T, DiffNode>) {
                return ShapeSpec::difference(apply_affine(n.a, map), apply_affine(n.b, map));
            } else {
                return make_shape(AffineNode{map.after(n.map), n.inv.after(map.inverse()), n.child});
            }
        },
        node_of(shape));
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json vec_to_json(const Vec& v, int dim) {
    json a = json::array();
    for (int i = 0; i < dim; ++i) a.push_back(v[i]);
    return a;
}

json mat_to_json(const Mat& m, int dim) {
    json rows = json::array();
    for (int i = 0; i < dim; ++i) {
        json row = json::array();
        for (int j = 0; j < dim; ++j) row.push_back(m[i][j]);
        rows.push_back(row);
    }
    return rows;
}

Vec vec_from_json(const json& a, int dim, const char* what) {
    if (!a.is_array() || static_cast<int>(a.size()) != dim)
        throw ConfigError(std::string("shape spec: bad vector for ") + what);
    Vec v{0.0, 0.0, 0.0};
    for (int i = 0; i < dim; ++i) v[i] = a.at(i).get<double>();
    return v;
}

Mat mat_from_json(const json& rows, int dim, const char* what) {
    if (!rows.is_array() || static_cast<int>(rows.size()) != dim)
        throw ConfigError(std::string("shape spec: bad matrix for ") + what);
    Mat m{};
    for (int i = 0; i < dim; ++i) {
        const auto& row = rows.at(i);
        if (!row.is_array() || static_cast<int>(row.size()) != dim)
            throw ConfigError(std::string("shape spec: bad matrix row for ") + what);
        for (int j = 0; j < dim; ++j) m[i][j] = row.at(j).get<double>();
    }
    return m;
}

json shape_to_json(const ShapeSpec& s) {
    return std::visit(
        [&s](const auto& n) -> json {
            using T = std::decay_t<decltype(n)>;
            json j;
            if constexpr (std::is_same_v<T, BallNode>) {
                j["type"] = "ball";
                j["center"] = vec_to_json(n.center, n.dim);
                j["radius"] = n.radius;
            } else if constexpr (std::is_same_v<T, EllipsoidNode>) {
                j["type"] = "ellipsoid";
                j["center"] = vec_to_json(n.center, n.dim);
                j["matrix"] = mat_to_json(n.m, n.dim);
            } else if constexpr (std::is_same_v<T, BoxNode>) {
                j["type"] = "box";
                j["lo"] = vec_to_json(n.lo, n.dim);
                j["hi"] = vec_to_json(n.hi, n.dim);
            } else if constexpr (std::is_same_v<T, UnionNode>) {
                j["type"] = "union";
                json parts = json::array();
                for (const auto& p : n.parts) parts.push_back(shape_to_json(p));
                j["parts"] = parts;
            } else if constexpr (std::is_same_v<T, DiffNode>) {
                j["type"] = "difference";
                j["minuend"] = shape_to_json(n.a);
                j["subtrahend"] = shape_to_json(n.b);
            } else {
                j["type"] = "affine_image";
                j["linear"] = mat_to_json(n.map.linear(), s.dim());
                j["shift"] = vec_to_json(n.map.shift(), s.dim());
                j["child"] = shape_to_json(n.child);
            }
            return j;
        },
        node_of(s));
}

ShapeSpec shape_from_json(const json& j) {
    if (!j.is_object() || !j.contains("type"))
        throw ConfigError("shape spec: expected an object with a \"type\" field");
    const std::string type = j.at("type").get<std::string>();
    if (type == "ball") {
        const auto& c = j.at("center");
        const int dim = static_cast<int>(c.size());
        return ShapeSpec::ball(dim, vec_from_json(c, dim, "ball"), j.at("radius").get<double>());
    }
    if (type == "ellipsoid") {
        const auto& c = j.at("center");
        const int dim = static_cast<int>(c.size());
        return ShapeSpec::ellipsoid(dim, vec_from_json(c, dim, "ellipsoid"),
                                    mat_from_json(j.at("matrix"), dim, "ellipsoid"));
    }
    if (type == "box") {
        const auto& lo = j.at("lo");
        const int dim = static_cast<int>(lo.size());
        return ShapeSpec::box(dim, vec_from_json(lo, dim, "box"), vec_from_json(j.at("hi"), dim, "box"));
    }
    if (type == "union") {
        std::vector<ShapeSpec> parts;
        for (const auto& p : j.at("parts")) parts.push_back(shape_from_json(p));
        return ShapeSpec::union_of(std::move(parts));
    }
    if (type == "difference") {
        return ShapeSpec::difference(shape_from_json(j.at("minuend")), shape_from_json(j.at("subtrahend")));
    }
    if (type == "affine_image") {
        ShapeSpec child = shape_from_json(j.at("child"));
        const int dim = child.dim();
        const AffineMap map(dim, mat_from_json(j.at("linear"), dim, "affine_image"),
                            vec_from_json(j.at("shift"), dim, "affine_image"));
        return ShapeSpec::affine_image(map, std::move(child));
    }
    throw ConfigError("shape spec: unknown type \"" + type + "\"");
}

}  // namespace

std::string ShapeSpec::dump() const { return shape_to_json(*this).dump(); }

ShapeSpec ShapeSpec::parse(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("shape spec: JSON parse error: ") + e.what());
    }
    try {
        return shape_from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("shape spec: malformed document: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Rasterization

GridFunction rasterize_predicate(const GridSpec& grid,
                                 const std::function<bool(const Vec&)>& inside,
                                 RasterMode mode, int subsamples) {
    if (subsamples < 1) throw ConfigError("rasterize: subsamples must be >= 1");
    GridFunction out(grid);
    const int d = grid.dim();
    const int n = grid.cells();
    const double h = grid.cell_width();
    const double l = grid.extent();

    int sub_total = 1;
    for (int a = 0; a < d; ++a) sub_total *= subsamples;

    const std::size_t total = grid.total_cells();
    auto worker = [&](std::size_t lo, std::size_t hi) {
        std::array<int, 3> idx{0, 0, 0};
        for (std::size_t flat = lo; flat < hi; ++flat) {
            std::size_t rest = flat;
            for (int a = d - 1; a >= 0; --a) {
                idx[a] = static_cast<int>(rest % static_cast<std::size_t>(n));
                rest /= static_cast<std::size_t>(n);
            }
            if (mode == RasterMode::binary) {
                Vec x{0.0, 0.0, 0.0};
                for (int a = 0; a < d; ++a) x[a] = -l + (idx[a] + 0.5) * h;
                out[flat] = inside(x) ? 1.0 : 0.0;
                continue;
            }
            int count = 0;
            std::array<int, 3> sub{0, 0, 0};
            for (int t = 0; t < sub_total; ++t) {
                int r = t;
                for (int a = d - 1; a >= 0; --a) {
                    sub[a] = r % subsamples;
                    r /= subsamples;
                }
                Vec x{0.0, 0.0, 0.0};
                for (int a = 0; a < d; ++a)
                    x[a] = -l + idx[a] * h + (sub[a] + 0.5) * h / subsamples;
                if (inside(x)) ++count;
            }
            out[flat] = static_cast<double>(count) / static_cast<double>(sub_total);
        }
    };
    parallel_blocks(total, worker);
    return out;
}

GridFunction rasterize(const ShapeSpec& shape, const GridSpec& grid,
                       RasterMode mode, int subsamples, bool strict) {
    if (shape.dim() != grid.dim()) throw ConfigError("rasterize: shape and grid dimensions differ");
    const auto [lo, hi] = shape.bounding_box();
    const double l = grid.extent();
    double margin = l;
    for (int a = 0; a < grid.dim(); ++a) {
        margin = std::min(margin, std::min(lo[a] + l, l - hi[a]));
    }
    if (margin < 0.0) {
        if (strict)
            throw ConfigError("rasterize: shape exceeds the grid extent (would truncate support)");
        std::cerr << "gwrs: warning: shape exceeds the grid extent; raster is truncated\n";
    } else if (margin < grid.cell_width()) {
        std::cerr << "gwrs: warning: shape support within one cell of the grid boundary\n";
    }
    return rasterize_predicate(
        grid, [&shape](const Vec& x) { return shape.contains(x); }, mode, subsamples);
}

GridFunction matched_ball_raster(int dim, double target_measure, const GridSpec& grid,
                                 int subsamples) {
    if (dim != grid.dim()) throw ConfigError("matched_ball_raster: dimension mismatch");
    if (!(target_measure >= 0.0) || !std::isfinite(target_measure))
        throw ConfigError("matched_ball_raster: target measure must be finite and >= 0");
    if (target_measure == 0.0) return GridFunction(grid);

    const Vec origin{0.0, 0.0, 0.0};
    // bisection probes may graze the grid boundary on purpose; rasterize the
    // predicate directly so they do not trip the boundary warning.
    auto raster_at = [&](double r) {
        const ShapeSpec ball = ShapeSpec::ball(dim, origin, r);
        return rasterize_predicate(
            grid, [&ball](const Vec& x) { return ball.contains(x); },
            RasterMode::fractional, subsamples);
    };

    // measure(raster_at(r)) is a nondecreasing step function of r; bisect to
    // the plateau that best matches the target. hi starts at the largest
    // radius that still fits the grid.
    double lo = 0.0;
    double hi = 0.98 * grid.extent();
    GridFunction at_hi = raster_at(hi);
    if (measure(at_hi) < target_measure)
        throw ConfigError("matched_ball_raster: target measure exceeds what the grid extent holds");
    for (int it = 0; it < 120 && hi - lo > 1e-15 * grid.extent(); ++it) {
        const double mid = 0.5 * (lo + hi);
        GridFunction g = raster_at(mid);
        if (measure(g) >= target_measure) {
            hi = mid;
            at_hi = std::move(g);
        } else {
            lo = mid;
        }
    }
    // at_hi is the coarsest raster with measure >= target; the raster just
    // below has measure < target. Keep whichever is closer.
    GridFunction at_lo = raster_at(lo);
    if (target_measure - measure(at_lo) < measure(at_hi) - target_measure) return at_lo;
    return at_hi;
}

// ---------------------------------------------------------------------------
// Random set models

namespace {

double runif(std::mt19937_64& rng) {
    // Fixed mapping to (0,1); independent of library distribution internals.
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double runif(std::mt19937_64& rng, double a, double b) { return a + (b - a) * runif(rng); }

RandomSet random_boxes(int dim, std::uint64_t seed, const GridSpec& grid) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull);
    const double l = grid.extent();
    const int count = 2 + static_cast<int>(rng() % 4);
    std::vector<ShapeSpec> parts;
    parts.reserve(count);
    for (int b = 0; b < count; ++b) {
        Vec lo{0.0, 0.0, 0.0}, hi{0.0, 0.0, 0.0};
        for (int a = 0; a < dim; ++a) {
            const double c = runif(rng, -0.55 * l, 0.55 * l);
            const double half = runif(rng, 0.08 * l, 0.28 * l);
            lo[a] = std::max(c - half, -0.9 * l);
            hi[a] = std::min(c + half, 0.9 * l);
        }
        parts.push_back(ShapeSpec::box(dim, lo, hi));
    }
    ShapeSpec spec = ShapeSpec::union_of(std::move(parts));
    GridFunction raster = rasterize(spec, grid, RasterMode::fractional, 4, true);
    return RandomSet{std::move(spec), std::move(raster)};
}

RandomSet perturbed_ellipsoid(int dim, std::uint64_t seed, const GridSpec& grid, double amplitude) {
    if (amplitude < 0.0 || amplitude > 0.5)
        throw ConfigError("random_set: perturbation amplitude must lie in [0, 0.5]");
    std::mt19937_64 rng(seed * 0xbf58476d1ce4e5b9ull + 0x94d049bb133111ebull);
    const double r0 = std::pow(1.0 / unit_ball_volume(dim), 1.0 / dim);
    if (r0 * (1.0 + amplitude) > 0.92 * grid.extent())
        throw ConfigError("random_set: grid extent too small for a unit-measure perturbed ball");

    if (amplitude == 0.0) {
        // snap to the canonical measure-1 ball raster so the unperturbed
        // member of the family coincides with the reference used elsewhere
        ShapeSpec spec = ShapeSpec::ball(dim, Vec{0.0, 0.0, 0.0}, r0);
        GridFunction raster = matched_ball_raster(dim, 1.0, grid);
        return RandomSet{std::move(spec), std::move(raster)};
    }

    if (dim == 1) {
        const double a = -r0 * (1.0 + amplitude * runif(rng, -1.0, 1.0));
        const double b = r0 * (1.0 + amplitude * runif(rng, -1.0, 1.0));
        ShapeSpec spec = ShapeSpec::box(1, Vec{a, 0.0, 0.0}, Vec{b, 0.0, 0.0});
        GridFunction raster = rasterize(spec, grid, RasterMode::fractional, 4, true);
        return RandomSet{std::move(spec), std::move(raster)};
    }

    if (dim == 2) {
        // Smooth boundary field from circular modes 2..6 (mode 1 is mostly a translation).
        std::array<double, 5> cc{}, ss{};
        double norm = 0.0;
        for (int m = 0; m < 5; ++m) {
            cc[m] = runif(rng, -1.0, 1.0);
            ss[m] = runif(rng, -1.0, 1.0);
            norm += std::abs(cc[m]) + std::abs(ss[m]);
        }
        auto pred = [=](const Vec& x) {
            const double rho = std::hypot(x[0], x[1]);
            if (rho == 0.0) return true;
            const double theta = std::atan2(x[1], x[0]);
            double eta = 0.0;
            for (int m = 0; m < 5; ++m)
                eta += cc[m] * std::cos((m + 2) * theta) + ss[m] * std::sin((m + 2) * theta);
            eta /= norm;
            return rho <= r0 * (1.0 + amplitude * eta);
        };
        GridFunction raster = rasterize_predicate(grid, pred, RasterMode::fractional, 4);
        return RandomSet{std::nullopt, std::move(raster)};
    }

    // dim == 3: quadratic/cubic field in the unit direction vector (no linear
    // terms, which would act like a translation).
    std::array<double, 6> c{};
    double norm = 0.0;
    for (auto& v : c) {
        v = runif(rng, -1.0, 1.0);
        norm += std::abs(v);
    }
    auto pred = [=](const Vec& x) {
        const double rho = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        if (rho == 0.0) return true;
        const double u0 = x[0] / rho, u1 = x[1] / rho, u2 = x[2] / rho;
        double eta = c[0] * u0 * u1 + c[1] * u1 * u2 + c[2] * u0 * u2 +
                     c[3] * (u0 * u0 - u1 * u1) + c[4] * (u1 * u1 - u2 * u2) +
                     c[5] * u0 * u1 * u2;
        eta /= norm;
        return rho <= r0 * (1.0 + amplitude * eta);
    };
    GridFunction raster = rasterize_predicate(grid, pred, RasterMode::fractional, 4);
    return RandomSet{std::nullopt, std::move(raster)};
}

}  // namespace

RandomSet random_set(RandomModel model, int dim, std::uint64_t seed,
                     const GridSpec& grid, double amplitude) {
    if (dim != grid.dim()) throw ConfigError("random_set: dim and grid dimension differ");
    switch (model) {
        case RandomModel::boxes: return random_boxes(dim, seed, grid);
        case RandomModel::perturbed_ellipsoid: return perturbed_ellipsoid(dim, seed, grid, amplitude);
    }
    throw ConfigError("random_set: unknown model");
}

}  // namespace gwrs
