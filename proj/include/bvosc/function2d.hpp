#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "bvosc/error.hpp"
#include "bvosc/geometry.hpp"

namespace bvosc {

namespace geom {

using Polygon = std::vector<Vec2>;

inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Vec2& a) { return std::hypot(a[0], a[1]); }

/// Signed shoelace area.
inline double signed_area(const Polygon& p)
{
    double s = 0.0;
    for (std::size_t i = 0, n = p.size(); i < n; ++i) {
        const Vec2& a = p[i];
        const Vec2& b = p[(i + 1) % n];
        s += a[0] * b[1] - a[1] * b[0];
    }
    return 0.5 * s;
}

/// Sutherland-Hodgman step: keep {x : dot(normal, x) >= offset}.
inline Polygon clip_halfplane(const Polygon& poly, const Vec2& normal, double offset)
{
    Polygon out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % n];
        const double dp = dot(normal, p) - offset;
        const double dq = dot(normal, q) - offset;
        if (dp >= 0.0)
            out.push_back(p);
        if ((dp >= 0.0) != (dq >= 0.0)) {
            const double t = dp / (dp - dq);
            out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
        }
    }
    return out;
}

/// Axis-aligned square [x0, x0+s] x [y0, y0+s].
struct Square {
    Vec2 lower{};
    double side = 1.0;

    Polygon polygon() const
    {
        const double x0 = lower[0], y0 = lower[1], x1 = x0 + side, y1 = y0 + side;
        return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
    }
    double area() const { return side * side; }
};

inline Polygon clip_to_square(Polygon poly, const Square& sq)
{
    const double x0 = sq.lower[0], y0 = sq.lower[1];
    poly = clip_halfplane(poly, {1.0, 0.0}, x0);
    poly = clip_halfplane(poly, {-1.0, 0.0}, -(x0 + sq.side));
    poly = clip_halfplane(poly, {0.0, 1.0}, y0);
    poly = clip_halfplane(poly, {0.0, -1.0}, -(y0 + sq.side));
    return poly;
}

/// Length of segment pq inside the open square. Pieces lying on the square's
/// boundary are excluded.
inline double segment_length_inside(const Vec2& p, const Vec2& q, const Square& sq)
{
    double t0 = 0.0, t1 = 1.0;
    const double dx = q[0] - p[0], dy = q[1] - p[1];
    const std::array<double, 4> pk{-dx, dx, -dy, dy};
    const std::array<double, 4> qk{p[0] - sq.lower[0], sq.lower[0] + sq.side - p[0], p[1] - sq.lower[1],
                                   sq.lower[1] + sq.side - p[1]};
    for (int i = 0; i < 4; ++i) {
        if (pk[i] == 0.0) {
            if (qk[i] < 0.0)
                return 0.0;
            continue;
        }
        const double r = qk[i] / pk[i];
        if (pk[i] < 0.0)
            t0 = std::max(t0, r);
        else
            t1 = std::min(t1, r);
    }
    if (t1 <= t0)
        return 0.0;
    const Vec2 a{p[0] + t0 * dx, p[1] + t0 * dy};
    const Vec2 b{p[0] + t1 * dx, p[1] + t1 * dy};
    const double eps = 1e-12 * std::max(1.0, sq.side);
    const double xs[2] = {sq.lower[0], sq.lower[0] + sq.side};
    const double ys[2] = {sq.lower[1], sq.lower[1] + sq.side};
    for (double x : xs)
        if (std::abs(a[0] - x) <= eps && std::abs(b[0] - x) <= eps)
            return 0.0;
    for (double y : ys)
        if (std::abs(a[1] - y) <= eps && std::abs(b[1] - y) <= eps)
            return 0.0;
    return norm({b[0] - a[0], b[1] - a[1]});
}

/// Length of the line {dot(n, x) = c} (n unit) inside the open square.
inline double line_length_inside(const Vec2& n, double c, const Square& sq)
{
    const Vec2 base{c * n[0], c * n[1]};
    const Vec2 dir{-n[1], n[0]};
    const double reach = 4.0 * (std::abs(sq.lower[0]) + std::abs(sq.lower[1]) + sq.side + std::abs(c) + 1.0);
    return segment_length_inside({base[0] - reach * dir[0], base[1] - reach * dir[1]},
                                 {base[0] + reach * dir[0], base[1] + reach * dir[1]}, sq);
}

inline bool point_in_polygon(const Polygon& poly, const Vec2& x)
{
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        if ((a[1] > x[1]) != (b[1] > x[1])) {
            const double xc = a[0] + (x[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if (x[0] < xc)
                inside = !inside;
        }
    }
    return inside;
}

}  // namespace geom

/// E|X + Y| for independent X ~ U(-a/2, a/2), Y ~ U(-b/2, b/2).
inline double mean_abs_uniform_sum(double a, double b)
{
    a = std::abs(a);
    b = std::abs(b);
    if (a < b)
        std::swap(a, b);
    if (a == 0.0)
        return 0.0;
    if (b == 0.0)
        return 0.25 * a;
    // trapezoid density: 1/a on [0, c], (d - z)/(ab) on [c, d]
    const double c = 0.5 * (a - b), d = 0.5 * (a + b);
    const double flat = c * c / (2.0 * a);
    const double slope = (d * (d * d - c * c) / 2.0 - (d * d * d - c * c * c) / 3.0) / (a * b);
    return 2.0 * (flat + slope);
}

namespace kinds {

struct Linear {
    Vec2 gradient{1.0, 0.0};
};

/// low on {dot(normal, x) < offset}, high on {dot(normal, x) >= offset}.
struct HalfplaneIndicator {
    Vec2 normal{1.0, 0.0};
    double offset = 0.0;
    double low = 0.0;
    double high = 1.0;
};

struct PolygonIndicator {
    geom::Polygon vertices;
    double low = 0.0;
    double high = 1.0;
};

/// Closed-form smooth (or Lipschitz) formulas evaluated by quadrature.
///   quadratic:   p0 x^2 + p1 y^2 + p2 x y
///   sine:        p0 sin(p1 x + p2 y + p3)
///   abs_linear:  |p0 x + p1 y - p2|
struct Smooth {
    std::string formula = "quadratic";
    std::vector<double> params{1.0, 1.0, 0.0};
};

}  // namespace kinds

using FunctionKind =
    std::variant<kinds::Linear, kinds::HalfplaneIndicator, kinds::PolygonIndicator, kinds::Smooth>;

/// Affine change of variables and values:
/// f(x) = alpha * g(scale * F x + shift) + beta, F = diag(+-1) from `flip`.
struct Frame {
    double scale = 1.0;
    std::array<bool, 2> flip{};
    Vec2 shift{};
    double alpha = 1.0;
    double beta = 0.0;

    bool is_identity() const
    {
        return scale == 1.0 && !flip[0] && !flip[1] && shift == Vec2{} && alpha == 1.0 && beta == 0.0;
    }

    Vec2 to_base(const Vec2& x) const
    {
        return {scale * (flip[0] ? -x[0] : x[0]) + shift[0], scale * (flip[1] ? -x[1] : x[1]) + shift[1]};
    }
};

/// Raw statistics of a function on a cube, before assembling an OscResult.
struct CubeStats {
    double mean = 0.0;
    double osc = 0.0;
    double tv = 0.0;
    double osc_error = 0.0;
    double tv_error = 0.0;
};

class Function2D {
public:
    explicit Function2D(FunctionKind kind, Cube<2> domain = Cube<2>::unit(), int quad_order = 64,
                        Frame frame = {})
        : kind_(std::move(kind)), domain_(domain), quad_order_(quad_order), frame_(frame)
    {
        if (quad_order_ < 2)
            throw Error(Errc::invalid_argument, "quad_order must be >= 2");
        if (!(frame_.scale > 0.0))
            throw Error(Errc::invalid_argument, "frame scale must be positive");
        if (auto* h = std::get_if<kinds::HalfplaneIndicator>(&kind_)) {
            const double n = geom::norm(h->normal);
            if (!(n > 0.0))
                throw Error(Errc::invalid_argument, "halfplane normal must be nonzero");
        }
        if (auto* p = std::get_if<kinds::PolygonIndicator>(&kind_); p && p->vertices.size() < 3)
            throw Error(Errc::invalid_argument, "polygon needs at least 3 vertices");
        if (auto* s = std::get_if<kinds::Smooth>(&kind_))
            check_smooth(*s);
    }

    const FunctionKind& kind() const { return kind_; }
    const Cube<2>& domain() const { return domain_; }
    int quad_order() const { return quad_order_; }
    const Frame& frame() const { return frame_; }

    bool is_indicator() const
    {
        return std::holds_alternative<kinds::HalfplaneIndicator>(kind_) ||
               std::holds_alternative<kinds::PolygonIndicator>(kind_);
    }
    bool closed_form() const { return !std::holds_alternative<kinds::Smooth>(kind_); }

    double operator()(const Vec2& x) const { return frame_.alpha * base_value(frame_.to_base(x)) + frame_.beta; }

    /// Statistics on the open cube q (world coordinates).
    CubeStats stats(const Cube<2>& q) const
    {
        if (!domain_.contains(q, 1e-12 * std::max(1.0, domain_.side)))
            throw Error(Errc::cube_outside_domain, "cube not contained in the function domain");
        const Vec2 c = frame_.to_base(q.center);
        const double s = frame_.scale * q.side;
        const geom::Square sq{{c[0] - 0.5 * s, c[1] - 0.5 * s}, s};
        CubeStats st = std::visit([&](const auto& k) { return base_stats(k, sq); }, kind_);
        const double a = std::abs(frame_.alpha);
        st.mean = frame_.alpha * st.mean + frame_.beta;
        st.osc *= a;
        st.osc_error *= a;
        st.tv *= a / frame_.scale;
        st.tv_error *= a / frame_.scale;
        return st;
    }

    /// Average of |f - c| over the open cube q. Closed form for indicators,
    /// midpoint quadrature with quad_order^2 cells otherwise.
    double mean_abs_deviation(const Cube<2>& q, double c) const
    {
        const Vec2 center = frame_.to_base(q.center);
        const double s = frame_.scale * q.side;
        const geom::Square sq{{center[0] - 0.5 * s, center[1] - 0.5 * s}, s};
        if (frame_.alpha == 0.0)
            return std::abs(frame_.beta - c);
        const double target = (c - frame_.beta) / frame_.alpha;
        const double a = std::abs(frame_.alpha);
        if (is_indicator()) {
            const CubeStats st = std::visit([&](const auto& k) { return base_stats(k, sq); }, kind_);
            double low = 0.0, high = 1.0;
            std::visit(
                [&](const auto& k) {
                    using K = std::decay_t<decltype(k)>;
                    if constexpr (std::is_same_v<K, kinds::HalfplaneIndicator> ||
                                  std::is_same_v<K, kinds::PolygonIndicator>) {
                        low = k.low;
                        high = k.high;
                    }
                },
                kind_);
            const double theta = high != low ? (st.mean - low) / (high - low) : 0.0;
            return a * ((1.0 - theta) * std::abs(low - target) + theta * std::abs(high - target));
        }
        const int n = quad_order_;
        const double h = s / n;
        double sum = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                sum += std::abs(base_value({sq.lower[0] + (i + 0.5) * h, sq.lower[1] + (j + 0.5) * h}) - target);
        return a * sum / (static_cast<double>(n) * n);
    }

    /// y -> value_scale * f(T_Q y) + value_shift on Q0.
    Function2D pullback(const Cube<2>& q, double value_scale, double value_shift) const
    {
        Frame fr;
        fr.scale = frame_.scale * q.side;
        for (int i = 0; i < 2; ++i) {
            fr.flip[i] = frame_.flip[i] != q.flip[i];
            fr.shift[i] = frame_.scale * (frame_.flip[i] ? -q.center[i] : q.center[i]) + frame_.shift[i];
        }
        fr.alpha = value_scale * frame_.alpha;
        fr.beta = value_scale * frame_.beta + value_shift;
        return Function2D(kind_, Cube<2>::unit(), quad_order_, fr);
    }

private:
    static void check_smooth(const kinds::Smooth& s)
    {
        std::size_t need = 0;
        if (s.formula == "quadratic" || s.formula == "abs_linear")
            need = 3;
        else if (s.formula == "sine")
            need = 4;
        else
            throw Error(Errc::invalid_argument, "unknown smooth formula '" + s.formula + "'");
        if (s.params.size() != need)
            throw Error(Errc::invalid_argument, "smooth formula '" + s.formula + "' expects " +
                                                    std::to_string(need) + " params");
    }

    double base_value(const Vec2& x) const
    {
        return std::visit(
            [&](const auto& k) -> double {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, kinds::Linear>) {
                    return geom::dot(k.gradient, x);
                } else if constexpr (std::is_same_v<K, kinds::HalfplaneIndicator>) {
                    return geom::dot(k.normal, x) >= k.offset * geom::norm(k.normal) ? k.high : k.low;
                } else if constexpr (std::is_same_v<K, kinds::PolygonIndicator>) {
                    return geom::point_in_polygon(k.vertices, x) ? k.high : k.low;
                } else {
                    return smooth_value(k, x);
                }
            },
            kind_);
    }

    static double smooth_value(const kinds::Smooth& s, const Vec2& x)
    {
        const auto& p = s.params;
        if (s.formula == "quadratic")
            return p[0] * x[0] * x[0] + p[1] * x[1] * x[1] + p[2] * x[0] * x[1];
        if (s.formula == "sine")
            return p[0] * std::sin(p[1] * x[0] + p[2] * x[1] + p[3]);
        return std::abs(p[0] * x[0] + p[1] * x[1] - p[2]);
    }

    static double smooth_grad_norm(const kinds::Smooth& s, const Vec2& x)
    {
        const auto& p = s.params;
        if (s.formula == "quadratic")
            return geom::norm({2.0 * p[0] * x[0] + p[2] * x[1], 2.0 * p[1] * x[1] + p[2] * x[0]});
        if (s.formula == "sine")
            return std::abs(p[0] * std::cos(p[1] * x[0] + p[2] * x[1] + p[3])) * geom::norm({p[1], p[2]});
        return geom::norm({p[0], p[1]});
    }

    static CubeStats base_stats(const kinds::Linear& k, const geom::Square& sq)
    {
        CubeStats st;
        const Vec2 c{sq.lower[0] + 0.5 * sq.side, sq.lower[1] + 0.5 * sq.side};
        st.mean = geom::dot(k.gradient, c);
        st.osc = mean_abs_uniform_sum(k.gradient[0] * sq.side, k.gradient[1] * sq.side);
        st.tv = geom::norm(k.gradient) * sq.area();
        return st;
    }

    static CubeStats two_valued(double theta, double low, double high, double interface_length)
    {
        CubeStats st;
        theta = std::clamp(theta, 0.0, 1.0);
        st.mean = low + (high - low) * theta;
        st.osc = 2.0 * theta * (1.0 - theta) * std::abs(high - low);
        st.tv = std::abs(high - low) * interface_length;
        return st;
    }

    static CubeStats base_stats(const kinds::HalfplaneIndicator& k, const geom::Square& sq)
    {
        const double nn = geom::norm(k.normal);
        const Vec2 n{k.normal[0] / nn, k.normal[1] / nn};
        const double theta = std::abs(geom::signed_area(geom::clip_halfplane(sq.polygon(), n, k.offset))) / sq.area();
        return two_valued(theta, k.low, k.high, geom::line_length_inside(n, k.offset, sq));
    }

    static CubeStats base_stats(const kinds::PolygonIndicator& k, const geom::Square& sq)
    {
        const double theta = std::abs(geom::signed_area(geom::clip_to_square(k.vertices, sq))) / sq.area();
        double len = 0.0;
        for (std::size_t i = 0, n = k.vertices.size(); i < n; ++i)
            len += geom::segment_length_inside(k.vertices[i], k.vertices[(i + 1) % n], sq);
        return two_valued(theta, k.low, k.high, len);
    }

    CubeStats base_stats(const kinds::Smooth& k, const geom::Square& sq) const
    {
        auto grid_tv = [&](int n) {
            const double h = sq.side / n;
            double tv = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    tv += smooth_grad_norm(k, {sq.lower[0] + (i + 0.5) * h, sq.lower[1] + (j + 0.5) * h});
            return tv * h * h;
        };
        const int n = quad_order_;
        const double h = sq.side / n;
        std::vector<double> vals(static_cast<std::size_t>(n) * n);
        double sum = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double v = smooth_value(k, {sq.lower[0] + (i + 0.5) * h, sq.lower[1] + (j + 0.5) * h});
                vals[static_cast<std::size_t>(i) * n + j] = v;
                sum += v;
            }
        CubeStats st;
        st.mean = sum / static_cast<double>(vals.size());
        double dev = 0.0;
        for (double v : vals)
            dev += std::abs(v - st.mean);
        st.osc = dev / static_cast<double>(vals.size());
        st.tv = grid_tv(n);
        st.tv_error = std::abs(st.tv - grid_tv(std::max(1, n / 2)));
        // per-cell error <= cell diameter * |D(f - m)|(cell), summed and averaged,
        // plus the same bound on the mean
        st.osc_error = 2.0 * std::sqrt(2.0) * h * st.tv / sq.area();
        return st;
    }

    FunctionKind kind_;
    Cube<2> domain_;
    int quad_order_ = 64;
    Frame frame_;
};

}  // namespace bvosc
