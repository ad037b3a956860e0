#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <sstream>

#include "bvosc/error.hpp"

namespace bvosc {

template <std::size_t N>
using Point = std::array<double, N>;

using Vec2 = Point<2>;

/// Open interval (a, b).
struct Interval {
    double a = 0.0;
    double b = 1.0;

    Interval() = default;
    Interval(double lo, double hi) : a(lo), b(hi)
    {
        if (!(lo < hi)) {
            std::ostringstream os;
            os << "interval (" << lo << ", " << hi << ") has a >= b";
            throw Error(Errc::degenerate_cube, os.str());
        }
    }

    double length() const { return b - a; }
    double midpoint() const { return 0.5 * (a + b); }
    bool contains(const Interval& other, double tol = 1e-12) const
    {
        return other.a >= a - tol && other.b <= b + tol;
    }

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Oriented axis-aligned open cube in R^N.
///
/// `flip[i]` selects the orientation of the i-th axis of T_Q, the affine
/// map sending Q0 = (-1/2, 1/2)^N onto the cube.
template <std::size_t N>
struct Cube {
    Point<N> center{};
    double side = 1.0;
    std::array<bool, N> flip{};

    Cube() = default;
    Cube(Point<N> c, double l, std::array<bool, N> f = {}) : center(c), side(l), flip(f)
    {
        if (!(l > 0.0) || !std::isfinite(l))
            throw Error(Errc::degenerate_cube, "cube side must be positive");
    }

    static Cube unit() { return Cube(Point<N>{}, 1.0); }

    static Cube from_corner(const Point<N>& lower, double l)
    {
        Point<N> c;
        for (std::size_t i = 0; i < N; ++i)
            c[i] = lower[i] + 0.5 * l;
        return Cube(c, l);
    }

    double lower(std::size_t i) const { return center[i] - 0.5 * side; }
    double upper(std::size_t i) const { return center[i] + 0.5 * side; }
    double volume() const { return std::pow(side, static_cast<double>(N)); }

    /// Concentric contraction tau*Q.
    Cube shrunk(double tau) const
    {
        Cube q = *this;
        q.side = tau * side;
        return q;
    }

    /// T_Q y for y in Q0.
    Point<N> from_unit(const Point<N>& y) const
    {
        Point<N> x;
        for (std::size_t i = 0; i < N; ++i)
            x[i] = center[i] + side * (flip[i] ? -y[i] : y[i]);
        return x;
    }

    Point<N> to_unit(const Point<N>& x) const
    {
        Point<N> y;
        for (std::size_t i = 0; i < N; ++i) {
            double t = (x[i] - center[i]) / side;
            y[i] = flip[i] ? -t : t;
        }
        return y;
    }

    /// T_Q(S) for a cube S given in the coordinates of Q0.
    Cube compose(const Cube& s) const
    {
        Cube q;
        q.center = from_unit(s.center);
        q.side = side * s.side;
        for (std::size_t i = 0; i < N; ++i)
            q.flip[i] = flip[i] != s.flip[i];
        return q;
    }

    /// Closed containment x in tau*Q (the admissibility test for P^tau).
    bool in_shrunk(const Point<N>& x, double tau, double tol = 1e-12) const
    {
        for (std::size_t i = 0; i < N; ++i)
            if (std::abs(x[i] - center[i]) > 0.5 * tau * side + tol)
                return false;
        return true;
    }

    bool contains(const Cube& other, double tol = 1e-12) const
    {
        for (std::size_t i = 0; i < N; ++i)
            if (other.lower(i) < lower(i) - tol || other.upper(i) > upper(i) + tol)
                return false;
        return true;
    }

    /// Open interiors are disjoint; shared faces are allowed.
    bool interior_disjoint(const Cube& other, double tol = 1e-12) const
    {
        for (std::size_t i = 0; i < N; ++i)
            if (upper(i) <= other.lower(i) + tol || other.upper(i) <= lower(i) + tol)
                return true;
        return false;
    }

    Interval axis(std::size_t i) const { return Interval(lower(i), upper(i)); }
};

inline Interval to_interval(const Cube<1>& q) { return Interval(q.lower(0), q.upper(0)); }

inline Cube<1> to_cube(const Interval& i) { return Cube<1>({i.midpoint()}, i.length()); }

}  // namespace bvosc
