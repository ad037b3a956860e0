#include <catch_amalgamated.hpp>

#include <random>

#include "bvosc/geometry.hpp"
#include "bvosc/piecewise_affine.hpp"

using namespace bvosc;
using Catch::Approx;

TEST_CASE("interval rejects a >= b")
{
    REQUIRE_THROWS_AS(Interval(1.0, 1.0), Error);
    try {
        Interval(2.0, 1.0);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::degenerate_cube);
    }
    CHECK(Interval(-1.0, 3.0).length() == 4.0);
}

TEST_CASE("cube rejects nonpositive side")
{
    REQUIRE_THROWS_AS(Cube<2>({0.0, 0.0}, 0.0), Error);
    REQUIRE_THROWS_AS(Cube<1>({0.0}, -1.0), Error);
}

TEST_CASE("T_Q maps the unit cube onto Q")
{
    const Cube<2> q({0.3, -0.2}, 0.5, {true, false});
    const auto lo = q.from_unit({-0.5, -0.5});
    CHECK(lo[0] == Approx(0.55));  // flipped axis
    CHECK(lo[1] == Approx(-0.45));
    const Point<2> y{0.1, 0.37};
    const auto back = q.to_unit(q.from_unit(y));
    CHECK(back[0] == Approx(y[0]));
    CHECK(back[1] == Approx(y[1]));
}

TEST_CASE("shrunk cube keeps center")
{
    const Cube<2> q({1.0, 2.0}, 4.0);
    const auto s = q.shrunk(0.25);
    CHECK(s.center == q.center);
    CHECK(s.side == 1.0);
    CHECK(q.in_shrunk({1.5, 2.5}, 0.25));
    CHECK_FALSE(q.in_shrunk({1.6, 2.0}, 0.25));
}

TEST_CASE("compose agrees with pointwise composition")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.4, 0.4), side(0.05, 0.5);
    std::bernoulli_distribution coin;
    for (int t = 0; t < 200; ++t) {
        const Cube<2> q({u(rng), u(rng)}, side(rng), {coin(rng), coin(rng)});
        const Cube<2> s({0.5 * u(rng), 0.5 * u(rng)}, side(rng), {coin(rng), coin(rng)});
        const Cube<2> qs = q.compose(s);
        const Point<2> y{u(rng), u(rng)};
        const auto a = q.from_unit(s.from_unit(y));
        const auto b = qs.from_unit(y);
        CHECK(a[0] == Approx(b[0]).margin(1e-14));
        CHECK(a[1] == Approx(b[1]).margin(1e-14));
    }
}

TEST_CASE("containment and interior disjointness allow abutment")
{
    const Cube<1> a({0.25}, 0.5), b({0.75}, 0.5), c({0.5}, 0.5);
    CHECK(a.interior_disjoint(b));
    CHECK_FALSE(a.interior_disjoint(c));
    CHECK(Cube<1>({0.5}, 1.0).contains(a));
    CHECK_FALSE(a.contains(c));
}

TEST_CASE("piecewise affine primitives and deviations")
{
    // 0 on (0,1) then 1 + (x-1) on (1,2)
    const PiecewiseAffine pw({0.0, 1.0, 2.0}, {0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0});
    CHECK(pw(0.5) == 0.0);
    CHECK(pw(1.5) == Approx(1.5));
    CHECK(pw.left_limit(1.0) == 0.0);
    CHECK(pw.integral(0.0, 2.0) == Approx(1.5));
    CHECK(pw.variation(0.0, 2.0, 1e-12) == Approx(2.0));
    CHECK(pw.variation(1.0, 2.0, 1e-12) == Approx(1.0));  // jump on the boundary is excluded
    CHECK(pw.abs_deviation(0.0, 1.0, 0.25) == Approx(0.25));
    CHECK(pw.max_abs_deviation(0.0, 2.0, 0.0) == Approx(2.0));
}

TEST_CASE("abs_affine_integral handles sign changes")
{
    CHECK(abs_affine_integral(-1.0, 2.0, 0.0, 1.0) == Approx(0.5));
    CHECK(abs_affine_integral(1.0, 0.0, 0.0, 3.0) == Approx(3.0));
    CHECK(abs_affine_integral(0.0, -1.0, 0.0, 2.0) == Approx(2.0));
}
