#include <catch_amalgamated.hpp>

#include <random>

#include "bvosc/cantor.hpp"
#include "bvosc/oscillation.hpp"
#include "bvosc/verify.hpp"

using namespace bvosc;
using Catch::Approx;

namespace {

// midpoint Riemann sums, independent of the closed-form path
OscResult brute_force(const BVFunction1D& f, const Interval& q, int n)
{
    const double h = q.length() / n;
    std::vector<double> v(n);
    double mean = 0.0;
    for (int i = 0; i < n; ++i)
        mean += v[i] = f(q.a + (i + 0.5) * h);
    mean /= n;
    double osc = 0.0;
    for (double x : v)
        osc += std::abs(x - mean);
    OscResult r;
    r.mean = mean;
    r.osc = osc / n;
    return r;
}

}  // namespace

TEST_CASE("indicator of (0, 1/2) on (-1/2, 1/2)")
{
    const BVFunction1D f(Interval(-0.5, 0.5), {}, {0.0}, {{0.0, 1.0}});
    const auto r = oscillation(f, Interval(-0.5, 0.5));
    CHECK(r.mean == Approx(0.5));
    CHECK(r.osc == Approx(0.5).margin(1e-12));
    CHECK(*r.quotient == Approx(0.5));
}

TEST_CASE("constant has zero oscillation and undefined quotient")
{
    const auto f = BVFunction1D::constant(Interval(-1.0, 1.0), 3.5);
    const auto r = oscillation(f, Interval(-0.2, 0.7));
    CHECK(r.osc == 0.0);
    CHECK(r.tv == 0.0);
    CHECK_FALSE(r.quotient);
    try {
        poincare_quotient(f, Interval(-0.2, 0.7));
        FAIL("expected undefined quotient");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::undefined_quotient);
    }
}

TEST_CASE("identity on (-1/2, 1/2)")
{
    const auto f = BVFunction1D::affine(Interval(-0.5, 0.5), 1.0);
    const auto r = oscillation(f, Interval(-0.5, 0.5));
    CHECK(r.osc == Approx(0.25).margin(1e-15));
    CHECK(r.tv == Approx(1.0));
    CHECK(*r.quotient == Approx(0.25));
}

TEST_CASE("total variation examples")
{
    CHECK(total_variation(BVFunction1D::affine(Interval(0.0, 1.0), 1.0), Interval(0.0, 1.0)) == Approx(1.0));
    const BVFunction1D atom(Interval(0.0, 1.0), {}, {0.0}, {{0.4, 3.0}});
    CHECK(total_variation(atom, Interval(0.1, 0.9)) == Approx(3.0));
    CHECK(total_variation(atom, Interval(0.4, 0.9)) == 0.0);  // atom on the boundary
    CHECK(total_variation(atom, Interval(0.1, 0.4)) == 0.0);
    const auto u = cantor_function(CantorSpec({4, 32}, 2));
    CHECK(total_variation(u, Interval(0.0, 1.0)) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cube outside the domain is rejected")
{
    const auto f = BVFunction1D::affine(Interval(0.0, 1.0), 1.0);
    try {
        oscillation(f, Interval(0.5, 1.5));
        FAIL("expected cube_outside_domain");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::cube_outside_domain);
    }
}

TEST_CASE("variation splits into its three parts")
{
    const BVFunction1D f(Interval(0.0, 1.0), {0.5}, {2.0, -1.0}, {{0.25, -0.5}},
                         CantorPart{CantorSpec({3}, 1), 0.5, 0.0});
    const Interval q(0.1, 0.9);
    CHECK(f.absolutely_continuous_variation(q) == Approx(2.0 * 0.4 + 0.4));
    CHECK(f.jump_variation(q) == Approx(0.5));
    // stage-1 components of length 1/9 at 0, 1/3, 2/3; (0.1, 0.9) cuts the first one
    const double slope = 0.5 * 3.0;
    CHECK(f.cantor_variation(q) == Approx(slope * (1.0 / 9 - 0.1) + slope / 9 + slope / 9));
}

TEST_CASE("closed form agrees with Riemann sums on random functions")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 40; ++t) {
        const auto f = verify::random_sbv(rng, Interval(0.0, 1.0));
        double a = u(rng), b = u(rng);
        if (a > b)
            std::swap(a, b);
        if (b - a < 0.05)
            continue;
        const auto exact = oscillation(f, Interval(a, b));
        const auto approx = brute_force(f, Interval(a, b), 20000);
        const double scale = 1.0 + exact.tv;
        CHECK(exact.mean == Approx(approx.mean).margin(1e-3 * scale));
        CHECK(exact.osc == Approx(approx.osc).margin(1e-3 * scale));
    }
}

TEST_CASE("oscillation is homogeneous and shift invariant")
{
    std::mt19937_64 rng(5);
    const auto f = verify::random_sbv(rng, Interval(0.0, 1.0));
    const auto& pw = f.pieces();
    std::vector<double> vals = pw.values(), slopes = pw.slopes(), jumps = pw.jumps();
    for (auto& v : vals)
        v = -3.0 * v + 7.0;
    for (auto& s : slopes)
        s *= -3.0;
    for (auto& j : jumps)
        j *= -3.0;
    const auto g = BVFunction1D::from_pieces(PiecewiseAffine(pw.knots(), vals, slopes, jumps));
    const Interval q(0.13, 0.77);
    const auto rf = oscillation(f, q), rg = oscillation(g, q);
    CHECK(rg.osc == Approx(3.0 * rf.osc));
    CHECK(rg.tv == Approx(3.0 * rf.tv));
    if (rf.quotient)
        CHECK(*rg.quotient == Approx(*rf.quotient));
}

TEST_CASE("quotient is invariant under x -> lambda x + v")
{
    const BVFunction1D f(Interval(0.0, 1.0), {0.3}, {1.0, -2.0}, {{0.6, 0.7}});
    const double lam = 2.5, v = -1.0;
    const BVFunction1D g(Interval(v, v + lam), {v + lam * 0.3}, {1.0 / lam, -2.0 / lam}, {{v + lam * 0.6, 0.7}});
    CHECK(poincare_quotient(g, Interval(v + lam * 0.1, v + lam * 0.9)) ==
          Approx(poincare_quotient(f, Interval(0.1, 0.9))));
}

TEST_CASE("variation is additive across a point without mass")
{
    const BVFunction1D f(Interval(0.0, 1.0), {0.3}, {1.0, -2.0}, {{0.6, 0.7}});
    const double whole = f.total_variation(Interval(0.0, 1.0));
    CHECK(f.total_variation(Interval(0.0, 0.5)) + f.total_variation(Interval(0.5, 1.0)) == Approx(whole));
    // the atom on the shared boundary is lost
    CHECK(f.total_variation(Interval(0.0, 0.6)) + f.total_variation(Interval(0.6, 1.0)) == Approx(whole - 0.7));
}

TEST_CASE("invalid 1D specs are rejected")
{
    CHECK_THROWS_AS(BVFunction1D(Interval(0.0, 1.0), {0.5}, {1.0}), Error);
    CHECK_THROWS_AS(BVFunction1D(Interval(0.0, 1.0), {1.5}, {1.0, 1.0}), Error);
    CHECK_THROWS_AS(BVFunction1D(Interval(0.0, 1.0), {}, {1.0}, {{0.5, 1.0}, {0.5, 2.0}}), Error);
    CHECK_THROWS_AS(BVFunction1D(Interval(0.0, 1.0), {}, {1.0}, {{1.0, 1.0}}), Error);
}
