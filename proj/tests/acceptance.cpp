// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "bvosc/cantor.hpp"
#include "bvosc/localpc.hpp"
#include "bvosc/packing.hpp"
#include "bvosc/verify.hpp"

using namespace bvosc;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

PackingOptions opts(PackingMode mode, double eps, double h)
{
    PackingOptions o;
    o.mode = mode;
    o.eps = eps;
    o.h = h;
    return o;
}

Outcome poincare_bound()
{
    verify::detail::Timer t;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto cantor = cantor_function(CantorSpec({4, 32}, 2));
    double worst = 0.0;
    int tested = 0;
    for (int i = 0; i < 10000; ++i) {
        const double a = -2.0 + 2.0 * u(rng), len = 0.5 + 2.0 * u(rng);
        const auto f = i % 5 == 4 ? cantor : verify::random_sbv(rng, Interval(a, a + len));
        const Interval dom = f.domain();
        const double l = dom.length() * (0.01 + 0.99 * u(rng));
        const double lo = dom.a + (dom.length() - l) * u(rng);
        const auto r = oscillation(f, Interval(lo, lo + l));
        if (r.quotient) {
            worst = std::max(worst, *r.quotient);
            ++tested;
        }
    }
    const double s = t.seconds();
    return {worst <= 0.5 + 1e-9 && s < 10.0 && tested > 9000,
            fmt("max quotient %.12f over %d cubes with |Df| > 0, %.2f s", worst, tested, s)};
}

Outcome sbv_representation()
{
    verify::detail::Timer t;
    const auto f = verify::sbv_mix();
    const double g = solve_1d(f, f.domain(), opts(PackingMode::g_eps, 0x1p-8, 0x1p-12)).value;
    const double s = t.seconds();
    return {std::abs(g - 1.0) <= 0.05 && s < 60.0, fmt("G = %.6f (expected 1.0 +/- 5%%), %.2f s", g, s)};
}

Outcome pure_jump()
{
    double worst = 0.0;
    for (double height : {1.0, -2.5, 0.125})
        for (double eps : {0.5, 0.25, 0.125})
            for (double div : {4.0, 16.0}) {
                const auto f = verify::pure_jump(height);
                const double k = solve_1d(f, f.domain(), opts(PackingMode::k_eps, eps, eps / div)).value;
                worst = std::max(worst, std::abs(k - 0.5 * std::abs(height)));
            }
    return {worst <= 1e-9, fmt("max |K - |jump|/2| = %.3g over 18 lattices", worst)};
}

Outcome pure_linear()
{
    double worst = 0.0;
    for (double eps : {0.25, 0.125, 0.0625}) {
        const auto f = verify::pure_linear();
        worst = std::max(worst, std::abs(solve_1d(f, f.domain(), opts(PackingMode::k_eps, eps, 1.0 / 256)).value - 0.25));
    }
    return {worst <= 1e-3, fmt("max |K - 1/4| = %.3g for eps in {1/4, 1/8, 1/16}", worst)};
}

Outcome cantor_bands()
{
    verify::detail::Timer t;
    const auto m = verify::measure_cantor(CantorSpec({4, 32}, 2));
    const double s = t.seconds();
    return {m.k_jump >= 0.40 && m.k_affine <= 0.35 && s < 300.0,
            fmt("K(jump scale %.6g) = %.4f >= 0.40, K(affine scale %.6g) = %.4f <= 0.35, %.2f s", m.jump_scale,
                m.k_jump, m.affine_scale, m.k_affine, s)};
}

Outcome hadwiger()
{
    const Function2D half(kinds::HalfplaneIndicator{{1.0, 0.0}, 0.0, 0.0, 1.0});
    const Function2D quarter(kinds::PolygonIndicator{{{-0.5, -0.5}, {0.0, -0.5}, {0.0, 0.0}, {-0.5, 0.0}}, 0.0, 1.0});
    const double qh = poincare_quotient(half, Cube<2>::unit());
    const double qq = poincare_quotient(quarter, Cube<2>::unit());
    return {std::abs(qh - 0.5) <= 1e-3 && std::abs(qq - 0.375) <= 1e-3,
            fmt("half-cube %.6f, quarter-cube %.6f", qh, qq)};
}

Function2D random_2d(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    switch (rng() % 4) {
    case 0: return Function2D(kinds::Linear{{u(rng), u(rng)}});
    case 1: return Function2D(kinds::HalfplaneIndicator{{u(rng), u(rng)}, 0.2 * u(rng), u(rng), 1.0 + u(rng)});
    case 2:
        return Function2D(kinds::PolygonIndicator{
            {{-0.3 + 0.1 * u(rng), -0.3}, {0.3, -0.2 + 0.1 * u(rng)}, {0.1 * u(rng), 0.35}}, 0.0, 1.0 + u(rng)});
    default: return Function2D(kinds::Smooth{"sine", {1.0, 3.0 * u(rng), 3.0 * u(rng), u(rng)}});
    }
}

Outcome composition()
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> c(-0.25, 0.25), s(0.3, 0.5);
    std::bernoulli_distribution coin;
    double worst = 0.0;
    int n1 = 0, n2 = 0;
    while (n1 < 100) {
        const auto f = verify::random_sbv(rng, Interval(-1.0, 1.0));
        const Cube<1> q({c(rng)}, 2.0 * s(rng), {coin(rng)});
        const Cube<1> sub({c(rng)}, s(rng), {coin(rng)});
        if (!(f.total_variation(to_interval(q.compose(sub))) > 0.0))
            continue;
        const auto a = sample_on_unit_cube(rescale(rescale(f, q), sub), default_grid(1));
        const auto b = sample_on_unit_cube(rescale(f, q.compose(sub)), default_grid(1));
        worst = std::max(worst, l1_distance(a, b));
        ++n1;
    }
    while (n2 < 20) {
        const auto f = random_2d(rng);
        const Cube<2> q({c(rng), c(rng)}, s(rng), {coin(rng), coin(rng)});
        const Cube<2> sub({c(rng), c(rng)}, s(rng), {coin(rng), coin(rng)});
        if (!(total_variation(f, q.compose(sub)) > 1e-9))
            continue;
        const auto a = sample_on_unit_cube(rescale(rescale(f, q), sub), default_grid(2));
        const auto b = sample_on_unit_cube(rescale(f, q.compose(sub)), default_grid(2));
        worst = std::max(worst, l1_distance(a, b));
        ++n2;
    }
    return {worst <= 1e-3, fmt("max L1 gap %.3g over %d 1D and %d 2D cases", worst, n1, n2)};
}

Outcome cell_formula()
{
    const auto f = verify::sbv_mix();
    const double eps[] = {0x1p-4, 0x1p-5, 0x1p-6, 0x1p-7};
    const auto jump = cell_formula_check(f, Point<1>{0.0}, 0.9, eps);
    const auto ac = cell_formula_check(f, Point<1>{0.5}, 0.9, eps);
    const bool ok = jump.tangent && ac.tangent && jump.gap <= 1e-2 && ac.gap <= 1e-2 &&
                    std::abs(jump.p_value - 0.5) <= 1e-2 && std::abs(ac.p_value - 0.25) <= 1e-2;
    return {ok, fmt("jump: P = %.4f, tangent Osc = %.4f; a.c.: P = %.4f, tangent Osc = %.4f", jump.p_value,
                    jump.tangent_osc, ac.p_value, ac.tangent_osc)};
}

Outcome report_outcome(const verify::TheoremReport& r)
{
    std::size_t failed = 0;
    std::string first;
    for (const auto& c : r.checks)
        if (!c.pass() && failed++ == 0)
            first = ", first failure: " + c.label;
    return {r.pass(), fmt("%zu/%zu checks pass", r.checks.size() - failed, r.checks.size()) + first};
}

Outcome range_bound() { return report_outcome(verify::density_range(verify::default_range_functions())); }

Outcome tau_independence()
{
    const double jumps[] = {0.0};
    return report_outcome(verify::one_dim_theorem(verify::sbv_mix(), verify::OneDimConfig{}, jumps));
}

double brute_force(const std::vector<WeightedInterval>& items)
{
    double best = 0.0;
    const std::size_t n = items.size();
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        double w = 0.0;
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            if (!(mask >> i & 1u))
                continue;
            w += items[i].weight;
            for (std::size_t j = i + 1; j < n && ok; ++j)
                if (mask >> j & 1u)
                    ok = !(items[i].left < items[j].right && items[j].left < items[i].right);
        }
        if (ok)
            best = std::max(best, w);
    }
    return best;
}

Outcome dp_exactness()
{
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> pos(0, 60), len(1, 15), w(0, 4096), cnt(1, 20);
    int mismatches = 0;
    for (int t = 0; t < 50; ++t) {
        std::vector<WeightedInterval> items;
        for (int i = cnt(rng); i > 0; --i) {
            const int a = pos(rng);
            items.push_back({a / 8.0, (a + len(rng)) / 8.0, w(rng) / 256.0});
        }
        if (max_weight_disjoint(items).value != brute_force(items))
            ++mismatches;
    }
    return {mismatches == 0, fmt("%d/50 instances differ from exhaustive search", mismatches)};
}

Outcome good_family()
{
    struct Case {
        const char* name;
        BVFunction1D f;
        double eps;
    };
    const std::vector<Case> cases{{"mix", verify::sbv_mix(), 0.25},
                                  {"jump", verify::pure_jump(), 0.25},
                                  {"linear", verify::pure_linear(), 0.125},
                                  {"cantor(4,32)", cantor_function(CantorSpec({4, 32}, 2)), 0.125}};
    std::size_t cubes = 0, bad = 0;
    std::string empty;
    for (const auto& c : cases) {
        const auto opt = opts(PackingMode::k_eps, c.eps, c.eps / 64);
        const auto fam = solve_1d(c.f, c.f.domain(), opt);
        const auto rep = prune_and_resolve_1d(c.f, fam, 0.9, opt);
        if (rep.family.cubes.empty())
            empty += std::string(empty.empty() ? "" : ", ") + c.name;
        for (const auto& row : good_family_check(rep.family, c.f, 0.9)) {
            ++cubes;
            bad += !(row.quotient >= 0.125 && row.tv_inner >= row.tv / 16.0);
        }
    }
    return {bad == 0 && empty.empty(),
            fmt("%zu/%zu retained cubes good", cubes - bad, cubes) + (empty.empty() ? "" : "; empty: " + empty)};
}

}  // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"Poincare bound on 10^4 random cubes", poincare_bound},
        {"SBV representation G = |D^a|/4 + |D^j|/2", sbv_representation},
        {"pure jump K = |jump|/2", pure_jump},
        {"pure linear K = 1/4", pure_linear},
        {"Cantor staircase oscillation bands", cantor_bands},
        {"half-cube and quarter-cube quotients", hadwiger},
        {"composition rule for rescalings", composition},
        {"cell formula at jump and a.c. points", cell_formula},
        {"density range [1/4, 1/2]", range_bound},
        {"tau independence in 1D", tau_independence},
        {"interval scheduling DP is exact", dp_exactness},
        {"good-family conditions after prune-and-resolve", good_family},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
