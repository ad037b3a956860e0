#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <type_traits>
#include <vector>

#include "bvosc/bv1d.hpp"
#include "bvosc/error.hpp"
#include "bvosc/function2d.hpp"
#include "bvosc/geometry.hpp"
#include "bvosc/oscillation.hpp"
#include "bvosc/parallel.hpp"

namespace bvosc {

template <std::size_t N>
using FunctionFor = std::conditional_t<N == 1, BVFunction1D, Function2D>;

template <class F>
inline constexpr std::size_t dimension_of = std::is_same_v<F, BVFunction1D> ? 1 : 2;

// ---- rescaling ---------------------------------------------------------------

/// f_Q(y) = (f(T_Q y) - mean_Q f) ell(Q)^{n-1} / |Df|(Q) on Q0, exactly.
inline BVFunction1D rescale(const BVFunction1D& f, const Cube<1>& q)
{
    const Interval iv = to_interval(q);
    const OscResult r = oscillation(f, iv);
    if (!(r.tv > 0.0))
        throw Error(Errc::undefined_quotient, "rescaling needs |Df|(Q) > 0");
    const PiecewiseAffine& pw = f.pieces();
    const double snap = f.snap();

    // pieces of f restricted to Q, in x order
    std::vector<double> xs{iv.a};
    for (double t : pw.knots())
        if (t > iv.a + snap && t < iv.b - snap)
            xs.push_back(t);
    xs.push_back(iv.b);

    const double vscale = 1.0 / r.tv;
    const double ell = q.side;
    const bool flip = q.flip[0];
    const std::size_t m = xs.size() - 1;
    std::vector<double> knots(m + 1), values(m), slopes(m), jumps(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        const double x0 = xs[k], x1 = xs[k + 1];
        const std::size_t piece = pw.locate(0.5 * (x0 + x1));
        const double s = pw.slopes()[piece];
        const double v0 = pw.values()[piece] + s * (x0 - pw.knots()[piece]);
        if (!flip) {
            knots[k] = (x0 - q.center[0]) / ell;
            values[k] = (v0 - r.mean) * vscale;
            slopes[k] = s * ell * vscale;
            if (k > 0)
                jumps[k] = pw.jumps()[pw.locate(x0)] * vscale * (pw.knots()[pw.locate(x0)] == x0 ? 1.0 : 0.0);
        } else {
            const std::size_t kk = m - 1 - k;
            knots[kk + 1] = -(x0 - q.center[0]) / ell;
            values[kk] = (v0 + s * (x1 - x0) - r.mean) * vscale;
            slopes[kk] = -s * ell * vscale;
            if (k > 0)
                jumps[kk + 1] = -pw.jumps()[pw.locate(x0)] * vscale * (pw.knots()[pw.locate(x0)] == x0 ? 1.0 : 0.0);
        }
    }
    if (!flip)
        knots[m] = (xs[m] - q.center[0]) / ell;
    else
        knots[0] = -(xs[m] - q.center[0]) / ell;
    knots.front() = -0.5;
    knots.back() = 0.5;
    return BVFunction1D::from_pieces(
        PiecewiseAffine(std::move(knots), std::move(values), std::move(slopes), std::move(jumps)));
}

inline Function2D rescale(const Function2D& f, const Cube<2>& q)
{
    const OscResult r = oscillation(f, q);
    if (!(r.tv > 0.0))
        throw Error(Errc::undefined_quotient, "rescaling needs |Df|(Q) > 0");
    const double vscale = q.side / r.tv;
    return f.pullback(q, vscale, -r.mean * vscale);
}

// ---- sampled tangents ----------------------------------------------------------

/// A rescaled function sampled at cell midpoints of a uniform grid over Q0
/// (row-major, first index along the first axis).
template <std::size_t N>
struct TangentCandidate {
    std::size_t grid = 0;
    std::vector<double> samples;
    std::vector<Cube<N>> source_cubes;
    std::vector<double> gaps;  // L1(Q0) distance between consecutive rescalings
    double l1_cauchy_gap = std::numeric_limits<double>::infinity();
    bool converged = false;
    double osc = 0.0;
    double tv_estimate = 0.0;
    double mean = 0.0;
    std::optional<FunctionFor<N>> exact;  // the last rescaling, when known
};

template <class F>
std::vector<double> sample_on_unit_cube(const F& u, std::size_t grid)
{
    constexpr std::size_t n = dimension_of<F>;
    const double h = 1.0 / static_cast<double>(grid);
    std::vector<double> out;
    if constexpr (n == 1) {
        out.resize(grid);
        for (std::size_t i = 0; i < grid; ++i)
            out[i] = u(-0.5 + (static_cast<double>(i) + 0.5) * h);
    } else {
        out.resize(grid * grid);
        for (std::size_t i = 0; i < grid; ++i)
            for (std::size_t j = 0; j < grid; ++j)
                out[i * grid + j] = u(Vec2{-0.5 + (static_cast<double>(i) + 0.5) * h,
                                           -0.5 + (static_cast<double>(j) + 0.5) * h});
    }
    return out;
}

inline double l1_distance(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw Error(Errc::invalid_argument, "sample grids differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += std::abs(a[i] - b[i]);
    return s / static_cast<double>(a.size());
}

namespace detail {

inline double sample_mean(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double sample_osc(std::span<const double> v)
{
    const double m = sample_mean(v);
    double s = 0.0;
    for (double x : v)
        s += std::abs(x - m);
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace detail

/// Wraps an exactly known function on Q0 as a (trivially converged) candidate.
template <class F>
TangentCandidate<dimension_of<F>> make_candidate(const F& u, std::size_t grid)
{
    constexpr std::size_t n = dimension_of<F>;
    TangentCandidate<n> c;
    c.grid = grid;
    c.samples = sample_on_unit_cube(u, grid);
    c.l1_cauchy_gap = 0.0;
    c.converged = true;
    c.mean = detail::sample_mean(c.samples);
    c.osc = detail::sample_osc(c.samples);
    c.tv_estimate = total_variation(u, Cube<n>::unit());
    c.exact = u;
    return c;
}

inline constexpr std::size_t default_grid(std::size_t n) { return n == 1 ? 512 : 128; }

/// Rescalings along a shrinking cube sequence with x in tau Q_j.
template <class F>
TangentCandidate<dimension_of<F>> extract_tangent(const F& f, const Point<dimension_of<F>>& x, double tau,
                                                  std::span<const Cube<dimension_of<F>>> cubes,
                                                  std::size_t grid = default_grid(dimension_of<F>),
                                                  double tol = 1e-3)
{
    constexpr std::size_t n = dimension_of<F>;
    if (cubes.empty())
        throw Error(Errc::invalid_argument, "empty cube sequence");
    for (std::size_t j = 0; j < cubes.size(); ++j) {
        if (!cubes[j].in_shrunk(x, tau, 1e-12 * std::max(1.0, cubes[j].side)))
            throw Error(Errc::invalid_argument, "x is not in tau*Q for cube " + std::to_string(j));
        if (j > 0 && cubes[j].side > cubes[j - 1].side * (1.0 + 1e-12))
            throw Error(Errc::invalid_argument, "cube sides must be nonincreasing");
    }
    TangentCandidate<n> c;
    c.grid = grid;
    c.source_cubes.assign(cubes.begin(), cubes.end());
    std::vector<double> prev;
    for (const auto& q : cubes) {
        auto u = rescale(f, q);
        auto s = sample_on_unit_cube(u, grid);
        if (!prev.empty())
            c.gaps.push_back(l1_distance(prev, s));
        prev = std::move(s);
        c.exact = std::move(u);
    }
    c.samples = std::move(prev);
    if (!c.gaps.empty()) {
        c.l1_cauchy_gap = c.gaps.back();
        c.converged = c.l1_cauchy_gap < tol;
    }
    c.mean = detail::sample_mean(c.samples);
    c.osc = detail::sample_osc(c.samples);
    c.tv_estimate = total_variation(*c.exact, Cube<n>::unit());
    return c;
}

// ---- local Poincare constants ----------------------------------------------------

/// Candidate lattice for P^tau(x, eps): sides eps * ratio^j, center offsets
/// ell * j / (2 center_steps) per axis, kept when within tau ell / 2. The grid
/// does not depend on tau, so larger tau scans a superset of cubes.
struct ScanOptions {
    int side_levels = 24;
    double side_ratio = 0.75;
    int center_steps = 16;
    int threads = 1;
};

template <std::size_t N>
struct PoincareSample {
    double eps = 0.0;
    double value = 0.0;
    std::optional<Cube<N>> argmax;
};

namespace detail {

template <std::size_t N>
bool cube_inside(const Cube<N>& domain, const Cube<N>& q)
{
    return domain.contains(q, 1e-12 * std::max(1.0, domain.side));
}

inline Cube<1> domain_cube(const BVFunction1D& f) { return to_cube(f.domain()); }
inline Cube<2> domain_cube(const Function2D& f) { return f.domain(); }

}  // namespace detail

template <class F>
PoincareSample<dimension_of<F>> p_tau(const F& f, const Point<dimension_of<F>>& x, double tau, double eps,
                                      const ScanOptions& opt = {})
{
    constexpr std::size_t n = dimension_of<F>;
    if (!(tau >= 0.0 && tau <= 1.0))
        throw Error(Errc::invalid_argument, "tau must lie in [0, 1]");
    if (!(eps > 0.0))
        throw Error(Errc::invalid_argument, "eps must be positive");
    const Cube<n> dom = detail::domain_cube(f);
    const int steps = std::max(1, opt.center_steps);
    const std::size_t width = static_cast<std::size_t>(2 * steps + 1);
    std::size_t per_side = 1;
    for (std::size_t d = 0; d < n; ++d)
        per_side *= width;

    const std::size_t levels = static_cast<std::size_t>(std::max(1, opt.side_levels));
    std::vector<PoincareSample<n>> best(levels);
    parallel_for(levels, opt.threads, [&](std::size_t lv) {
        const double ell = eps * std::pow(opt.side_ratio, static_cast<double>(lv));
        auto& b = best[lv];
        for (std::size_t c = 0; c < per_side; ++c) {
            Point<n> center;
            std::size_t rem = c;
            bool admissible = true;
            for (std::size_t d = 0; d < n; ++d) {
                const auto j = static_cast<int>(rem % width) - steps;
                rem /= width;
                const double off = ell * j / (2.0 * steps);
                admissible = admissible && std::abs(off) <= 0.5 * tau * ell * (1.0 + 1e-12);
                center[d] = x[d] + off;
            }
            if (!admissible)
                continue;
            const Cube<n> q(center, ell);
            if (!detail::cube_inside(dom, q))
                continue;
            const OscResult r = oscillation(f, q);
            if (r.quotient && *r.quotient > b.value) {
                b.value = *r.quotient;
                b.argmax = q;
            }
        }
    });
    PoincareSample<n> out;
    out.eps = eps;
    for (const auto& b : best)
        if (b.argmax && (!out.argmax || b.value > out.value)) {
            out.value = b.value;
            out.argmax = b.argmax;
        }
    return out;
}

template <std::size_t N>
struct PoincareProfile {
    Point<N> x{};
    double tau = 0.0;
    std::vector<PoincareSample<N>> samples;
    double p_estimate = 0.0;
    double log_slope = 0.0;  // dP / d(log eps) over the last two samples
    bool in_support = false;
};

template <class F>
PoincareProfile<dimension_of<F>> p_profile(const F& f, const Point<dimension_of<F>>& x, double tau,
                                           std::span<const double> eps_schedule, const ScanOptions& opt = {})
{
    constexpr std::size_t n = dimension_of<F>;
    if (eps_schedule.empty())
        throw Error(Errc::invalid_argument, "empty eps schedule");
    for (std::size_t i = 1; i < eps_schedule.size(); ++i)
        if (!(eps_schedule[i] < eps_schedule[i - 1]))
            throw Error(Errc::invalid_argument, "eps schedule must be strictly decreasing");
    PoincareProfile<n> prof;
    prof.x = x;
    prof.tau = tau;
    for (double eps : eps_schedule)
        prof.samples.push_back(p_tau(f, x, tau, eps, opt));

    // every admissible cube at the last scale lies in the window x +- eps_last
    const Cube<n> dom = detail::domain_cube(f);
    Point<n> lo, hi;
    const double e = eps_schedule.back();
    double side = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
        lo[d] = std::max(dom.lower(d), x[d] - e);
        hi[d] = std::min(dom.upper(d), x[d] + e);
        side = std::max(side, hi[d] - lo[d]);
    }
    if constexpr (n == 1) {
        prof.in_support = hi[0] > lo[0] && f.total_variation(Interval(lo[0], hi[0])) > 0.0;
    } else {
        // window clipped to a cube inside the domain
        const double s = std::min(hi[0] - lo[0], hi[1] - lo[1]);
        prof.in_support = s > 0.0 && total_variation(f, Cube<2>({0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])}, s)) > 0.0;
    }
    prof.p_estimate = prof.in_support ? prof.samples.back().value : 0.0;
    if (prof.samples.size() >= 2) {
        const auto& a = prof.samples[prof.samples.size() - 2];
        const auto& b = prof.samples.back();
        prof.log_slope = (b.value - a.value) / (std::log(b.eps) - std::log(a.eps));
    }
    return prof;
}

template <std::size_t N>
struct CellFormulaResult {
    double p_value = 0.0;
    double tangent_osc = 0.0;
    double gap = 0.0;
    std::optional<TangentCandidate<N>> tangent;
    PoincareProfile<N> profile;
};

/// Compares P^tau(x, eps) with the oscillation of the tangent extracted along
/// the maximizing cubes.
template <class F>
CellFormulaResult<dimension_of<F>> cell_formula_check(const F& f, const Point<dimension_of<F>>& x, double tau,
                                                      std::span<const double> eps_schedule,
                                                      const ScanOptions& opt = {},
                                                      std::size_t grid = default_grid(dimension_of<F>))
{
    constexpr std::size_t n = dimension_of<F>;
    CellFormulaResult<n> res;
    res.profile = p_profile(f, x, tau, eps_schedule, opt);
    res.p_value = res.profile.p_estimate;
    if (!res.profile.in_support)
        return res;
    std::vector<Cube<n>> cubes;
    for (const auto& s : res.profile.samples)
        if (s.argmax && (cubes.empty() || s.argmax->side <= cubes.back().side))
            cubes.push_back(*s.argmax);
    if (cubes.empty())
        return res;
    res.tangent = extract_tangent(f, x, tau, std::span<const Cube<n>>(cubes), grid);
    res.tangent_osc = res.tangent->osc;
    res.gap = std::abs(res.p_value - res.tangent_osc);
    return res;
}

// ---- rigidity ----------------------------------------------------------------------

enum class TangentClass { jump_halfcube, linear, other };

inline std::string_view to_string(TangentClass c)
{
    switch (c) {
    case TangentClass::jump_halfcube: return "jump_halfcube";
    case TangentClass::linear: return "linear";
    case TangentClass::other: return "other";
    }
    return "other";
}

/// Best axis-normal jump template j_{a,b,e_axis,offset} fitted to the samples.
struct JumpTemplate {
    double a = 0.0;
    double b = 0.0;
    int axis = 0;
    double offset = 0.0;
};

template <std::size_t N>
struct RigidityReport {
    TangentClass cls = TangentClass::other;
    double fit_error = 0.0;  // L1 error of the winning template
    double jump_fit_error = 0.0;
    double linear_fit_error = 0.0;
    JumpTemplate jump;
    Point<N> gradient{};
    double intercept = 0.0;
    bool hyperplane_meets_core = false;  // jump hyperplane meets tau*closure(Q0)
    double max_subcube_quotient = std::numeric_limits<double>::quiet_NaN();
    bool quarter_bound_holds = false;  // all scanned sub-cube quotients <= 1/4 + tol
};

struct RigidityOptions {
    double fit_tol = 2e-2;
    double quotient_tol = 1e-6;
    int subcube_levels = 4;  // sides 1/2, 1/4, ...
    int subcube_shifts = 4;  // positions per side length
};

namespace detail {

template <std::size_t N>
double jump_fit(const TangentCandidate<N>& c, JumpTemplate& best)
{
    const std::size_t g = c.grid;
    const auto& s = c.samples;
    double best_err = std::numeric_limits<double>::infinity();
    for (int axis = 0; axis < static_cast<int>(N); ++axis) {
        // line sums along the fitted axis
        std::vector<double> line(g, 0.0);
        for (std::size_t idx = 0; idx < s.size(); ++idx) {
            const std::size_t i = N == 1 ? idx : (axis == 0 ? idx / g : idx % g);
            line[i] += s[idx];
        }
        const double per_line = static_cast<double>(s.size() / g);
        std::vector<double> prefix(g + 1, 0.0);
        for (std::size_t i = 0; i < g; ++i)
            prefix[i + 1] = prefix[i] + line[i];
        for (std::size_t cut = 1; cut < g; ++cut) {
            const double a = prefix[cut] / (per_line * static_cast<double>(cut));
            const double b = (prefix[g] - prefix[cut]) / (per_line * static_cast<double>(g - cut));
            double err = 0.0;
            for (std::size_t idx = 0; idx < s.size(); ++idx) {
                const std::size_t i = N == 1 ? idx : (axis == 0 ? idx / g : idx % g);
                err += std::abs(s[idx] - (i < cut ? a : b));
            }
            err /= static_cast<double>(s.size());
            if (err < best_err) {
                best_err = err;
                best = {a, b, axis, -0.5 + static_cast<double>(cut) / static_cast<double>(g)};
            }
        }
    }
    return best_err;
}

template <std::size_t N>
double linear_fit(const TangentCandidate<N>& c, Point<N>& grad, double& intercept)
{
    const std::size_t g = c.grid;
    const auto& s = c.samples;
    const double h = 1.0 / static_cast<double>(g);
    auto coord = [&](std::size_t idx, std::size_t d) {
        const std::size_t i = N == 1 ? idx : (d == 0 ? idx / g : idx % g);
        return -0.5 + (static_cast<double>(i) + 0.5) * h;
    };
    // the midpoint grid is symmetric, so the normal equations decouple
    const double m = sample_mean(s);
    for (std::size_t d = 0; d < N; ++d) {
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t idx = 0; idx < s.size(); ++idx) {
            const double y = coord(idx, d);
            sxy += y * (s[idx] - m);
            sxx += y * y;
        }
        grad[d] = sxy / sxx;
    }
    intercept = m;
    double err = 0.0;
    for (std::size_t idx = 0; idx < s.size(); ++idx) {
        double fit = intercept;
        for (std::size_t d = 0; d < N; ++d)
            fit += grad[d] * coord(idx, d);
        err += std::abs(s[idx] - fit);
    }
    return err / static_cast<double>(s.size());
}

template <class F>
double max_subcube_quotient(const F& u, double tau, const RigidityOptions& opt)
{
    constexpr std::size_t n = dimension_of<F>;
    double best = 0.0;
    for (int lv = 1; lv <= opt.subcube_levels; ++lv) {
        const double side = std::ldexp(1.0, -lv);
        const int shifts = opt.subcube_shifts * (1 << (lv - 1));
        const double step = (1.0 - side) / static_cast<double>(shifts);
        std::size_t total = 1;
        for (std::size_t d = 0; d < n; ++d)
            total *= static_cast<std::size_t>(shifts + 1);
        for (std::size_t c = 0; c < total; ++c) {
            Point<n> center;
            std::size_t rem = c;
            for (std::size_t d = 0; d < n; ++d) {
                const std::size_t t = rem % static_cast<std::size_t>(shifts + 1);
                rem /= static_cast<std::size_t>(shifts + 1);
                center[d] = -0.5 + 0.5 * side + step * static_cast<double>(t);
            }
            const Cube<n> q(center, side);
            if (!(total_variation(u, q.shrunk(std::max(tau, 1e-9))) > 0.0))
                continue;
            const OscResult r = oscillation(u, q);
            if (r.quotient)
                best = std::max(best, *r.quotient);
        }
    }
    return best;
}

}  // namespace detail

/// Classifies a converged tangent against axis-normal jump templates and
/// linear maps, and scans sub-cube quotients for the 1/4 rigidity bound.
template <std::size_t N>
RigidityReport<N> rigidity_diagnose(const TangentCandidate<N>& c, double tau, const RigidityOptions& opt = {})
{
    if (!c.converged)
        throw Error(Errc::non_converged, "tangent candidate has not converged");
    if (c.samples.empty() || c.grid < 2)
        throw Error(Errc::invalid_argument, "tangent candidate has no samples");
    RigidityReport<N> rep;
    rep.jump_fit_error = detail::jump_fit(c, rep.jump);
    rep.linear_fit_error = detail::linear_fit(c, rep.gradient, rep.intercept);
    rep.hyperplane_meets_core = std::abs(rep.jump.offset) <= 0.5 * tau + 1e-12;
    const double cell = 1.0 / static_cast<double>(c.grid);
    rep.fit_error = std::min(rep.jump_fit_error, rep.linear_fit_error);
    if (rep.fit_error > opt.fit_tol)
        rep.cls = TangentClass::other;
    else if (rep.jump_fit_error <= rep.linear_fit_error)
        rep.cls = std::abs(rep.jump.offset) <= cell + 1e-12 ? TangentClass::jump_halfcube : TangentClass::other;
    else
        rep.cls = TangentClass::linear;
    if (c.exact) {
        rep.max_subcube_quotient = detail::max_subcube_quotient(*c.exact, tau, opt);
        rep.quarter_bound_holds = rep.max_subcube_quotient <= 0.25 + opt.quotient_tol;
    }
    return rep;
}

// ---- modified Poincare-Wirtinger -----------------------------------------------------

/// C(n) + (sqrt(n)/2)(1 - tau)/tau^{n+1} with the sharp L1 cube constant C(n) = 1/2.
inline double modified_poincare_constant(std::size_t n, double tau)
{
    return 0.5 + 0.5 * std::sqrt(static_cast<double>(n)) * (1.0 - tau) / std::pow(tau, static_cast<double>(n) + 1.0);
}

struct ModifiedPoincareResult {
    double lhs = 0.0;  // ||f - mean_{tau Q} f||_{L1(Q)} / ell(Q)^n * ell(Q)^{n-1}
    double rhs = 0.0;  // C(n, tau) |Df|(Q)
    double constant = 0.0;
    bool holds = false;
    std::string_view norm = "L1";  // L1 stands in for L^{1*}
};

inline ModifiedPoincareResult modified_poincare_check(const BVFunction1D& f, const Cube<1>& q, double tau,
                                                      double tol = 1e-9)
{
    if (!(tau > 0.0 && tau <= 1.0))
        throw Error(Errc::invalid_argument, "tau must lie in (0, 1]");
    const Interval iv = to_interval(q);
    const Interval inner = to_interval(q.shrunk(tau));
    const double c = f.integral(inner) / inner.length();
    ModifiedPoincareResult r;
    r.lhs = f.pieces().abs_deviation(iv.a, iv.b, c) / q.side;
    r.constant = modified_poincare_constant(1, tau);
    r.rhs = r.constant * f.total_variation(iv);
    r.holds = r.lhs <= r.rhs + tol;
    return r;
}

inline ModifiedPoincareResult modified_poincare_check(const Function2D& f, const Cube<2>& q, double tau,
                                                      double tol = 1e-3)
{
    if (!(tau > 0.0 && tau <= 1.0))
        throw Error(Errc::invalid_argument, "tau must lie in (0, 1]");
    const double c = f.stats(q.shrunk(tau)).mean;
    ModifiedPoincareResult r;
    // L1 norm over Q divided by ell: mean |f - c| * ell^2 / ell
    r.lhs = f.mean_abs_deviation(q, c) * q.side;
    r.constant = modified_poincare_constant(2, tau);
    r.rhs = r.constant * total_variation(f, q);
    r.holds = r.lhs <= r.rhs + tol;
    return r;
}

}  // namespace bvosc
