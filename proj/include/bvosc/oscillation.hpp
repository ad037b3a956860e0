#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "bvosc/bv1d.hpp"
#include "bvosc/error.hpp"
#include "bvosc/function2d.hpp"
#include "bvosc/geometry.hpp"

namespace bvosc {

/// Equality tolerances: closed-form paths vs quadrature paths.
struct Tolerances {
    double closed_form = 1e-9;
    double quadrature = 1e-3;
};

/// Mean, mean oscillation, total variation and Poincare quotient on one cube.
///
/// est_error bounds both the oscillation error and the induced quotient error;
/// it is zero on closed-form paths.
struct OscResult {
    double mean = 0.0;
    double osc = 0.0;
    double tv = 0.0;
    std::optional<double> quotient;
    double est_error = 0.0;
};

namespace detail {

inline OscResult assemble(const CubeStats& st, double side_power)
{
    OscResult r;
    r.mean = st.mean;
    r.osc = std::max(0.0, st.osc);
    r.tv = std::max(0.0, st.tv);
    // zero variation on the open cube means constant a.e.; drop rounding residue
    if (r.tv == 0.0 && st.tv_error == 0.0)
        r.osc = 0.0;
    double err = st.osc_error;
    if (r.tv > 0.0) {
        const double q = side_power * r.osc / r.tv;
        r.quotient = q;
        err = std::max(err, side_power * st.osc_error / r.tv + q * st.tv_error / r.tv);
    }
    r.est_error = err;
    return r;
}

}  // namespace detail

// ---- 1D ------------------------------------------------------------------

inline OscResult oscillation(const BVFunction1D& f, const Interval& q)
{
    const double tv = f.total_variation(q);
    const double len = q.length();
    CubeStats st;
    st.mean = f.integral(q) / len;
    st.osc = f.pieces().abs_deviation(q.a, q.b, st.mean) / len;
    st.tv = tv;
    return detail::assemble(st, 1.0);
}

inline OscResult oscillation(const BVFunction1D& f, const Cube<1>& q) { return oscillation(f, to_interval(q)); }

inline double total_variation(const BVFunction1D& f, const Interval& q) { return f.total_variation(q); }
inline double total_variation(const BVFunction1D& f, const Cube<1>& q) { return f.total_variation(to_interval(q)); }

// ---- 2D ------------------------------------------------------------------

inline OscResult oscillation(const Function2D& f, const Cube<2>& q) { return detail::assemble(f.stats(q), q.side); }

inline double total_variation(const Function2D& f, const Cube<2>& q) { return f.stats(q).tv; }

// ---- generic -------------------------------------------------------------

/// ell(Q)^{n-1} Osc(f,Q) / |Df|(Q); throws when |Df|(Q) = 0.
template <class F, class Q>
double poincare_quotient(const F& f, const Q& q)
{
    const OscResult r = oscillation(f, q);
    if (!r.quotient)
        throw Error(Errc::undefined_quotient, "|Df|(Q) = 0, Poincare quotient undefined");
    return *r.quotient;
}

struct HadwigerResult {
    bool is_maximizer = false;
    double quotient = 0.0;
};

/// Decides whether an indicator attains the optimal constant 1/2 on Q0.
/// Equality is characterised by half-cubes cut parallel to a face.
inline HadwigerResult hadwiger_check(const Function2D& indicator, double tol = Tolerances{}.quadrature)
{
    if (!indicator.is_indicator())
        throw Error(Errc::invalid_argument, "hadwiger_check expects an indicator function");
    const OscResult r = oscillation(indicator, Cube<2>::unit());
    if (!r.quotient)
        throw Error(Errc::zero_perimeter, "set has zero perimeter inside Q0");
    return {std::abs(*r.quotient - 0.5) <= tol, *r.quotient};
}

}  // namespace bvosc
