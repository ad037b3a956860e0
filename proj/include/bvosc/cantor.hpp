#pragma once

#include <cmath>
#include <vector>

#include "bvosc/bv1d.hpp"
#include "bvosc/cantor_spec.hpp"
#include "bvosc/error.hpp"

namespace bvosc {

/// The finite-depth staircase u_d on (0,1): u(0) = 0, u(1) = 1, slopes in {0, r_d}.
inline BVFunction1D cantor_function(const CantorSpec& spec)
{
    spec.validate();
    return BVFunction1D(Interval(0.0, 1.0), {}, {0.0}, {}, CantorPart{spec, 1.0, 0.0});
}

/// Scales at which u_d looks like a jump (1/(r_i r_{i+1})) and like an affine
/// map (r_i^{-2} k_{i+1}^{-exponent}), for i = 1 .. depth-1.
struct ScaleSchedule {
    std::vector<double> jump_scales;
    std::vector<double> affine_scales;
};

inline ScaleSchedule scale_schedule(const CantorSpec& spec, double affine_exponent = 0.5)
{
    if (spec.depth < 2)
        throw Error(Errc::depth_too_small, "scale schedule needs depth >= 2");
    ScaleSchedule s;
    for (int i = 1; i < spec.depth; ++i) {
        const double ri = spec.r(i);
        s.jump_scales.push_back(1.0 / (ri * spec.r(i + 1)));
        s.affine_scales.push_back(
            1.0 / (ri * ri) * std::pow(static_cast<double>(spec.k(i + 1)), -affine_exponent));
    }
    return s;
}

}  // namespace bvosc
