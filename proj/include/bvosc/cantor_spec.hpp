#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bvosc/error.hpp"
#include "bvosc/geometry.hpp"
#include "bvosc/piecewise_affine.hpp"

namespace bvosc {

/// Integer sequence (k_1, ..., k_d) driving the nested interval construction.
///
/// Stage J_0 = [0,1]; each component I of J_i is replaced by k_{i+1} closed
/// intervals of length |I|/k_{i+1}^2 starting at equi-distributed points
/// a_j = a + j |I| / k_{i+1}. Stage i has r_i = k_1 ... k_i components.
struct CantorSpec {
    std::vector<std::int64_t> ks;
    int depth = 0;

    CantorSpec() = default;
    CantorSpec(std::vector<std::int64_t> k, int d) : ks(std::move(k)), depth(d) { validate(); }

    void validate() const
    {
        if (depth < 0)
            throw Error(Errc::invalid_argument, "cantor depth must be >= 0");
        if (static_cast<std::size_t>(depth) > ks.size())
            throw Error(Errc::invalid_argument, "cantor depth exceeds the number of k_i");
        for (auto k : ks)
            if (k < 1)
                throw Error(Errc::invalid_argument, "cantor k_i must be positive");
    }

    /// k_i with k_0 = 1.
    std::int64_t k(int i) const { return i == 0 ? 1 : ks.at(static_cast<std::size_t>(i - 1)); }

    /// r_i = k_0 k_1 ... k_i.
    double r(int i) const
    {
        double prod = 1.0;
        for (int j = 1; j <= i; ++j)
            prod *= static_cast<double>(k(j));
        return prod;
    }

    /// Indices i < depth where k_i^2 / k_{i+1} > 2^{-i}. Only i >= 1 is checked.
    std::vector<int> growth_violations() const
    {
        std::vector<int> bad;
        for (int i = 1; i < depth; ++i) {
            const double ki = static_cast<double>(k(i));
            if (ki * ki / static_cast<double>(k(i + 1)) > std::ldexp(1.0, -i))
                bad.push_back(i);
        }
        return bad;
    }
};

struct CantorStage {
    std::vector<Interval> intervals;
    int level = 0;

    double total_length() const
    {
        double s = 0.0;
        for (const auto& iv : intervals)
            s += iv.length();
        return s;
    }
};

/// Components of J_i.
inline CantorStage build_stage(const CantorSpec& spec, int i)
{
    if (i < 0 || i > spec.depth)
        throw Error(Errc::out_of_range, "stage " + std::to_string(i) + " outside [0, " +
                                            std::to_string(spec.depth) + "]");
    CantorStage stage;
    stage.level = i;
    stage.intervals.emplace_back(0.0, 1.0);
    for (int level = 1; level <= i; ++level) {
        const double k = static_cast<double>(spec.k(level));
        std::vector<Interval> next;
        next.reserve(stage.intervals.size() * static_cast<std::size_t>(k));
        for (const auto& iv : stage.intervals) {
            const double len = iv.length();
            for (std::int64_t j = 0; j < spec.k(level); ++j) {
                const double a = iv.a + static_cast<double>(j) * len / k;
                next.emplace_back(a, a + len / (k * k));
            }
        }
        stage.intervals = std::move(next);
    }
    return stage;
}

/// u_i(t) = integral_0^t r_i 1_{J_i}, as an exact continuous piecewise-affine map on [0,1].
inline PiecewiseAffine cantor_staircase(const CantorSpec& spec)
{
    const CantorStage stage = build_stage(spec, spec.depth);
    const double density = spec.r(spec.depth);
    std::vector<double> knots{0.0}, values, slopes;
    double u = 0.0;
    auto push_piece = [&](double end, double slope) {
        if (!(end > knots.back()))
            return;
        values.push_back(u);
        slopes.push_back(slope);
        u += slope * (end - knots.back());
        knots.push_back(end);
    };
    for (const auto& iv : stage.intervals) {
        push_piece(iv.a, 0.0);
        push_piece(iv.b, density);
    }
    push_piece(1.0, 0.0);
    std::vector<double> jumps(slopes.size(), 0.0);
    return PiecewiseAffine(std::move(knots), std::move(values), std::move(slopes), std::move(jumps));
}

}  // namespace bvosc
