#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "bvosc/error.hpp"

namespace bvosc {

/// Integral of |p + s (x - x0)| over [x0, x1], exact.
inline double abs_affine_integral(double p, double s, double x0, double x1)
{
    const double len = x1 - x0;
    if (len <= 0.0)
        return 0.0;
    const double q = p + s * len;
    if ((p >= 0.0 && q >= 0.0) || (p <= 0.0 && q <= 0.0))
        return 0.5 * std::abs(p + q) * len;
    // sign change at x0 + r, r = -p / s
    const double r = -p / s;
    return 0.5 * (std::abs(p) * r + std::abs(q) * (len - r));
}

/// Piecewise-affine function with jumps on [t_0, t_m].
///
/// On (t_k, t_{k+1}) the function is values[k] + slopes[k] (x - t_k); values
/// are right limits. jumps[k] is the signed jump at t_k (jumps[0] is unused).
/// Prefix sums make integrals and variations O(log m).
class PiecewiseAffine {
public:
    PiecewiseAffine() = default;

    PiecewiseAffine(std::vector<double> knots, std::vector<double> values,
                    std::vector<double> slopes, std::vector<double> jumps)
        : knots_(std::move(knots)), values_(std::move(values)), slopes_(std::move(slopes)),
          jumps_(std::move(jumps))
    {
        const std::size_t m = knots_.size();
        if (m < 2 || values_.size() != m - 1 || slopes_.size() != m - 1 || jumps_.size() != m - 1)
            throw Error(Errc::invalid_argument, "piecewise-affine: inconsistent array sizes");
        for (std::size_t k = 1; k < m; ++k)
            if (!(knots_[k] > knots_[k - 1]))
                throw Error(Errc::invalid_argument, "piecewise-affine: knots must increase");
        build_prefix();
    }

    /// Continuous piecewise-linear interpolant of (x_i, y_i).
    static PiecewiseAffine interpolate(std::span<const double> x, std::span<const double> y)
    {
        if (x.size() != y.size() || x.size() < 2)
            throw Error(Errc::invalid_argument, "interpolate: need matching arrays of size >= 2");
        std::vector<double> values(y.begin(), y.end() - 1), slopes, jumps(x.size() - 1, 0.0);
        for (std::size_t k = 0; k + 1 < x.size(); ++k)
            slopes.push_back((y[k + 1] - y[k]) / (x[k + 1] - x[k]));
        return PiecewiseAffine({x.begin(), x.end()}, std::move(values), std::move(slopes),
                               std::move(jumps));
    }

    std::size_t pieces() const { return slopes_.size(); }
    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& slopes() const { return slopes_; }
    const std::vector<double>& jumps() const { return jumps_; }
    double left() const { return knots_.front(); }
    double right() const { return knots_.back(); }

    /// Index k of the piece with t_k <= x < t_{k+1} (clamped).
    std::size_t locate(double x) const
    {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
        std::size_t k = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
        return std::min(k, pieces() - 1);
    }

    /// Right-continuous evaluation.
    double operator()(double x) const
    {
        const std::size_t k = locate(x);
        return values_[k] + slopes_[k] * (x - knots_[k]);
    }

    double left_limit(double x) const
    {
        auto it = std::lower_bound(knots_.begin(), knots_.end(), x);
        std::size_t k = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
        k = std::min(k, pieces() - 1);
        return values_[k] + slopes_[k] * (x - knots_[k]);
    }

    /// Primitive F(x) = integral from t_0 to x.
    double primitive(double x) const
    {
        const std::size_t k = locate(x);
        const double d = x - knots_[k];
        return integral_[k] + values_[k] * d + 0.5 * slopes_[k] * d * d;
    }

    double integral(double c, double d) const { return primitive(d) - primitive(c); }

    /// Variation of the absolutely continuous part over (c, d).
    double slope_variation(double c, double d) const { return abs_slope_primitive(d) - abs_slope_primitive(c); }

    /// Sum of |jump| over knots strictly inside (c, d); knots within `snap`
    /// of an endpoint count as boundary knots and are excluded.
    double jump_variation(double c, double d, double snap) const
    {
        auto lo = std::upper_bound(knots_.begin(), knots_.end(), c + snap);
        auto hi = std::lower_bound(knots_.begin(), knots_.end(), d - snap);
        const auto i0 = std::max<std::size_t>(1, static_cast<std::size_t>(lo - knots_.begin()));
        const auto i1 = static_cast<std::size_t>(hi - knots_.begin());
        if (i1 <= i0)
            return 0.0;
        // jump_prefix_[k]: sum of |jumps[j]| over interior knots j <= k
        return jump_prefix_[i1 - 1] - jump_prefix_[i0 - 1];
    }

    double variation(double c, double d, double snap) const
    {
        return slope_variation(c, d) + jump_variation(c, d, snap);
    }

    /// Integral of |f - m| over (c, d).
    double abs_deviation(double c, double d, double m) const
    {
        double sum = 0.0;
        std::size_t k = locate(c);
        double x0 = c;
        while (x0 < d) {
            const double x1 = k + 1 < knots_.size() - 1 ? std::min(d, knots_[k + 1]) : d;
            const double p = values_[k] + slopes_[k] * (x0 - knots_[k]) - m;
            sum += abs_affine_integral(p, slopes_[k], x0, x1);
            x0 = x1;
            ++k;
            if (k >= pieces())
                break;
        }
        return sum;
    }

    /// sup over (c, d) of |f - m|, attained at a piece end or a one-sided limit.
    double max_abs_deviation(double c, double d, double m) const
    {
        double best = 0.0;
        std::size_t k = locate(c);
        double x0 = c;
        while (x0 < d) {
            const double x1 = k + 1 < knots_.size() - 1 ? std::min(d, knots_[k + 1]) : d;
            const double p = values_[k] + slopes_[k] * (x0 - knots_[k]) - m;
            const double q = p + slopes_[k] * (x1 - x0);
            best = std::max({best, std::abs(p), std::abs(q)});
            x0 = x1;
            ++k;
            if (k >= pieces())
                break;
        }
        return best;
    }

private:
    double abs_slope_primitive(double x) const
    {
        const std::size_t k = locate(x);
        return abs_slope_[k] + std::abs(slopes_[k]) * (x - knots_[k]);
    }

    void build_prefix()
    {
        const std::size_t m = pieces();
        integral_.assign(m + 1, 0.0);
        abs_slope_.assign(m + 1, 0.0);
        jump_prefix_.assign(m + 1, 0.0);
        for (std::size_t k = 0; k < m; ++k) {
            const double len = knots_[k + 1] - knots_[k];
            integral_[k + 1] = integral_[k] + values_[k] * len + 0.5 * slopes_[k] * len * len;
            abs_slope_[k + 1] = abs_slope_[k] + std::abs(slopes_[k]) * len;
        }
        for (std::size_t k = 1; k <= m; ++k)
            jump_prefix_[k] = jump_prefix_[k - 1] + (k < m ? std::abs(jumps_[k]) : 0.0);
    }

    std::vector<double> knots_, values_, slopes_, jumps_;
    std::vector<double> integral_, abs_slope_, jump_prefix_;
};

}  // namespace bvosc
