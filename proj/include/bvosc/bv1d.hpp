#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "bvosc/cantor_spec.hpp"
#include "bvosc/error.hpp"
#include "bvosc/geometry.hpp"
#include "bvosc/piecewise_affine.hpp"

namespace bvosc {

/// Jump of signed height `height` at `location`: f(x+) - f(x-) = height.
struct Atom {
    double location = 0.0;
    double height = 0.0;
    friend bool operator==(const Atom&, const Atom&) = default;
};

/// scale * u_d(x - offset), with u_d extended by 0 on the left and 1 on the right.
struct CantorPart {
    CantorSpec spec;
    double scale = 1.0;
    double offset = 0.0;
};

/// Exactly integrable BV function on an interval.
///
/// f(x) = value_at_left + integral_a^x slope + sum_{atoms <= x} height
///        + scale * u_d(x - offset).
/// The finite-depth Cantor part is piecewise affine, so the whole function
/// compiles to a single PiecewiseAffine and every quantity below is closed form.
class BVFunction1D {
public:
    BVFunction1D(Interval domain, std::vector<double> breakpoints, std::vector<double> slopes,
                 std::vector<Atom> atoms = {}, std::optional<CantorPart> cantor = std::nullopt,
                 double value_at_left = 0.0)
        : domain_(domain), breakpoints_(std::move(breakpoints)), slopes_(std::move(slopes)),
          atoms_(std::move(atoms)), cantor_(std::move(cantor)), value_at_left_(value_at_left)
    {
        validate();
        compile();
    }

    static BVFunction1D constant(Interval domain, double value)
    {
        return BVFunction1D(domain, {}, {0.0}, {}, std::nullopt, value);
    }

    /// f(x) = slope * x + intercept.
    static BVFunction1D affine(Interval domain, double slope, double intercept = 0.0)
    {
        return BVFunction1D(domain, {}, {slope}, {}, std::nullopt, intercept + slope * domain.a);
    }

    /// Reassemble a function from compiled pieces (cantor part is flattened into slopes).
    static BVFunction1D from_pieces(const PiecewiseAffine& pw)
    {
        const auto& t = pw.knots();
        std::vector<double> bps(t.begin() + 1, t.end() - 1);
        std::vector<Atom> atoms;
        for (std::size_t k = 1; k + 1 < t.size(); ++k)
            if (pw.jumps()[k] != 0.0)
                atoms.push_back({t[k], pw.jumps()[k]});
        return BVFunction1D(Interval(t.front(), t.back()), std::move(bps), pw.slopes(), std::move(atoms),
                            std::nullopt, pw.values().front());
    }

    const Interval& domain() const { return domain_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& slopes() const { return slopes_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::optional<CantorPart>& cantor() const { return cantor_; }
    double value_at_left() const { return value_at_left_; }
    const PiecewiseAffine& pieces() const { return pw_; }

    /// Boundary-snapping tolerance for the open-interval convention.
    double snap() const { return 1e-12 * std::max(1.0, domain_.length()); }

    double operator()(double x) const { return pw_(x); }

    bool contains(const Interval& q) const { return domain_.contains(q, snap()); }

    /// |Df|(c, d) for the open interval; atoms on the boundary are excluded.
    double total_variation(const Interval& q) const
    {
        check_inside(q);
        return pw_.variation(q.a, q.b, snap());
    }

    double integral(const Interval& q) const { return pw_.integral(q.a, q.b); }

    /// |D^a f| carried by the explicit slopes (the Cantor approximant excluded).
    double absolutely_continuous_variation(const Interval& q) const
    {
        check_inside(q);
        double sum = 0.0;
        for (std::size_t s = 0; s < slopes_.size(); ++s) {
            const double lo = s == 0 ? domain_.a : breakpoints_[s - 1];
            const double hi = s == breakpoints_.size() ? domain_.b : breakpoints_[s];
            const double a = std::max(lo, q.a), b = std::min(hi, q.b);
            if (b > a)
                sum += std::abs(slopes_[s]) * (b - a);
        }
        return sum;
    }

    /// |D^j f| on the open interval.
    double jump_variation(const Interval& q) const
    {
        check_inside(q);
        double sum = 0.0;
        for (const auto& at : atoms_)
            if (at.location > q.a + snap() && at.location < q.b - snap())
                sum += std::abs(at.height);
        return sum;
    }

    /// Variation of the Cantor approximant on the open interval.
    double cantor_variation(const Interval& q) const
    {
        check_inside(q);
        if (!cantor_)
            return 0.0;
        return std::abs(cantor_->scale) * (cantor_value(q.b) - cantor_value(q.a));
    }

private:
    void validate() const
    {
        if (!std::is_sorted(breakpoints_.begin(), breakpoints_.end()) ||
            std::adjacent_find(breakpoints_.begin(), breakpoints_.end()) != breakpoints_.end())
            throw Error(Errc::invalid_argument, "breakpoints must be strictly increasing");
        for (double b : breakpoints_)
            if (!(b > domain_.a && b < domain_.b))
                throw Error(Errc::invalid_argument, "breakpoint outside the open domain");
        if (slopes_.size() != breakpoints_.size() + 1)
            throw Error(Errc::invalid_argument, "expected one slope per segment (breakpoints + 1)");
        std::vector<double> locs;
        for (const auto& at : atoms_) {
            if (!(at.location > domain_.a && at.location < domain_.b))
                throw Error(Errc::invalid_argument, "atom outside the open domain");
            locs.push_back(at.location);
        }
        std::sort(locs.begin(), locs.end());
        if (std::adjacent_find(locs.begin(), locs.end()) != locs.end())
            throw Error(Errc::invalid_argument, "atom locations must be distinct");
        if (cantor_)
            cantor_->spec.validate();
    }

    double user_slope(double x) const
    {
        auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
        return slopes_[static_cast<std::size_t>(it - breakpoints_.begin())];
    }

    double cantor_value(double x) const
    {
        const double t = x - cantor_->offset;
        if (t <= 0.0)
            return 0.0;
        if (t >= 1.0)
            return 1.0;
        return staircase_(t);
    }

    double cantor_slope(double x) const
    {
        const double t = x - cantor_->offset;
        if (t <= 0.0 || t >= 1.0)
            return 0.0;
        return staircase_.slopes()[staircase_.locate(t)];
    }

    void compile()
    {
        std::vector<double> knots{domain_.a, domain_.b};
        knots.insert(knots.end(), breakpoints_.begin(), breakpoints_.end());
        for (const auto& at : atoms_)
            knots.push_back(at.location);
        if (cantor_) {
            staircase_ = cantor_staircase(cantor_->spec);
            for (double t : staircase_.knots()) {
                const double x = t + cantor_->offset;
                if (x > domain_.a && x < domain_.b)
                    knots.push_back(x);
            }
        }
        std::sort(knots.begin(), knots.end());
        knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

        std::vector<Atom> sorted_atoms = atoms_;
        std::sort(sorted_atoms.begin(), sorted_atoms.end(),
                  [](const Atom& l, const Atom& r) { return l.location < r.location; });

        const std::size_t m = knots.size() - 1;
        std::vector<double> values(m), slopes(m), jumps(m, 0.0);
        double ac_integral = 0.0, jump_sum = 0.0;
        std::size_t next_atom = 0;
        for (std::size_t k = 0; k < m; ++k) {
            const double t = knots[k];
            if (next_atom < sorted_atoms.size() && sorted_atoms[next_atom].location == t) {
                jumps[k] = sorted_atoms[next_atom].height;
                jump_sum += jumps[k];
                ++next_atom;
            }
            const double mid = 0.5 * (t + knots[k + 1]);
            double v = value_at_left_ + ac_integral + jump_sum;
            double s = user_slope(mid);
            if (cantor_) {
                v += cantor_->scale * cantor_value(t);
                s += cantor_->scale * cantor_slope(mid);
            }
            values[k] = v;
            slopes[k] = s;
            ac_integral += user_slope(mid) * (knots[k + 1] - t);
        }
        pw_ = PiecewiseAffine(std::move(knots), std::move(values), std::move(slopes), std::move(jumps));
    }

    void check_inside(const Interval& q) const
    {
        if (!contains(q))
            throw Error(Errc::cube_outside_domain, "interval not contained in the function domain");
    }

    Interval domain_;
    std::vector<double> breakpoints_;
    std::vector<double> slopes_;
    std::vector<Atom> atoms_;
    std::optional<CantorPart> cantor_;
    double value_at_left_ = 0.0;
    PiecewiseAffine staircase_;
    PiecewiseAffine pw_;
};

}  // namespace bvosc
