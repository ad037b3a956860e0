#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bvosc/bv1d.hpp"
#include "bvosc/error.hpp"
#include "bvosc/function2d.hpp"
#include "bvosc/geometry.hpp"
#include "bvosc/oscillation.hpp"
#include "bvosc/parallel.hpp"

namespace bvosc {

/// K_eps packs cubes of side exactly eps; G_eps packs cubes of side <= eps.
enum class PackingMode { k_eps, g_eps };

inline std::string_view to_string(PackingMode m) { return m == PackingMode::k_eps ? "keps" : "geps"; }

struct PackingOptions {
    PackingMode mode = PackingMode::g_eps;
    double eps = 0.0;
    double h = 0.0;  // lattice step; cube corners and sides live on the h-grid
    std::size_t max_candidates = 50'000'000;
    int threads = 1;
};

template <std::size_t N>
struct PackedCube {
    Cube<N> cube;
    OscResult result;
    double weight = 0.0;  // ell^{N-1} Osc
};

template <std::size_t N>
struct PackingFamily {
    std::vector<PackedCube<N>> cubes;
    double value = 0.0;
    double lower_bound = 0.0;
    double upper_bound = 0.0;  // (1/2)|Df|(domain)
    bool exact = false;        // exact maximum over the stated lattice
    PackingMode mode = PackingMode::g_eps;
    double eps = 0.0;
    double h = 0.0;
    std::size_t candidates = 0;
    bool axis_aligned = true;
};

// ---- weighted interval scheduling ------------------------------------------

struct WeightedInterval {
    double left = 0.0;
    double right = 0.0;
    double weight = 0.0;
};

struct Selection {
    std::vector<std::size_t> chosen;  // indices into the input, left to right
    double value = 0.0;
};

/// Maximum-weight subfamily with pairwise disjoint interiors (closed abutment
/// allowed). Ties prefer fewer intervals.
inline Selection max_weight_disjoint(std::span<const WeightedInterval> items)
{
    const std::size_t n = items.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
        return items[l].right < items[r].right;
    });
    std::vector<double> rights(n);
    for (std::size_t j = 0; j < n; ++j)
        rights[j] = items[order[j]].right;

    std::vector<double> best(n + 1, 0.0);
    std::vector<std::size_t> count(n + 1, 0), pred(n, 0);
    std::vector<bool> take(n, false);
    for (std::size_t j = 0; j < n; ++j) {
        const auto& it = items[order[j]];
        pred[j] = static_cast<std::size_t>(std::upper_bound(rights.begin(), rights.begin() + j, it.left) -
                                           rights.begin());
        const double with = best[pred[j]] + it.weight;
        const std::size_t with_count = count[pred[j]] + 1;
        if (with > best[j] || (with == best[j] && with_count < count[j])) {
            best[j + 1] = with;
            count[j + 1] = with_count;
            take[j] = true;
        } else {
            best[j + 1] = best[j];
            count[j + 1] = count[j];
        }
    }
    Selection sel;
    sel.value = best[n];
    for (std::size_t j = n; j > 0;) {
        if (take[j - 1]) {
            sel.chosen.push_back(order[j - 1]);
            j = pred[j - 1];
        } else {
            --j;
        }
    }
    std::reverse(sel.chosen.begin(), sel.chosen.end());
    return sel;
}

// ---- lattices --------------------------------------------------------------

namespace detail {

inline std::size_t lattice_cells(double length, double h)
{
    if (!(h > 0.0))
        throw Error(Errc::invalid_argument, "lattice step h must be positive");
    return static_cast<std::size_t>(std::floor(length / h + 1e-9));
}

/// Admissible sides in lattice units.
inline std::vector<std::size_t> lattice_sides(const PackingOptions& opt)
{
    if (!(opt.eps > 0.0))
        throw Error(Errc::invalid_argument, "eps must be positive");
    if (opt.h > opt.eps * (1.0 + 1e-12))
        throw Error(Errc::invalid_argument, "lattice step h must not exceed eps");
    const double ratio = opt.eps / opt.h;
    if (opt.mode == PackingMode::k_eps) {
        const double k = std::round(ratio);
        if (std::abs(k - ratio) > 1e-9 * ratio)
            throw Error(Errc::invalid_argument, "K_eps needs eps to be a multiple of the lattice step");
        return {static_cast<std::size_t>(k)};
    }
    std::vector<std::size_t> sides(static_cast<std::size_t>(std::floor(ratio + 1e-9)));
    std::iota(sides.begin(), sides.end(), 1);
    return sides;
}

inline void check_candidate_cap(double count, const PackingOptions& opt)
{
    if (count > static_cast<double>(opt.max_candidates))
        throw Error(Errc::lattice_too_large,
                    std::to_string(static_cast<long long>(count)) + " candidates exceed the cap of " +
                        std::to_string(opt.max_candidates) + "; coarsen h or reduce eps");
}

}  // namespace detail

// ---- 1D: exact DP on the lattice ---------------------------------------------

/// Exact maximum of sum Osc(f, I) over disjoint lattice intervals in `domain`.
inline PackingFamily<1> solve_1d(const BVFunction1D& f, const Interval& domain, const PackingOptions& opt)
{
    if (!f.contains(domain))
        throw Error(Errc::cube_outside_domain, "packing domain not contained in the function domain");
    const std::vector<std::size_t> sides = detail::lattice_sides(opt);
    const std::size_t n = detail::lattice_cells(domain.length(), opt.h);
    double count = 0.0;
    for (std::size_t k : sides)
        if (k <= n)
            count += static_cast<double>(n - k + 1);
    detail::check_candidate_cap(count, opt);

    auto point = [&](std::size_t i) { return domain.a + static_cast<double>(i) * opt.h; };
    const std::size_t ns = sides.size();

    std::vector<double> best(n + 1, 0.0);
    std::vector<std::size_t> nint(n + 1, 0), choice(n + 1, 0);
    const std::size_t block = 4096;
    std::vector<double> weights;
    for (std::size_t p0 = 1; p0 <= n; p0 += block) {
        const std::size_t p1 = std::min(n + 1, p0 + block);
        weights.assign((p1 - p0) * ns, 0.0);
        parallel_for(p1 - p0, opt.threads, [&](std::size_t off) {
            const std::size_t p = p0 + off;
            for (std::size_t s = 0; s < ns; ++s) {
                const std::size_t k = sides[s];
                if (k > p)
                    break;
                weights[off * ns + s] = oscillation(f, Interval(point(p - k), point(p))).osc;
            }
        });
        for (std::size_t p = p0; p < p1; ++p) {
            best[p] = best[p - 1];
            nint[p] = nint[p - 1];
            choice[p] = 0;
            for (std::size_t s = 0; s < ns; ++s) {
                const std::size_t k = sides[s];
                if (k > p)
                    break;
                const double w = weights[(p - p0) * ns + s];
                const double with = best[p - k] + w;
                const std::size_t with_count = nint[p - k] + 1;
                if (with > best[p] || (with == best[p] && with_count < nint[p])) {
                    best[p] = with;
                    nint[p] = with_count;
                    choice[p] = k;
                }
            }
        }
    }

    PackingFamily<1> fam;
    for (std::size_t p = n; p > 0;) {
        if (choice[p] == 0) {
            --p;
            continue;
        }
        const std::size_t k = choice[p];
        const Interval iv(point(p - k), point(p));
        PackedCube<1> pc{to_cube(iv), oscillation(f, iv), 0.0};
        pc.weight = pc.result.osc;
        fam.cubes.push_back(pc);
        p -= k;
    }
    std::reverse(fam.cubes.begin(), fam.cubes.end());
    fam.value = best[n];
    fam.lower_bound = fam.value;
    fam.upper_bound = 0.5 * f.total_variation(domain);
    fam.exact = true;
    fam.mode = opt.mode;
    fam.eps = opt.eps;
    fam.h = opt.h;
    fam.candidates = static_cast<std::size_t>(count);
    return fam;
}

// ---- 2D: greedy + local search -------------------------------------------------

struct LocalSearchOptions {
    std::size_t budget = 2000;  // local-search iterations per restart
    std::uint64_t seed = 0;
    int restarts = 8;
};

namespace detail {

class Packer2D {
public:
    struct Candidate {
        std::uint32_t i, j, k;
        double weight;
    };

    Packer2D(std::size_t n, std::vector<std::size_t> sides, std::vector<Candidate> cands)
        : n_(n), sides_(std::move(sides)), cands_(std::move(cands))
    {
        offsets_.resize(sides_.size() + 1, 0);
        for (std::size_t s = 0; s < sides_.size(); ++s) {
            const std::size_t m = n_ - sides_[s] + 1;
            offsets_[s + 1] = offsets_[s] + m * m;
        }
    }

    std::size_t index(std::size_t s, std::size_t i, std::size_t j) const
    {
        return offsets_[s] + i * (n_ - sides_[s] + 1) + j;
    }

    const std::vector<Candidate>& candidates() const { return cands_; }

    struct State {
        std::vector<int> owner;  // per cell, candidate index or -1
        std::vector<std::size_t> family;
        double value = 0.0;
    };

    State empty_state() const { return {std::vector<int>(n_ * n_, -1), {}, 0.0}; }

    bool fits(const State& st, const Candidate& c) const
    {
        for (std::size_t a = c.i; a < c.i + c.k; ++a)
            for (std::size_t b = c.j; b < c.j + c.k; ++b)
                if (st.owner[a * n_ + b] >= 0)
                    return false;
        return true;
    }

    void mark(State& st, std::size_t idx, int who) const
    {
        const auto& c = cands_[idx];
        for (std::size_t a = c.i; a < c.i + c.k; ++a)
            for (std::size_t b = c.j; b < c.j + c.k; ++b)
                st.owner[a * n_ + b] = who;
    }

    void place(State& st, std::size_t idx) const
    {
        mark(st, idx, static_cast<int>(idx));
        st.family.push_back(idx);
        st.value += cands_[idx].weight;
    }

    void remove(State& st, std::size_t idx) const
    {
        mark(st, idx, -1);
        st.family.erase(std::find(st.family.begin(), st.family.end(), idx));
        st.value -= cands_[idx].weight;
    }

    void greedy(State& st, const std::vector<std::size_t>& order) const
    {
        for (std::size_t idx : order)
            if (cands_[idx].weight > 0.0 && fits(st, cands_[idx]))
                place(st, idx);
    }

    /// Greedy insertion restricted to candidates touching cells [i0,i1) x [j0,j1).
    void refill(State& st, std::size_t i0, std::size_t i1, std::size_t j0, std::size_t j1) const
    {
        std::vector<std::size_t> local;
        for (std::size_t s = 0; s < sides_.size(); ++s) {
            const std::size_t k = sides_[s];
            if (k > n_)
                continue;
            const std::size_t ilo = i0 + 1 > k ? i0 + 1 - k : 0, ihi = std::min(n_ - k, i1 - 1);
            const std::size_t jlo = j0 + 1 > k ? j0 + 1 - k : 0, jhi = std::min(n_ - k, j1 - 1);
            for (std::size_t i = ilo; i <= ihi; ++i)
                for (std::size_t j = jlo; j <= jhi; ++j) {
                    const std::size_t idx = index(s, i, j);
                    if (cands_[idx].weight > 0.0 && fits(st, cands_[idx]))
                        local.push_back(idx);
                }
        }
        std::sort(local.begin(), local.end(), [&](std::size_t l, std::size_t r) {
            return cands_[l].weight != cands_[r].weight ? cands_[l].weight > cands_[r].weight : l < r;
        });
        greedy(st, local);
    }

    void refill_around(State& st, const Candidate& c) const
    {
        refill(st, c.i, c.i + c.k, c.j, c.j + c.k);
    }

    /// One local-search trial; keeps the change only if the value does not drop.
    void trial(State& st, std::mt19937_64& rng, const std::vector<std::size_t>& ranked) const
    {
        if (ranked.empty())
            return;
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const State saved = st;
        const double before = st.value;
        const double move = unif(rng);
        if (move < 0.3 && !st.family.empty()) {
            // remove-worst, then insert-best-nonoverlapping around the hole
            auto worst = *std::min_element(st.family.begin(), st.family.end(), [&](auto l, auto r) {
                return cands_[l].weight != cands_[r].weight ? cands_[l].weight < cands_[r].weight : l < r;
            });
            const Candidate c = cands_[worst];
            remove(st, worst);
            refill_around(st, c);
        } else if (move < 0.5 && !st.family.empty()) {
            // remove a random member and refill
            std::uniform_int_distribution<std::size_t> pick(0, st.family.size() - 1);
            const std::size_t victim = st.family[pick(rng)];
            const Candidate c = cands_[victim];
            remove(st, victim);
            refill_around(st, c);
        } else {
            // swap-one: force a candidate in, evicting whatever overlaps it
            const double u = unif(rng);
            const std::size_t idx = ranked[std::min(ranked.size() - 1, static_cast<std::size_t>(u * u * ranked.size()))];
            const Candidate& c = cands_[idx];
            std::vector<std::size_t> evicted;
            for (std::size_t a = c.i; a < c.i + c.k; ++a)
                for (std::size_t b = c.j; b < c.j + c.k; ++b) {
                    const int who = st.owner[a * n_ + b];
                    if (who >= 0 && std::find(evicted.begin(), evicted.end(), static_cast<std::size_t>(who)) == evicted.end())
                        evicted.push_back(static_cast<std::size_t>(who));
                }
            if (evicted.size() == 1 && evicted[0] == idx)
                return;
            std::size_t i0 = c.i, i1 = c.i + c.k, j0 = c.j, j1 = c.j + c.k;
            for (std::size_t e : evicted) {
                const auto& ec = cands_[e];
                i0 = std::min<std::size_t>(i0, ec.i);
                i1 = std::max<std::size_t>(i1, ec.i + ec.k);
                j0 = std::min<std::size_t>(j0, ec.j);
                j1 = std::max<std::size_t>(j1, ec.j + ec.k);
                remove(st, e);
            }
            place(st, idx);
            refill(st, i0, i1, j0, j1);
        }
        if (st.value < before)
            st = saved;
    }

private:
    std::size_t n_;
    std::vector<std::size_t> sides_;
    std::vector<Candidate> cands_;
    std::vector<std::size_t> offsets_;
};

}  // namespace detail

/// Best-effort maximum of sum ell(Q) Osc(f,Q) over disjoint lattice squares.
/// Deterministic for a given seed, independent of the thread count.
inline PackingFamily<2> solve_2d(const Function2D& f, const Cube<2>& domain, const PackingOptions& opt,
                                 const LocalSearchOptions& search = {})
{
    if (!f.domain().contains(domain, 1e-12 * std::max(1.0, domain.side)))
        throw Error(Errc::cube_outside_domain, "packing domain not contained in the function domain");
    const std::vector<std::size_t> sides = detail::lattice_sides(opt);
    const std::size_t n = detail::lattice_cells(domain.side, opt.h);
    std::vector<std::size_t> usable;
    double count = 0.0;
    for (std::size_t k : sides)
        if (k <= n) {
            usable.push_back(k);
            count += static_cast<double>((n - k + 1) * (n - k + 1));
        }
    detail::check_candidate_cap(count, opt);

    const Vec2 origin{domain.lower(0), domain.lower(1)};
    auto cube_of = [&](std::size_t i, std::size_t j, std::size_t k) {
        return Cube<2>::from_corner({origin[0] + static_cast<double>(i) * opt.h,
                                     origin[1] + static_cast<double>(j) * opt.h},
                                    static_cast<double>(k) * opt.h);
    };

    std::vector<detail::Packer2D::Candidate> cands(static_cast<std::size_t>(count));
    {
        std::size_t base = 0;
        for (std::size_t k : usable) {
            const std::size_t m = n - k + 1;
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    cands[base + i * m + j] = {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                                               static_cast<std::uint32_t>(k), 0.0};
            base += m * m;
        }
    }
    parallel_for(cands.size(), opt.threads, [&](std::size_t idx) {
        auto& c = cands[idx];
        const Cube<2> q = cube_of(c.i, c.j, c.k);
        c.weight = q.side * oscillation(f, q).osc;
    });

    const detail::Packer2D packer(n, usable, std::move(cands));
    const auto& cs = packer.candidates();
    std::vector<std::size_t> ranked;
    for (std::size_t idx = 0; idx < cs.size(); ++idx)
        if (cs[idx].weight > 0.0)
            ranked.push_back(idx);
    std::sort(ranked.begin(), ranked.end(), [&](std::size_t l, std::size_t r) {
        return cs[l].weight != cs[r].weight ? cs[l].weight > cs[r].weight : l < r;
    });

    const int restarts = std::max(1, search.restarts);
    std::vector<detail::Packer2D::State> results(static_cast<std::size_t>(restarts));
    parallel_for(results.size(), opt.threads, [&](std::size_t r) {
        std::seed_seq seq{static_cast<std::uint64_t>(search.seed), static_cast<std::uint64_t>(r)};
        std::mt19937_64 rng(seq);
        std::vector<std::size_t> order = ranked;
        if (r > 0) {
            std::uniform_real_distribution<double> jitter(1.0, 1.1);
            std::vector<double> key(cs.size(), 0.0);
            for (std::size_t idx : order)
                key[idx] = cs[idx].weight * jitter(rng);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t rr) { return key[l] > key[rr]; });
        }
        auto st = packer.empty_state();
        packer.greedy(st, order);
        for (std::size_t it = 0; it < search.budget; ++it)
            packer.trial(st, rng, ranked);
        packer.greedy(st, ranked);
        results[r] = std::move(st);
    });
    std::size_t best = 0;
    for (std::size_t r = 1; r < results.size(); ++r)
        if (results[r].value > results[best].value)
            best = r;

    PackingFamily<2> fam;
    std::vector<std::size_t> members = results[best].family;
    std::sort(members.begin(), members.end());
    double total = 0.0;
    for (std::size_t idx : members) {
        const auto& c = cs[idx];
        PackedCube<2> pc{cube_of(c.i, c.j, c.k), {}, c.weight};
        pc.result = oscillation(f, pc.cube);
        total += c.weight;
        fam.cubes.push_back(pc);
    }
    fam.value = total;
    fam.lower_bound = total;
    fam.upper_bound = 0.5 * total_variation(f, domain);
    fam.exact = false;
    fam.mode = opt.mode;
    fam.eps = opt.eps;
    fam.h = opt.h;
    fam.candidates = cs.size();
    return fam;
}

// ---- good families -----------------------------------------------------------

struct GoodFamilyRow {
    std::size_t index = 0;
    double quotient = 0.0;
    double tv = 0.0;
    double tv_inner = 0.0;         // |Df|(tau Q)
    bool poincare_ok = false;      // ell^{n-1} Osc >= |Df|(Q) / 8
    bool concentration_ok = false; // |Df|(tau Q) >= |Df|(Q) / 16
    bool good() const { return poincare_ok && concentration_ok; }
};

template <class F, std::size_t N>
std::vector<GoodFamilyRow> good_family_check(const PackingFamily<N>& fam, const F& f, double tau)
{
    std::vector<GoodFamilyRow> rows;
    for (std::size_t i = 0; i < fam.cubes.size(); ++i) {
        const auto& pc = fam.cubes[i];
        GoodFamilyRow row;
        row.index = i;
        row.tv = pc.result.tv;
        row.quotient = pc.result.quotient.value_or(0.0);
        row.tv_inner = total_variation(f, pc.cube.shrunk(tau));
        row.poincare_ok = row.tv > 0.0 && pc.weight >= row.tv / 8.0;
        row.concentration_ok = row.tv > 0.0 && row.tv_inner >= row.tv / 16.0;
        rows.push_back(row);
    }
    return rows;
}

template <std::size_t N>
struct PruneReport {
    PackingFamily<N> family;
    double original_value = 0.0;
    std::size_t replaced = 0;  // bad cubes re-solved
    std::size_t dropped = 0;   // bad cubes discarded after the last round
};

/// Keeps good cubes, re-packs each bad cube from inside with `solve`, and
/// discards cubes still bad after `max_rounds`.
template <class F, std::size_t N, class Solver>
PruneReport<N> prune_and_resolve(const F& f, const PackingFamily<N>& fam, double tau, Solver&& solve,
                                 int max_rounds = 4)
{
    PruneReport<N> rep;
    rep.original_value = fam.value;
    rep.family = fam;
    rep.family.cubes.clear();
    PackingFamily<N> pending = fam;
    for (int round = 0; !pending.cubes.empty(); ++round) {
        const auto rows = good_family_check(pending, f, tau);
        PackingFamily<N> next = pending;
        next.cubes.clear();
        for (const auto& row : rows) {
            const auto& pc = pending.cubes[row.index];
            if (row.good()) {
                rep.family.cubes.push_back(pc);
                continue;
            }
            if (round >= max_rounds || pc.weight <= 0.0) {
                ++rep.dropped;
                continue;
            }
            ++rep.replaced;
            const PackingFamily<N> sub = solve(pc.cube);
            for (const auto& sc : sub.cubes) {
                if (std::abs(sc.cube.side - pc.cube.side) <= 1e-12 * pc.cube.side)
                    ++rep.dropped;  // the cube is its own best repacking
                else
                    next.cubes.push_back(sc);
            }
        }
        pending = std::move(next);
    }
    double total = 0.0;
    for (const auto& pc : rep.family.cubes)
        total += pc.weight;
    rep.family.value = total;
    rep.family.lower_bound = total;
    rep.family.exact = false;
    return rep;
}

inline PruneReport<1> prune_and_resolve_1d(const BVFunction1D& f, const PackingFamily<1>& fam, double tau,
                                           const PackingOptions& opt, int max_rounds = 4)
{
    PackingOptions sub = opt;
    sub.mode = PackingMode::g_eps;
    return prune_and_resolve(
        f, fam, tau, [&](const Cube<1>& q) { return solve_1d(f, to_interval(q), sub); }, max_rounds);
}

// ---- G_eps sweeps --------------------------------------------------------------

struct SweepRow {
    double eps = 0.0;
    double value = 0.0;
    double lower_bound = 0.0;
    double upper_bound = 0.0;
};

/// G_eps on a common lattice for a decreasing list of eps.
inline std::vector<SweepRow> g_sweep(const BVFunction1D& f, const Interval& domain, std::span<const double> eps_list,
                                     double h, int threads = 1)
{
    for (std::size_t i = 1; i < eps_list.size(); ++i)
        if (!(eps_list[i] < eps_list[i - 1]))
            throw Error(Errc::invalid_argument, "eps list must be strictly decreasing");
    std::vector<SweepRow> rows;
    for (double eps : eps_list) {
        PackingOptions opt;
        opt.mode = PackingMode::g_eps;
        opt.eps = eps;
        opt.h = h;
        opt.threads = threads;
        const auto fam = solve_1d(f, domain, opt);
        rows.push_back({eps, fam.value, fam.lower_bound, fam.upper_bound});
    }
    return rows;
}

}  // namespace bvosc
