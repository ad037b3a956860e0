// bvosc: command-line front end for the bvosc library.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bvosc/cantor.hpp"
#include "bvosc/io.hpp"
#include "bvosc/localpc.hpp"
#include "bvosc/oscillation.hpp"
#include "bvosc/packing.hpp"
#include "bvosc/parallel.hpp"
#include "bvosc/verify.hpp"

namespace {

using namespace bvosc;
using json = nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string fn;
    std::string cube;
    std::string out;
    std::string csv;
    std::string mode = "geps";
    double eps = 0.0;
    double h = 0.0;
    double x = 0.0;
    double y = 0.0;
    double tau = 0.9;
    std::string eps_schedule;
    std::uint64_t seed = 0;
    std::size_t budget = 2000;
    std::string ks;
    int depth = 0;
    std::string schedule_out;
    std::string suite = "all";
    bool timings = false;
    int threads = 0;
    double tol = 1e-3;
    bool quiet = false;
};

std::vector<double> parse_list(const std::string& s, const char* flag)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError(std::string(flag) + ": '" + item + "' is not a number");
        }
    }
    return out;
}

void require_positive(double v, const char* flag)
{
    if (!(v > 0.0))
        throw UsageError(std::string(flag) + " must be positive");
}

void emit(const RunConfig& cfg, const json& doc)
{
    const std::string text = io::dump(doc);
    if (cfg.out.empty())
        std::cout << text;
    else
        io::write_file(cfg.out, text);
}

void summary(const RunConfig& cfg, const std::string& line)
{
    if (!cfg.quiet)
        std::cerr << line << '\n';
}

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

/// 1D: "a,b"; 2D: "cx,cy,side".
template <std::size_t N>
Cube<N> parse_cube(const std::string& s)
{
    const auto v = parse_list(s, "--cube");
    if constexpr (N == 1) {
        if (v.size() != 2)
            throw UsageError("--cube expects a,b for 1D functions");
        if (!(v[0] < v[1]))
            throw UsageError("--cube needs a < b");
        return to_cube(Interval(v[0], v[1]));
    } else {
        if (v.size() != 3)
            throw UsageError("--cube expects cx,cy,side for 2D functions");
        require_positive(v[2], "--cube side");
        return Cube<2>({v[0], v[1]}, v[2]);
    }
}

template <class F>
Cube<dimension_of<F>> whole_domain(const F& f)
{
    if constexpr (dimension_of<F> == 1)
        return to_cube(f.domain());
    else
        return f.domain();
}

template <class F>
Point<dimension_of<F>> point_of(const F&, const RunConfig& cfg)
{
    if constexpr (dimension_of<F> == 1)
        return {cfg.x};
    else
        return {cfg.x, cfg.y};
}

std::vector<double> eps_schedule_or_default(const RunConfig& cfg, double domain_length)
{
    std::vector<double> eps = cfg.eps_schedule.empty()
                                  ? std::vector<double>{0.1 * domain_length, 0.05 * domain_length,
                                                        0.025 * domain_length, 0.0125 * domain_length}
                                  : parse_list(cfg.eps_schedule, "--eps-schedule");
    for (double e : eps)
        require_positive(e, "--eps-schedule entries");
    return eps;
}

template <class F>
double domain_length(const F& f)
{
    if constexpr (dimension_of<F> == 1)
        return f.domain().length();
    else
        return f.domain().side;
}

int cmd_osc(const RunConfig& cfg, bool tv_only)
{
    const auto fn = io::load_function(cfg.fn);
    return std::visit(
        [&](const auto& f) {
            using F = std::decay_t<decltype(f)>;
            const auto q = cfg.cube.empty() ? whole_domain(f) : parse_cube<dimension_of<F>>(cfg.cube);
            const OscResult r = oscillation(f, q);
            if (tv_only) {
                emit(cfg, json{{"tv", r.tv}});
                summary(cfg, "tv=" + num(r.tv));
            } else {
                emit(cfg, io::to_json(r));
                summary(cfg, "osc=" + num(r.osc) + " tv=" + num(r.tv) +
                                 " quotient=" + (r.quotient ? num(*r.quotient) : std::string("undefined")));
            }
            return 0;
        },
        fn);
}

int cmd_pack(const RunConfig& cfg)
{
    if (cfg.mode != "keps" && cfg.mode != "geps")
        throw UsageError("--mode must be keps or geps");
    require_positive(cfg.eps, "--eps");
    require_positive(cfg.h, "--h");
    if (cfg.eps < cfg.h)
        throw UsageError("--eps must be >= --h");
    PackingOptions po;
    po.mode = cfg.mode == "keps" ? PackingMode::k_eps : PackingMode::g_eps;
    po.eps = cfg.eps;
    po.h = cfg.h;
    po.threads = resolve_threads(cfg.threads);
    const auto fn = io::load_function(cfg.fn);
    return std::visit(
        [&](const auto& f) {
            using F = std::decay_t<decltype(f)>;
            auto write = [&](const auto& fam) {
                emit(cfg, io::to_json(fam));
                if (!cfg.csv.empty()) {
                    std::ofstream os(cfg.csv);
                    io::write_csv(os, fam);
                }
                summary(cfg, std::string(to_string(fam.mode)) + " value=" + num(fam.value) +
                                 " cubes=" + std::to_string(fam.cubes.size()) +
                                 (fam.exact ? " exact" : " heuristic") + " bounds=[" + num(fam.lower_bound) + ", " +
                                 num(fam.upper_bound) + "]");
            };
            if constexpr (dimension_of<F> == 1) {
                write(solve_1d(f, f.domain(), po));
            } else {
                LocalSearchOptions ls;
                ls.seed = cfg.seed;
                ls.budget = cfg.budget;
                write(solve_2d(f, f.domain(), po, ls));
            }
            return 0;
        },
        fn);
}

void check_tau(double tau)
{
    if (!(tau > 0.0 && tau <= 1.0))
        throw UsageError("--tau must lie in (0, 1]");
}

int cmd_pc(const RunConfig& cfg)
{
    check_tau(cfg.tau);
    const auto fn = io::load_function(cfg.fn);
    return std::visit(
        [&](const auto& f) {
            ScanOptions opt;
            opt.threads = resolve_threads(cfg.threads);
            const auto eps = eps_schedule_or_default(cfg, domain_length(f));
            const auto prof = p_profile(f, point_of(f, cfg), cfg.tau, std::span<const double>(eps), opt);
            emit(cfg, io::to_json(prof));
            if (!cfg.csv.empty()) {
                std::ofstream os(cfg.csv);
                io::write_csv(os, prof);
            }
            summary(cfg, "p_estimate=" + num(prof.p_estimate) + " log_slope=" + num(prof.log_slope) +
                             (prof.in_support ? " in_support" : " outside_support"));
            return 0;
        },
        fn);
}

int cmd_tangent(const RunConfig& cfg)
{
    check_tau(cfg.tau);
    const auto fn = io::load_function(cfg.fn);
    return std::visit(
        [&](const auto& f) {
            using F = std::decay_t<decltype(f)>;
            constexpr std::size_t n = dimension_of<F>;
            ScanOptions opt;
            opt.threads = resolve_threads(cfg.threads);
            const auto eps = eps_schedule_or_default(cfg, domain_length(f));
            const auto cell = cell_formula_check(f, point_of(f, cfg), cfg.tau, std::span<const double>(eps), opt);
            if (!cell.tangent) {
                emit(cfg, json{{"profile", io::to_json(cell.profile)}, {"tangent", nullptr}});
                summary(cfg, "no tangent: point outside the support of |Df|");
                return 0;
            }
            TangentCandidate<n> t = *cell.tangent;
            t.converged = t.l1_cauchy_gap < cfg.tol;
            json doc{{"profile", io::to_json(cell.profile)}, {"tangent", io::to_json(t)}, {"p_value", cell.p_value}};
            std::string cls = "unclassified (not converged)";
            if (t.converged) {
                const auto rep = rigidity_diagnose(t, cfg.tau);
                doc["classification"] = io::to_json(rep);
                cls = std::string(to_string(rep.cls));
            }
            emit(cfg, doc);
            if (!cfg.csv.empty()) {
                std::ofstream os(cfg.csv);
                io::write_csv(os, t);
            }
            summary(cfg, "tangent osc=" + num(t.osc) + " gap=" + num(t.l1_cauchy_gap) + " class=" + cls);
            return 0;
        },
        fn);
}

int cmd_cantor(const RunConfig& cfg)
{
    std::vector<std::int64_t> ks;
    for (double k : parse_list(cfg.ks, "--ks")) {
        if (!(k >= 1.0) || k != std::floor(k))
            throw UsageError("--ks entries must be positive integers");
        ks.push_back(static_cast<std::int64_t>(k));
    }
    if (cfg.depth < 0 || static_cast<std::size_t>(cfg.depth) > ks.size())
        throw UsageError("--depth must lie in [0, number of ks]");
    const CantorSpec spec(ks, cfg.depth);
    const BVFunction1D f = cantor_function(spec);
    emit(cfg, io::to_json(f));
    std::string line = "cantor tv=" + num(f.total_variation(f.domain()));
    if (cfg.depth >= 2) {
        const ScaleSchedule s = scale_schedule(spec);
        if (!cfg.schedule_out.empty())
            io::write_file(cfg.schedule_out, io::dump(io::to_json(s)));
        line += " jump_scale=" + num(s.jump_scales.front()) + " affine_scale=" + num(s.affine_scales.front());
    }
    const auto bad = spec.growth_violations();
    if (!bad.empty())
        line += " growth_violations=" + std::to_string(bad.size());
    summary(cfg, line);
    return 0;
}

int cmd_verify(const RunConfig& cfg)
{
    static const std::vector<std::string> suites{"all", "sbv", "cantor", "measure", "onedim", "range"};
    if (std::find(suites.begin(), suites.end(), cfg.suite) == suites.end())
        throw UsageError("--suite must be one of all|sbv|cantor|measure|onedim|range");
    const int threads = resolve_threads(cfg.threads);
    auto want = [&](const char* s) { return cfg.suite == "all" || cfg.suite == s; };
    std::vector<verify::TheoremReport> reports;
    if (want("sbv"))
        reports.push_back(verify::sbv_representation(verify::default_sbv_cases(), 0x1p-8, 0x1p-12, threads));
    if (want("cantor"))
        reports.push_back(verify::cantor_oscillation(CantorSpec({4, 32}, 2), {CantorSpec({4, 64}, 2), CantorSpec({8, 128}, 2)},
                                                     0.40, 0.35, threads));
    if (want("measure"))
        reports.push_back(verify::measure_properties(cfg.seed == 0 ? 7 : cfg.seed, 3, 0x1p-5, 0x1p-9, threads));
    if (want("onedim")) {
        const double jumps[] = {0.0};
        reports.push_back(verify::one_dim_theorem(verify::sbv_mix(), verify::OneDimConfig{}, jumps, threads));
    }
    if (want("range"))
        reports.push_back(verify::density_range(verify::default_range_functions(), 0.03, 0x1p-9, threads));

    json doc{{"suite", cfg.suite}, {"reports", json::array()}};
    bool ok = true;
    for (const auto& r : reports) {
        doc["reports"].push_back(verify::to_json(r, cfg.timings));
        ok = ok && r.pass();
        summary(cfg, std::string(r.pass() ? "PASS " : "FAIL ") + r.id);
    }
    doc["pass"] = ok;
    emit(cfg, doc);
    return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Mean oscillation, packings and local Poincare constants of BV functions"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand
    RunConfig cfg;
    app.add_option("--threads", cfg.threads, "worker threads (default: BVOSC_THREADS or hardware)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--tol", cfg.tol, "tangent convergence tolerance (L1 gap)")->check(CLI::PositiveNumber);
    app.add_flag("--quiet", cfg.quiet, "suppress the summary line");

    auto add_fn = [&](CLI::App* sub) { sub->add_option("--fn", cfg.fn, "function spec JSON")->required(); };
    auto add_out = [&](CLI::App* sub) { sub->add_option("--out", cfg.out, "output JSON (default stdout)"); };

    auto* osc = app.add_subcommand("osc", "mean, oscillation, variation and quotient on a cube");
    add_fn(osc);
    osc->add_option("--cube", cfg.cube, "1D: a,b   2D: cx,cy,side (default: whole domain)");
    add_out(osc);

    auto* tv = app.add_subcommand("tv", "total variation on a cube");
    add_fn(tv);
    tv->add_option("--cube", cfg.cube, "1D: a,b   2D: cx,cy,side (default: whole domain)");
    add_out(tv);

    auto* pack = app.add_subcommand("pack", "K_eps / G_eps packing");
    pack->set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
    add_fn(pack);
    pack->add_option("--mode", cfg.mode, "keps|geps");
    pack->add_option("--eps", cfg.eps, "cube size")->required();
    pack->add_option("--h", cfg.h, "lattice step")->required();
    pack->add_option("--seed", cfg.seed, "local-search seed (2D)");
    pack->add_option("--budget", cfg.budget, "local-search iterations per restart (2D)");
    pack->add_option("--csv", cfg.csv, "per-cube CSV");
    add_out(pack);

    auto* pc = app.add_subcommand("pc", "local tau-Poincare profile at a point");
    add_fn(pc);
    pc->add_option("--x", cfg.x, "point (first coordinate)")->required();
    pc->add_option("--y", cfg.y, "second coordinate (2D)");
    pc->add_option("--tau", cfg.tau, "tau in (0, 1]");
    pc->add_option("--eps-schedule", cfg.eps_schedule, "strictly decreasing, comma separated");
    pc->add_option("--csv", cfg.csv, "per-scale CSV");
    add_out(pc);

    auto* tangent = app.add_subcommand("tangent", "extract and classify a tangent at a point");
    add_fn(tangent);
    tangent->add_option("--x", cfg.x, "point (first coordinate)")->required();
    tangent->add_option("--y", cfg.y, "second coordinate (2D)");
    tangent->add_option("--tau", cfg.tau, "tau in (0, 1]");
    tangent->add_option("--eps-schedule", cfg.eps_schedule, "strictly decreasing, comma separated");
    tangent->add_option("--csv", cfg.csv, "grid samples CSV");
    add_out(tangent);

    auto* cantor = app.add_subcommand("cantor", "emit the Cantor-type staircase as a function spec");
    cantor->add_option("--ks", cfg.ks, "comma separated k_i")->required();
    cantor->add_option("--depth", cfg.depth, "stage count")->required();
    cantor->add_option("--schedule-out", cfg.schedule_out, "scale schedule JSON");
    add_out(cantor);

    auto* ver = app.add_subcommand("verify", "run theorem-reproduction suites");
    ver->add_option("--suite", cfg.suite, "all|sbv|cantor|measure|onedim|range");
    ver->add_option("--seed", cfg.seed, "seed for randomized suites");
    ver->add_flag("--timings", cfg.timings, "include runtimes (reports are no longer byte-identical)");
    add_out(ver);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);  // prints help or the message
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*osc)
            return cmd_osc(cfg, false);
        if (*tv)
            return cmd_osc(cfg, true);
        if (*pack)
            return cmd_pack(cfg);
        if (*pc)
            return cmd_pc(cfg);
        if (*tangent)
            return cmd_tangent(cfg);
        if (*cantor)
            return cmd_cantor(cfg);
        if (*ver)
            return cmd_verify(cfg);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
