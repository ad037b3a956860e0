#include <catch_amalgamated.hpp>

#include "bvosc/verify.hpp"

using namespace bvosc;
using namespace bvosc::verify;

TEST_CASE("pass flags are recomputable from stored fields")
{
    TheoremReport r;
    r.add("eq", 1.0, 1.02, 0.05, Relation::equal, "t");
    r.add("ge", 0.41, 0.40, 0.0, Relation::at_least, "t");
    r.add("le", 0.36, 0.35, 0.0, Relation::at_most, "t");
    CHECK(r.checks[0].pass());
    CHECK(r.checks[1].pass());
    CHECK_FALSE(r.checks[2].pass());
    CHECK_FALSE(r.pass());
    const auto j = to_json(r);
    for (const auto& c : j["checks"]) {
        const double m = c["measured"], e = c["expected"], t = c["tolerance"];
        const std::string rel = c["relation"];
        const bool recomputed = rel == "equal" ? std::abs(m - e) <= t : rel == "at_least" ? m >= e - t : m <= e + t;
        CHECK(recomputed == c["pass"].get<bool>());
    }
    CHECK_FALSE(j.contains("runtime_s"));
    CHECK(to_json(r, true).contains("runtime_s"));
}

TEST_CASE("sbv suite")
{
    const auto r = sbv_representation(default_sbv_cases());
    CHECK(r.pass());
    CHECK(r.checks.size() == 3);
}

TEST_CASE("cantor suite bands and depth-0 control")
{
    const auto r = cantor_oscillation(CantorSpec({4, 32}, 2), {CantorSpec({4, 64}, 2)});
    CHECK(r.pass());
    CHECK(r.notes["margin"].get<double>() > 0.1);
}

TEST_CASE("measure suite is deterministic")
{
    const auto a = measure_properties(3), b = measure_properties(3);
    CHECK(a.pass());
    CHECK(to_json(a).dump() == to_json(b).dump());
}

TEST_CASE("density range")
{
    const auto r = density_range({{"jump", pure_jump()}, {"linear", pure_linear()}});
    CHECK(r.pass());
}

TEST_CASE("one-dimensional tau independence on a reduced point set")
{
    OneDimConfig cfg;
    cfg.points = {0.0, 0.5};
    const double jumps[] = {0.0};
    const auto r = one_dim_theorem(sbv_mix(), cfg, jumps);
    CHECK(r.pass());
}
