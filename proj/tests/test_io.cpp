#include <catch_amalgamated.hpp>

#include <sstream>

#include "bvosc/io.hpp"
#include "bvosc/verify.hpp"

using namespace bvosc;
using Catch::Approx;

namespace {

std::string error_of(const std::string& text)
{
    try {
        io::parse_function(text);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::parse_error);
        return e.what();
    }
    FAIL("expected a parse error");
    return {};
}

}  // namespace

TEST_CASE("1D spec round trip")
{
    const std::string text = R"({
  "dim": 1,
  "domain": [-1, 1],
  "breakpoints": [0.25],
  "slopes": [1, -0.5],
  "atoms": [[0, 1], [0.5, -0.25]],
  "cantor": {"ks": [4, 32], "depth": 2, "scale": 0.5, "offset": -0.5},
  "value_at_left": 0.125
})";
    const auto f = std::get<BVFunction1D>(io::parse_function(text));
    CHECK(f.atoms().size() == 2);
    REQUIRE(f.cantor());
    CHECK(f.cantor()->scale == 0.5);
    const auto j = io::to_json(f);
    const auto g = std::get<BVFunction1D>(io::parse_function(io::dump(j)));
    CHECK(io::to_json(g) == j);
    CHECK(io::dump(io::to_json(g)) == io::dump(j));
    for (double x : {-0.9, -0.3, 0.1, 0.4, 0.8})
        CHECK(g(x) == f(x));
}

TEST_CASE("2D specs round trip for every kind")
{
    const std::vector<std::string> specs{
        R"({"dim":2,"kind":"linear","gradient":[1,0.5]})",
        R"({"dim":2,"kind":"halfplane_indicator","normal":[0,1],"offset":0.1,"low":-1,"high":2})",
        R"({"dim":2,"kind":"polygon_indicator","vertices":[[0,0],[1,0],[1,1],[0,1]]})",
        R"({"dim":2,"kind":"smooth","formula":"sine","params":[1,2,3,0.5],"quad_order":32,
            "domain":{"center":[0.5,0.5],"side":2}})"};
    for (const auto& s : specs) {
        const auto f = io::parse_function(s);
        const auto j = io::to_json(f);
        CHECK(io::to_json(io::parse_function(j.dump())) == j);
    }
    const Function2D pulled =
        Function2D(kinds::Linear{{1.0, 2.0}}).pullback(Cube<2>({0.1, 0.0}, 0.5, {true, false}), 2.0, -0.25);
    const auto j = io::to_json(pulled);
    CHECK(j.contains("frame"));
    const auto back = std::get<Function2D>(io::parse_function(j.dump()));
    CHECK(back(Vec2{0.2, -0.3}) == pulled(Vec2{0.2, -0.3}));
}

TEST_CASE("parse errors name the line and the field")
{
    CHECK(error_of("{\n  \"dim\": 1,\n  \"domain\": [0, 1\n}").find("line 4") != std::string::npos);

    const std::string bad_slope = "{\n  \"dim\": 1,\n  \"domain\": [0, 1],\n  \"slopes\": [1, \"x\"]\n}";
    const auto msg = error_of(bad_slope);
    CHECK(msg.find("line 4") != std::string::npos);
    CHECK(msg.find("/slopes/1") != std::string::npos);

    CHECK(error_of(R"({"dim":1,"slopes":[1]})").find("/domain") != std::string::npos);
    CHECK(error_of(R"({"dim":3})").find("/dim") != std::string::npos);
    CHECK(error_of(R"({"dim":2,"kind":"spiral"})").find("unknown kind") != std::string::npos);
    CHECK(error_of(R"({"dim":1,"domain":[1,0],"slopes":[1]})").find("/domain") != std::string::npos);
    CHECK(error_of(R"({"dim":1,"domain":[0,1],"slopes":[1,2]})").find("slope") != std::string::npos);
    CHECK(error_of(R"({"dim":1,"domain":[0,1],"slopes":[1],"cantor":{"ks":[4],"depth":3}})")
              .find("/cantor") != std::string::npos);
}

TEST_CASE("OscResult serializes all five fields")
{
    const auto r = oscillation(verify::pure_linear(), Interval(0.0, 0.5));
    const auto j = io::to_json(r);
    for (const char* k : {"mean", "osc", "tv", "quotient", "est_error"})
        CHECK(j.contains(k));
    CHECK(j["quotient"].get<double>() == Approx(0.25));
    CHECK(io::to_json(oscillation(BVFunction1D::constant(Interval(0.0, 1.0), 1.0), Interval(0.0, 1.0)))["quotient"]
              .is_null());
}

TEST_CASE("CSV uses 17 significant digits")
{
    PackingOptions po;
    po.mode = PackingMode::k_eps;
    po.eps = 0.25;
    po.h = 1.0 / 64;
    const auto fam = solve_1d(verify::pure_linear(), Interval(0.0, 1.0), po);
    std::ostringstream os;
    io::write_csv(os, fam);
    const std::string csv = os.str();
    CHECK(csv.rfind("center0,side,mean,osc,tv,quotient,weight\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    CHECK(io::fmt17(0.1) == "0.10000000000000001");
    const auto j = io::to_json(fam);
    CHECK(j["cubes"].size() == 4);
    CHECK(j["mode"] == "keps");
}
