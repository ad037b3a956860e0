#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "bvosc/bv1d.hpp"
#include "bvosc/cantor.hpp"
#include "bvosc/error.hpp"
#include "bvosc/function2d.hpp"
#include "bvosc/localpc.hpp"
#include "bvosc/oscillation.hpp"
#include "bvosc/packing.hpp"

namespace bvosc::io {

using json = nlohmann::json;

using AnyFunction = std::variant<BVFunction1D, Function2D>;

namespace detail {

inline std::size_t line_of_offset(const std::string& text, std::size_t offset)
{
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

/// Field-level validation with best-effort line numbers (first occurrence of the key).
class Reader {
public:
    explicit Reader(std::string text = {}) : text_(std::move(text)) {}

    [[noreturn]] void fail(const std::string& field, const std::string& what) const
    {
        std::string where = "field '" + field + "'";
        // nearest path segment that is a key rather than an array index
        std::string leaf;
        for (std::size_t end = field.size(); end > 0 && leaf.empty();) {
            const auto start = field.find_last_of('/', end - 1);
            const auto seg = field.substr(start == std::string::npos ? 0 : start + 1,
                                          start == std::string::npos ? end : end - start - 1);
            if (!seg.empty() && seg.find_first_not_of("0123456789") != std::string::npos)
                leaf = seg;
            if (start == std::string::npos)
                break;
            end = start;
        }
        if (!text_.empty() && !leaf.empty()) {
            const auto pos = text_.find("\"" + leaf + "\"");
            if (pos != std::string::npos)
                where = "line " + std::to_string(line_of_offset(text_, pos)) + ", " + where;
        }
        throw Error(Errc::parse_error, where + ": " + what);
    }

    const json& at(const json& j, const std::string& key, const std::string& path) const
    {
        if (!j.is_object() || !j.contains(key))
            fail(path + "/" + key, "missing");
        return j.at(key);
    }

    double number(const json& j, const std::string& path) const
    {
        if (!j.is_number())
            fail(path, "expected a number");
        return j.get<double>();
    }

    std::vector<double> numbers(const json& j, const std::string& path, std::size_t exact_size = 0) const
    {
        if (!j.is_array())
            fail(path, "expected an array of numbers");
        if (exact_size != 0 && j.size() != exact_size)
            fail(path, "expected " + std::to_string(exact_size) + " entries");
        std::vector<double> out;
        for (std::size_t i = 0; i < j.size(); ++i)
            out.push_back(number(j[i], path + "/" + std::to_string(i)));
        return out;
    }

private:
    std::string text_;
};

template <class Fn>
auto rethrow_as_parse_error(const Reader& rd, const std::string& path, Fn&& fn)
{
    try {
        return fn();
    } catch (const Error& e) {
        if (e.code() == Errc::parse_error)
            throw;
        rd.fail(path, e.what());
    }
}

}  // namespace detail

// ---- function specs --------------------------------------------------------

inline json to_json(const CantorSpec& s)
{
    return json{{"ks", s.ks}, {"depth", s.depth}};
}

inline json to_json(const BVFunction1D& f)
{
    json j;
    j["dim"] = 1;
    j["domain"] = {f.domain().a, f.domain().b};
    j["breakpoints"] = f.breakpoints();
    j["slopes"] = f.slopes();
    json atoms = json::array();
    for (const auto& a : f.atoms())
        atoms.push_back({a.location, a.height});
    j["atoms"] = atoms;
    if (f.cantor()) {
        json c = to_json(f.cantor()->spec);
        c["scale"] = f.cantor()->scale;
        c["offset"] = f.cantor()->offset;
        j["cantor"] = c;
    }
    if (f.value_at_left() != 0.0)
        j["value_at_left"] = f.value_at_left();
    return j;
}

inline json to_json(const Function2D& f)
{
    json j;
    j["dim"] = 2;
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, kinds::Linear>) {
                j["kind"] = "linear";
                j["gradient"] = k.gradient;
            } else if constexpr (std::is_same_v<K, kinds::HalfplaneIndicator>) {
                j["kind"] = "halfplane_indicator";
                j["normal"] = k.normal;
                j["offset"] = k.offset;
                j["low"] = k.low;
                j["high"] = k.high;
            } else if constexpr (std::is_same_v<K, kinds::PolygonIndicator>) {
                j["kind"] = "polygon_indicator";
                json v = json::array();
                for (const auto& p : k.vertices)
                    v.push_back(p);
                j["vertices"] = v;
                j["low"] = k.low;
                j["high"] = k.high;
            } else {
                j["kind"] = "smooth";
                j["formula"] = k.formula;
                j["params"] = k.params;
            }
        },
        f.kind());
    j["domain"] = {{"center", f.domain().center}, {"side", f.domain().side}};
    j["quad_order"] = f.quad_order();
    if (!f.frame().is_identity()) {
        const Frame& fr = f.frame();
        j["frame"] = {{"scale", fr.scale}, {"flip", fr.flip}, {"shift", fr.shift}, {"alpha", fr.alpha},
                      {"beta", fr.beta}};
    }
    return j;
}

inline json to_json(const AnyFunction& f)
{
    return std::visit([](const auto& g) { return to_json(g); }, f);
}

inline CantorSpec cantor_spec_from_json(const json& j, const detail::Reader& rd, const std::string& path)
{
    const json& ks = rd.at(j, "ks", path);
    if (!ks.is_array())
        rd.fail(path + "/ks", "expected an array of integers");
    std::vector<std::int64_t> k;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (!ks[i].is_number_integer())
            rd.fail(path + "/ks/" + std::to_string(i), "expected an integer");
        k.push_back(ks[i].get<std::int64_t>());
    }
    const json& d = rd.at(j, "depth", path);
    if (!d.is_number_integer())
        rd.fail(path + "/depth", "expected an integer");
    return detail::rethrow_as_parse_error(rd, path, [&] { return CantorSpec(std::move(k), d.get<int>()); });
}

inline BVFunction1D bv1d_from_json(const json& j, const detail::Reader& rd = detail::Reader{})
{
    const auto dom = rd.numbers(rd.at(j, "domain", ""), "/domain", 2);
    std::vector<double> bps;
    if (j.contains("breakpoints"))
        bps = rd.numbers(j["breakpoints"], "/breakpoints");
    const auto slopes = rd.numbers(rd.at(j, "slopes", ""), "/slopes");
    std::vector<Atom> atoms;
    if (j.contains("atoms")) {
        const json& a = j["atoms"];
        if (!a.is_array())
            rd.fail("/atoms", "expected an array of [x, h] pairs");
        for (std::size_t i = 0; i < a.size(); ++i) {
            const auto p = rd.numbers(a[i], "/atoms/" + std::to_string(i), 2);
            atoms.push_back({p[0], p[1]});
        }
    }
    std::optional<CantorPart> cantor;
    if (j.contains("cantor") && !j["cantor"].is_null()) {
        const json& c = j["cantor"];
        CantorPart part{cantor_spec_from_json(c, rd, "/cantor")};
        if (c.contains("scale"))
            part.scale = rd.number(c["scale"], "/cantor/scale");
        if (c.contains("offset"))
            part.offset = rd.number(c["offset"], "/cantor/offset");
        cantor = part;
    }
    double v0 = 0.0;
    if (j.contains("value_at_left"))
        v0 = rd.number(j["value_at_left"], "/value_at_left");
    const Interval domain =
        detail::rethrow_as_parse_error(rd, "/domain", [&] { return Interval(dom[0], dom[1]); });
    return detail::rethrow_as_parse_error(rd, "/slopes", [&] {
        return BVFunction1D(domain, std::move(bps), slopes, std::move(atoms), std::move(cantor), v0);
    });
}

inline Function2D function2d_from_json(const json& j, const detail::Reader& rd = detail::Reader{})
{
    const json& kind = rd.at(j, "kind", "");
    if (!kind.is_string())
        rd.fail("/kind", "expected a string");
    const std::string k = kind.get<std::string>();
    auto vec2 = [&](const json& v, const std::string& path) {
        const auto xs = rd.numbers(v, path, 2);
        return Vec2{xs[0], xs[1]};
    };
    auto level = [&](const char* key, double dflt) {
        return j.contains(key) ? rd.number(j[key], std::string("/") + key) : dflt;
    };
    FunctionKind fk;
    if (k == "linear") {
        fk = kinds::Linear{vec2(rd.at(j, "gradient", ""), "/gradient")};
    } else if (k == "halfplane_indicator") {
        fk = kinds::HalfplaneIndicator{vec2(rd.at(j, "normal", ""), "/normal"),
                                       j.contains("offset") ? rd.number(j["offset"], "/offset") : 0.0,
                                       level("low", 0.0), level("high", 1.0)};
    } else if (k == "polygon_indicator") {
        const json& v = rd.at(j, "vertices", "");
        if (!v.is_array())
            rd.fail("/vertices", "expected an array of [x, y] pairs");
        geom::Polygon poly;
        for (std::size_t i = 0; i < v.size(); ++i)
            poly.push_back(vec2(v[i], "/vertices/" + std::to_string(i)));
        fk = kinds::PolygonIndicator{std::move(poly), level("low", 0.0), level("high", 1.0)};
    } else if (k == "smooth") {
        const json& f = rd.at(j, "formula", "");
        if (!f.is_string())
            rd.fail("/formula", "expected a string");
        fk = kinds::Smooth{f.get<std::string>(), rd.numbers(rd.at(j, "params", ""), "/params")};
    } else {
        rd.fail("/kind", "unknown kind '" + k + "'");
    }
    Cube<2> domain = Cube<2>::unit();
    if (j.contains("domain")) {
        const json& d = j["domain"];
        const Vec2 c = vec2(rd.at(d, "center", "/domain"), "/domain/center");
        const double s = rd.number(rd.at(d, "side", "/domain"), "/domain/side");
        domain = detail::rethrow_as_parse_error(rd, "/domain/side", [&] { return Cube<2>(c, s); });
    }
    int quad = 64;
    if (j.contains("quad_order")) {
        if (!j["quad_order"].is_number_integer())
            rd.fail("/quad_order", "expected an integer");
        quad = j["quad_order"].get<int>();
    }
    Frame fr;
    if (j.contains("frame")) {
        const json& f = j["frame"];
        if (f.contains("scale"))
            fr.scale = rd.number(f["scale"], "/frame/scale");
        if (f.contains("flip")) {
            if (!f["flip"].is_array() || f["flip"].size() != 2 || !f["flip"][0].is_boolean() ||
                !f["flip"][1].is_boolean())
                rd.fail("/frame/flip", "expected two booleans");
            fr.flip = {f["flip"][0].get<bool>(), f["flip"][1].get<bool>()};
        }
        if (f.contains("shift"))
            fr.shift = vec2(f["shift"], "/frame/shift");
        if (f.contains("alpha"))
            fr.alpha = rd.number(f["alpha"], "/frame/alpha");
        if (f.contains("beta"))
            fr.beta = rd.number(f["beta"], "/frame/beta");
    }
    return detail::rethrow_as_parse_error(rd, "/kind", [&] { return Function2D(std::move(fk), domain, quad, fr); });
}

inline AnyFunction function_from_json(const json& j, const detail::Reader& rd = detail::Reader{})
{
    if (!j.is_object())
        rd.fail("/", "expected a JSON object");
    const json& dim = rd.at(j, "dim", "");
    if (!dim.is_number_integer())
        rd.fail("/dim", "expected 1 or 2");
    switch (dim.get<int>()) {
    case 1: return bv1d_from_json(j, rd);
    case 2: return function2d_from_json(j, rd);
    default: rd.fail("/dim", "expected 1 or 2");
    }
}

inline json parse_json(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(Errc::parse_error,
                    "line " + std::to_string(detail::line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)) +
                        ": malformed JSON (" + e.what() + ")");
    }
}

inline AnyFunction parse_function(const std::string& text)
{
    return function_from_json(parse_json(text), detail::Reader(text));
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::invalid_argument, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline AnyFunction load_function(const std::string& path) { return parse_function(read_file(path)); }

inline void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(Errc::invalid_argument, "cannot write '" + path + "'");
    out << text;
}

/// Pretty JSON with a trailing newline. Doubles use the shortest representation
/// that round-trips exactly.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---- results ----------------------------------------------------------------

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json to_json(const OscResult& r)
{
    return json{{"mean", r.mean}, {"osc", r.osc}, {"tv", r.tv}, {"quotient", optional_number(r.quotient)},
                {"est_error", r.est_error}};
}

template <std::size_t N>
json to_json(const Cube<N>& q)
{
    return json{{"center", q.center}, {"side", q.side}, {"flip", q.flip}};
}

template <std::size_t N>
json to_json(const PackingFamily<N>& fam)
{
    json cubes = json::array();
    for (const auto& c : fam.cubes) {
        json row = to_json(c.cube);
        row["weight"] = c.weight;
        row["result"] = to_json(c.result);
        cubes.push_back(row);
    }
    return json{{"mode", std::string(to_string(fam.mode))},
                {"eps", fam.eps},
                {"h", fam.h},
                {"value", fam.value},
                {"lower_bound", fam.lower_bound},
                {"upper_bound", fam.upper_bound},
                {"exact", fam.exact},
                {"axis_aligned", fam.axis_aligned},
                {"candidates", fam.candidates},
                {"cubes", cubes}};
}

template <std::size_t N>
json to_json(const PoincareProfile<N>& p)
{
    json samples = json::array();
    for (const auto& s : p.samples) {
        json row{{"eps", s.eps}, {"value", s.value}};
        row["argmax"] = s.argmax ? to_json(*s.argmax) : json(nullptr);
        samples.push_back(row);
    }
    return json{{"x", p.x},           {"tau", p.tau},         {"p_estimate", p.p_estimate},
                {"log_slope", p.log_slope}, {"in_support", p.in_support}, {"samples", samples}};
}

template <std::size_t N>
json to_json(const RigidityReport<N>& r)
{
    json j{{"class", std::string(to_string(r.cls))},
           {"fit_error", r.fit_error},
           {"jump_fit_error", r.jump_fit_error},
           {"linear_fit_error", r.linear_fit_error},
           {"jump", {{"a", r.jump.a}, {"b", r.jump.b}, {"axis", r.jump.axis}, {"offset", r.jump.offset}}},
           {"gradient", r.gradient},
           {"intercept", r.intercept},
           {"hyperplane_meets_core", r.hyperplane_meets_core}};
    if (!std::isnan(r.max_subcube_quotient)) {
        j["max_subcube_quotient"] = r.max_subcube_quotient;
        j["quarter_bound_holds"] = r.quarter_bound_holds;
    }
    return j;
}

template <std::size_t N>
json to_json(const TangentCandidate<N>& c)
{
    json cubes = json::array();
    for (const auto& q : c.source_cubes)
        cubes.push_back(to_json(q));
    return json{{"grid", c.grid},       {"converged", c.converged},     {"l1_cauchy_gap", c.l1_cauchy_gap},
                {"gaps", c.gaps},       {"mean", c.mean},               {"osc", c.osc},
                {"tv", c.tv_estimate},  {"source_cubes", cubes}};
}

inline json to_json(const ModifiedPoincareResult& r)
{
    return json{{"lhs", r.lhs}, {"rhs", r.rhs}, {"constant", r.constant}, {"holds", r.holds},
                {"norm", std::string(r.norm)}};
}

inline json to_json(const ScaleSchedule& s)
{
    return json{{"jump_scales", s.jump_scales}, {"affine_scales", s.affine_scales}};
}

// ---- CSV ----------------------------------------------------------------------

inline std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <std::size_t N>
void write_csv(std::ostream& os, const PackingFamily<N>& fam)
{
    for (std::size_t d = 0; d < N; ++d)
        os << "center" << d << ',';
    os << "side,mean,osc,tv,quotient,weight\n";
    for (const auto& c : fam.cubes) {
        for (std::size_t d = 0; d < N; ++d)
            os << fmt17(c.cube.center[d]) << ',';
        os << fmt17(c.cube.side) << ',' << fmt17(c.result.mean) << ',' << fmt17(c.result.osc) << ','
           << fmt17(c.result.tv) << ',' << (c.result.quotient ? fmt17(*c.result.quotient) : std::string()) << ','
           << fmt17(c.weight) << '\n';
    }
}

template <std::size_t N>
void write_csv(std::ostream& os, const TangentCandidate<N>& c)
{
    const double h = 1.0 / static_cast<double>(c.grid);
    auto coord = [&](std::size_t i) { return -0.5 + (static_cast<double>(i) + 0.5) * h; };
    if constexpr (N == 1) {
        os << "y,u\n";
        for (std::size_t i = 0; i < c.samples.size(); ++i)
            os << fmt17(coord(i)) << ',' << fmt17(c.samples[i]) << '\n';
    } else {
        os << "y1,y2,u\n";
        for (std::size_t idx = 0; idx < c.samples.size(); ++idx)
            os << fmt17(coord(idx / c.grid)) << ',' << fmt17(coord(idx % c.grid)) << ',' << fmt17(c.samples[idx])
               << '\n';
    }
}

template <std::size_t N>
void write_csv(std::ostream& os, const PoincareProfile<N>& p)
{
    os << "eps,value\n";
    for (const auto& s : p.samples)
        os << fmt17(s.eps) << ',' << fmt17(s.value) << '\n';
}

}  // namespace bvosc::io
