#pragma once

// JSON problem files. Numbers are read as exact decimals or fractions.

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "fracmech/problem.hpp"

namespace fracmech {

using OrderedJson = nlohmann::ordered_json;

namespace detail {

inline const OrderedJson& field(const OrderedJson& obj, const std::string& key, const std::string& where)
{
    if (!obj.is_object()) {
        throw ParseError(where + ": expected an object");
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ParseError(where + "." + key + ": missing field");
    }
    return *it;
}

inline std::string text(const OrderedJson& v, const std::string& where)
{
    if (!v.is_string()) {
        throw ParseError(where + ": expected a string");
    }
    return v.get<std::string>();
}

// Accepts "1/2", "0.5" or a bare JSON number (read through its text form).
inline Rational number(const OrderedJson& v, const std::string& where)
{
    std::string s;
    if (v.is_string()) {
        s = v.get<std::string>();
    } else if (v.is_number_integer() || v.is_number_unsigned()) {
        s = v.dump();
    } else if (v.is_number_float()) {
        s = v.dump();
    } else {
        throw ParseError(where + ": expected a number or numeric string");
    }
    try {
        return parse_rational(s);
    } catch (const ParseError& e) {
        throw ParseError(where + ": " + e.what());
    }
}

inline Endpoint endpoint(const OrderedJson& v, const std::string& where)
{
    const std::string s = text(v, where);
    if (s == "a") {
        return Endpoint::A;
    }
    if (s == "b") {
        return Endpoint::B;
    }
    throw ParseError(where + ": expected \"a\" or \"b\", found \"" + s + "\"");
}

inline int variable_ref(const ProblemSpec& spec, const OrderedJson& v, const std::string& where)
{
    const std::string name = text(v, where);
    const int r = spec.variable_index(name);
    if (r == 0) {
        throw SpecError(where + ": undeclared variable '" + name + "'");
    }
    return r;
}

// One factor {var, op, pow}: op^pow applied to var, or var at an endpoint.
inline Atom factor(const ProblemSpec& spec, const OrderedJson& f, const std::string& where, bool allow_endpoint)
{
    const int r = variable_ref(spec, field(f, "var", where), where + ".var");
    std::string op = "id";
    if (f.contains("op")) {
        op = text(f["op"], where + ".op");
    }
    if (f.contains("at")) {
        if (!allow_endpoint) {
            throw ParseError(where + ".at: endpoint values are only allowed in boundary constraints");
        }
        if (op != "id") {
            throw ParseError(where + ".op: endpoint values take no operator");
        }
        return Atom::endpoint(r, spec.variable(r), endpoint(f["at"], where + ".at"));
    }
    int pow = op == "id" ? 0 : 1;
    if (f.contains("pow")) {
        const auto& p = f["pow"];
        if (!p.is_number_integer() || p.get<int>() < 0) {
            throw ParseError(where + ".pow: expected a non-negative integer");
        }
        pow = p.get<int>();
    }
    if (op == "id") {
        if (pow != 0) {
            throw ParseError(where + ".pow: must be 0 for op \"id\"");
        }
        return spec.coordinate(r);
    }
    if (op != "L" && op != "R") {
        throw ParseError(where + ".op: expected \"id\", \"L\" or \"R\", found \"" + op + "\"");
    }
    return spec.coordinate(r, repeat(op == "L" ? Op::L : Op::R, pow));
}

inline QuadForm terms(const ProblemSpec& spec, const OrderedJson& list, const std::string& where, bool allow_endpoint)
{
    if (!list.is_array()) {
        throw ParseError(where + ": expected an array");
    }
    QuadForm out;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string w = where + "[" + std::to_string(i) + "]";
        const Rational c = number(field(list[i], "coeff", w), w + ".coeff");
        const auto& fs = field(list[i], "factors", w);
        if (!fs.is_array() || fs.size() > 2) {
            throw ParseError(w + ".factors: expected an array of at most two factors");
        }
        if (fs.empty()) {
            out += QuadForm(LinExpr::constant(c));
        } else if (fs.size() == 1) {
            out += QuadForm(LinExpr(factor(spec, fs[0], w + ".factors[0]", allow_endpoint), c));
        } else {
            out.add_quad(factor(spec, fs[0], w + ".factors[0]", allow_endpoint),
                         factor(spec, fs[1], w + ".factors[1]", allow_endpoint), c);
        }
    }
    return out;
}

inline void infer_orders(ProblemSpec& spec, const OrderedJson& j)
{
    int nl = 0;
    int nr = 0;
    auto scan = [&](const Atom& a) {
        const int n = static_cast<int>(a.word.size());
        if (n > 0 && is_pure(a.word, Op::L)) {
            nl = std::max(nl, n);
        } else if (n > 0 && is_pure(a.word, Op::R)) {
            nr = std::max(nr, n);
        }
    };
    for (const auto& a : spec.lagrangian.atoms()) {
        scan(a);
    }
    for (const auto& c : spec.constraints) {
        for (const auto& a : c.expr.atoms()) {
            scan(a);
        }
    }
    auto order = [&](const char* key, int inferred) {
        if (!j.contains(key)) {
            return inferred;
        }
        const auto& v = j[key];
        if (!v.is_number_integer() || v.get<int>() < 0) {
            throw ParseError(std::string(key) + ": expected a non-negative integer");
        }
        return v.get<int>();
    };
    spec.max_left_order = order("max_left_order", nl);
    spec.max_right_order = order("max_right_order", nr);
}

} // namespace detail

/// Builds and validates a ProblemSpec from parsed JSON.
inline ProblemSpec problem_from_json(const OrderedJson& j)
{
    ProblemSpec spec;
    spec.name = detail::text(detail::field(j, "name", "problem"), "name");
    if (spec.name.empty() || spec.name.find_first_of("/\\") != std::string::npos) {
        throw SpecError("name: must be a non-empty file-name-safe string");
    }
    try {
        spec.alpha = FracOrder(detail::number(detail::field(j, "alpha", "problem"), "alpha"));
        spec.beta = j.contains("beta") ? FracOrder(detail::number(j["beta"], "beta")) : spec.alpha;
    } catch (const OrderDomainError& e) {
        throw SpecError(std::string("alpha/beta: ") + e.what());
    }

    const auto& interval = detail::field(j, "interval", "problem");
    if (!interval.is_array() || interval.size() != 2) {
        throw ParseError("interval: expected [a, b]");
    }
    spec.a = detail::number(interval[0], "interval[0]");
    spec.b = detail::number(interval[1], "interval[1]");

    const auto& vars = detail::field(j, "variables", "problem");
    if (!vars.is_array()) {
        throw ParseError("variables: expected an array of names");
    }
    for (std::size_t i = 0; i < vars.size(); ++i) {
        spec.variables.push_back(detail::text(vars[i], "variables[" + std::to_string(i) + "]"));
    }
    if (spec.variables.empty()) {
        throw SpecError("variables: at least one variable is required");
    }

    spec.lagrangian = detail::terms(spec, detail::field(j, "lagrangian", "problem"), "lagrangian", false);

    if (j.contains("constraints")) {
        const auto& cs = j["constraints"];
        if (!cs.is_array()) {
            throw ParseError("constraints: expected an array");
        }
        for (std::size_t i = 0; i < cs.size(); ++i) {
            const std::string w = "constraints[" + std::to_string(i) + "]";
            ConstraintDecl c;
            c.multiplier = detail::text(detail::field(cs[i], "multiplier", w), w + ".multiplier");
            const std::string kind = detail::text(detail::field(cs[i], "kind", w), w + ".kind");
            if (kind == "dynamical") {
                c.kind = ConstraintKind::Dynamical;
            } else if (kind == "boundary") {
                c.kind = ConstraintKind::Boundary;
            } else {
                throw ParseError(w + ".kind: expected \"dynamical\" or \"boundary\"");
            }
            const bool boundary = c.kind == ConstraintKind::Boundary;
            const QuadForm q = detail::terms(spec, detail::field(cs[i], "terms", w), w + ".terms", boundary);
            auto lin = q.as_linear();
            if (!lin) {
                throw SpecError(w + ".terms: constraints must be linear");
            }
            c.expr = *lin;
            if (cs[i].contains("const")) {
                c.expr += LinExpr::constant(detail::number(cs[i]["const"], w + ".const"));
            }
            if (boundary && cs[i].contains("at")) {
                // Plain variables in a boundary constraint refer to the given endpoint.
                const Endpoint at = detail::endpoint(cs[i]["at"], w + ".at");
                LinExpr e = LinExpr::constant(c.expr.constant_term());
                for (const auto& [a, coef] : c.expr.terms()) {
                    e.add(a.kind == AtomKind::Coordinate && a.plain() ? Atom::endpoint(a.index, a.var, at) : a, coef);
                }
                c.expr = e;
            }
            spec.constraints.push_back(std::move(c));
        }
    }

    if (j.contains("boundary")) {
        const auto& bs = j["boundary"];
        if (!bs.is_array()) {
            throw ParseError("boundary: expected an array");
        }
        for (std::size_t i = 0; i < bs.size(); ++i) {
            const std::string w = "boundary[" + std::to_string(i) + "]";
            BoundaryDatum d;
            d.var = detail::text(detail::field(bs[i], "var", w), w + ".var");
            d.at = detail::endpoint(detail::field(bs[i], "at", w), w + ".at");
            d.value = detail::number(detail::field(bs[i], "value", w), w + ".value");
            spec.boundary.push_back(std::move(d));
        }
    }

    if (j.contains("momentum_operator")) {
        const std::string op = detail::text(j["momentum_operator"], "momentum_operator");
        if (op != "L" && op != "R") {
            throw ParseError("momentum_operator: expected \"L\" or \"R\"");
        }
        spec.momentum_operator = op == "L" ? Op::L : Op::R;
    }

    detail::infer_orders(spec, j);
    validate(spec);
    return spec;
}

inline ProblemSpec parse_problem_text(const std::string& content)
{
    OrderedJson j;
    try {
        j = OrderedJson::parse(content);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    return problem_from_json(j);
}

inline ProblemSpec parse_problem(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError(path + ": cannot open problem file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_problem_text(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    } catch (const SpecError& e) {
        throw SpecError(path + ": " + e.what());
    }
}

namespace detail {

inline OrderedJson factor_json(const Atom& a)
{
    OrderedJson f;
    f["var"] = a.var;
    if (a.kind == AtomKind::Endpoint) {
        f["at"] = a.level == static_cast<int>(Endpoint::A) ? "a" : "b";
        return f;
    }
    if (a.word.empty()) {
        f["op"] = "id";
        f["pow"] = 0;
    } else {
        f["op"] = a.word.front() == Op::L ? "L" : "R";
        f["pow"] = static_cast<int>(a.word.size());
    }
    return f;
}

inline OrderedJson terms_json(const QuadForm& q)
{
    OrderedJson out = OrderedJson::array();
    for (const auto& [k, c] : q.quad()) {
        OrderedJson t;
        t["coeff"] = to_string(c);
        t["factors"] = OrderedJson::array({factor_json(k.first), factor_json(k.second)});
        out.push_back(t);
    }
    for (const auto& [a, c] : q.lin().terms()) {
        OrderedJson t;
        t["coeff"] = to_string(c);
        t["factors"] = OrderedJson::array({factor_json(a)});
        out.push_back(t);
    }
    if (q.lin().constant_term() != 0) {
        OrderedJson t;
        t["coeff"] = to_string(q.lin().constant_term());
        t["factors"] = OrderedJson::array();
        out.push_back(t);
    }
    return out;
}

} // namespace detail

/// Serializes every field explicitly so that parsing the result reproduces
/// the same ProblemSpec.
inline OrderedJson problem_to_json(const ProblemSpec& spec)
{
    OrderedJson j;
    j["name"] = spec.name;
    j["alpha"] = spec.alpha.to_string();
    j["beta"] = spec.beta.to_string();
    j["interval"] = OrderedJson::array({to_string(spec.a), to_string(spec.b)});
    j["variables"] = spec.variables;
    j["max_left_order"] = spec.max_left_order;
    j["max_right_order"] = spec.max_right_order;
    j["momentum_operator"] = spec.momentum_operator == Op::L ? "L" : "R";
    j["lagrangian"] = detail::terms_json(spec.lagrangian);
    OrderedJson cs = OrderedJson::array();
    for (const auto& c : spec.constraints) {
        OrderedJson o;
        o["multiplier"] = c.multiplier;
        o["kind"] = c.kind == ConstraintKind::Dynamical ? "dynamical" : "boundary";
        LinExpr body = c.expr;
        body -= LinExpr::constant(c.expr.constant_term());
        o["terms"] = detail::terms_json(QuadForm(body));
        o["const"] = to_string(c.expr.constant_term());
        cs.push_back(o);
    }
    j["constraints"] = cs;
    OrderedJson bs = OrderedJson::array();
    for (const auto& d : spec.boundary) {
        OrderedJson o;
        o["var"] = d.var;
        o["at"] = d.at == Endpoint::A ? "a" : "b";
        o["value"] = to_string(d.value);
        bs.push_back(o);
    }
    j["boundary"] = bs;
    return j;
}

inline std::string serialize_problem(const ProblemSpec& spec)
{
    return problem_to_json(spec).dump(2) + "\n";
}

} // namespace fracmech
