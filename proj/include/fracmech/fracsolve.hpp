#pragma once

// Numeric solution of the linear fractional equations on a uniform grid.
// The phase-space equations are first reduced symbolically to a square
// system of differential equations, then assembled into one dense system.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fracmech/canonical.hpp"
#include "fracmech/constraints.hpp"
#include "fracmech/dense.hpp"
#include "fracmech/fracnum.hpp"

namespace fracmech {

struct Pin {
    Atom var;
    Endpoint at = Endpoint::A;
    Rational value;
    std::size_t equation = 0;
    std::string source;
};

struct Recovery {
    Atom atom;
    LinExpr value;
};

struct NumericModel {
    ProblemSpec spec;
    std::vector<LinExpr> equations; // each reads expr = 0
    std::vector<std::string> origins;
    std::vector<Atom> unknowns;
    std::vector<Recovery> recoveries; // evaluated in reverse order
    std::vector<Atom> gauge_fixed;
    std::vector<Pin> pins;
};

namespace detail {

inline bool has_word(const LinExpr& e, Op op)
{
    for (const auto& [a, c] : e.terms()) {
        if (std::find(a.word.begin(), a.word.end(), op) != a.word.end()) {
            return true;
        }
    }
    return false;
}

inline bool is_algebraic(const LinExpr& e)
{
    return std::all_of(e.terms().begin(), e.terms().end(), [](const auto& t) { return t.first.plain(); });
}

inline bool mentions(const LinExpr& e, const Atom& base)
{
    return std::any_of(e.terms().begin(), e.terms().end(),
                       [&](const auto& t) { return t.first.base() == base; });
}

// Phase-space equations as residuals, with momentum evolution written with
// the requested operator.
inline std::vector<std::pair<LinExpr, std::string>> phase_equations(const CanonicalSystem& sys, Op momentum_op)
{
    std::vector<std::pair<LinExpr, std::string>> out;
    for (const auto& eq : sys.equations) {
        LinExpr lhs;
        for (const auto& [a, c] : eq.lhs.terms()) {
            Atom b = a;
            if (b.kind == AtomKind::Momentum && !b.word.empty()) {
                b.word.front() = momentum_op;
            }
            lhs.add(b, c);
        }
        out.emplace_back(lhs - eq.rhs, eq.origin);
    }
    return out;
}

class Reducer {
public:
    Reducer(const CanonicalSystem& sys, NumericModel& model) : sys_(sys), model_(model) {}

    void run()
    {
        normalize();
        while (step()) {
            normalize();
        }
    }

    std::set<Atom> unknowns() const
    {
        std::set<Atom> out;
        for (const auto& e : model_.equations) {
            for (const auto& [a, c] : e.terms()) {
                out.insert(a.base());
            }
        }
        return out;
    }

    void gauge_fix(const Atom& alias)
    {
        bind(alias, LinExpr());
        model_.gauge_fixed.push_back(alias);
    }

private:
    void normalize()
    {
        std::vector<LinExpr> kept;
        std::vector<std::string> origins;
        for (std::size_t i = 0; i < model_.equations.size(); ++i) {
            const LinExpr& e = model_.equations[i];
            if (e.is_zero()) {
                continue;
            }
            if (e.is_constant()) {
                throw WellPosednessError("equation from " + model_.origins[i] + " reduces to the contradiction " +
                                         render(e) + " = 0");
            }
            if (in_span(kept, e)) {
                continue;
            }
            kept.push_back(e);
            origins.push_back(model_.origins[i]);
        }
        model_.equations = std::move(kept);
        model_.origins = std::move(origins);
    }

    bool substitutable(const Atom& t, const LinExpr& value) const
    {
        if (value.constant_term() == 0) {
            return true;
        }
        for (const auto& e : model_.equations) {
            for (const auto& [a, c] : e.terms()) {
                if (a.base() == t && !a.plain()) {
                    return false;
                }
            }
        }
        for (const auto& r : model_.recoveries) {
            for (const auto& [a, c] : r.value.terms()) {
                if (a.base() == t && !a.plain()) {
                    return false;
                }
            }
        }
        return true;
    }

    void bind(const Atom& t, const LinExpr& value)
    {
        const Bindings b{{t, value}};
        for (auto& e : model_.equations) {
            e = substitute_bases(e, b);
        }
        for (auto& r : model_.recoveries) {
            r.value = substitute_bases(r.value, b);
        }
        model_.recoveries.push_back({t, value});
    }

    bool eliminate_from(std::size_t i, const Atom& t)
    {
        const LinExpr value = solve_for(model_.equations[i], t);
        if (value.contains(t) || !substitutable(t, value)) {
            return false;
        }
        model_.equations.erase(model_.equations.begin() + static_cast<std::ptrdiff_t>(i));
        model_.origins.erase(model_.origins.begin() + static_cast<std::ptrdiff_t>(i));
        bind(t, value);
        return true;
    }

    bool worded_anywhere(const Atom& t) const
    {
        for (const auto& e : model_.equations) {
            for (const auto& [a, c] : e.terms()) {
                if (a.base() == t && !a.plain()) {
                    return true;
                }
            }
        }
        return false;
    }

    template <typename Pred>
    bool eliminate_algebraic(Pred pred, bool greatest_first)
    {
        for (std::size_t i = 0; i < model_.equations.size(); ++i) {
            const LinExpr& e = model_.equations[i];
            if (!is_algebraic(e)) {
                continue;
            }
            std::vector<Atom> candidates;
            for (const auto& [a, c] : e.terms()) {
                if (pred(a)) {
                    candidates.push_back(a);
                }
            }
            if (greatest_first) {
                std::reverse(candidates.begin(), candidates.end());
            }
            for (const auto& t : candidates) {
                if (eliminate_from(i, t)) {
                    return true;
                }
            }
        }
        return false;
    }

    // An alias confined to a single equation only defines itself.
    bool remove_alias_definition()
    {
        for (const auto& alias : sys_.undetermined) {
            const Atom& m = alias.multiplier;
            std::vector<std::size_t> where;
            for (std::size_t i = 0; i < model_.equations.size(); ++i) {
                if (mentions(model_.equations[i], m)) {
                    where.push_back(i);
                }
            }
            if (where.size() != 1 || worded_anywhere(m)) {
                continue;
            }
            const std::size_t i = where.front();
            const LinExpr value = solve_for(model_.equations[i], m);
            model_.equations.erase(model_.equations.begin() + static_cast<std::ptrdiff_t>(i));
            model_.origins.erase(model_.origins.begin() + static_cast<std::ptrdiff_t>(i));
            model_.recoveries.push_back({m, value});
            return true;
        }
        return false;
    }

    bool step()
    {
        auto is_alias = [&](const Atom& a) { return sys_.alias_for_multiplier(a) != nullptr; };
        if (eliminate_algebraic(is_alias, false)) {
            return true;
        }
        if (eliminate_algebraic([](const Atom& a) { return a.is_momentum(); }, true)) {
            return true;
        }
        if (remove_alias_definition()) {
            return true;
        }
        auto free_coordinate = [&](const Atom& a) {
            return a.kind == AtomKind::Coordinate && !worded_anywhere(a);
        };
        if (eliminate_algebraic(free_coordinate, false)) {
            return true;
        }
        auto dynamical = [&](const Atom& a) { return a.is_multiplier() && !is_alias(a); };
        if (eliminate_algebraic(dynamical, false)) {
            return true;
        }
        return eliminate_algebraic([](const Atom&) { return true; }, false);
    }

    const CanonicalSystem& sys_;
    NumericModel& model_;
};

// Kuhn's augmenting-path matching; returns, for each left vertex, its right
// partner or -1.
inline std::vector<int> bipartite_match(std::size_t left, std::size_t right,
                                        const std::vector<std::vector<std::size_t>>& adj)
{
    std::vector<int> match_right(right, -1);
    std::vector<int> match_left(left, -1);
    for (std::size_t u = 0; u < left; ++u) {
        std::vector<bool> seen(right, false);
        auto augment = [&](auto&& self, std::size_t v) -> bool {
            for (auto w : adj[v]) {
                if (seen[w]) {
                    continue;
                }
                seen[w] = true;
                if (match_right[w] < 0 || self(self, static_cast<std::size_t>(match_right[w]))) {
                    match_right[w] = static_cast<int>(v);
                    match_left[v] = static_cast<int>(w);
                    return true;
                }
            }
            return false;
        };
        augment(augment, u);
    }
    return match_left;
}

inline std::optional<Atom> resolve_name(const CanonicalSystem& sys, const std::string& name)
{
    const ProblemSpec& spec = sys.spec;
    if (int r = spec.variable_index(name); r != 0) {
        return spec.coordinate(r);
    }
    for (int r = 1; r <= spec.variable_count(); ++r) {
        for (int n = 0; n < std::max(spec.max_left_order, 1); ++n) {
            if (render(spec.momentum(r, n)) == name) {
                return spec.momentum(r, n);
            }
        }
        for (int n = 0; n < spec.max_right_order; ++n) {
            if (render(spec.momentum_right(r, n)) == name) {
                return spec.momentum_right(r, n);
            }
        }
    }
    for (const auto& c : spec.constraints) {
        if (c.multiplier == name && c.kind == ConstraintKind::Dynamical) {
            return Atom::multiplier(name);
        }
    }
    for (const auto& a : sys.undetermined) {
        if (a.multiplier.var == name) {
            return a.multiplier;
        }
    }
    return std::nullopt;
}

inline std::string endpoint_name(Endpoint e) { return e == Endpoint::A ? "a" : "b"; }

// Explicit boundary data plus the data implied by boundary-kind constraints.
inline std::vector<BoundaryDatum> collect_boundary(const ProblemSpec& spec)
{
    std::vector<BoundaryDatum> data = spec.boundary;
    for (const auto& c : spec.constraints) {
        if (c.kind != ConstraintKind::Boundary) {
            continue;
        }
        const auto& [atom, coef] = *c.expr.terms().begin();
        BoundaryDatum d{atom.var, static_cast<Endpoint>(atom.level), -c.expr.constant_term() / coef};
        auto same = std::find_if(data.begin(), data.end(), [&](const BoundaryDatum& o) {
            return o.var == d.var && o.at == d.at;
        });
        if (same == data.end()) {
            data.push_back(d);
        } else if (same->value != d.value) {
            throw SpecError("boundary: " + d.var + "(" + endpoint_name(d.at) + ") is given as " +
                            to_string(same->value) + " and as " + to_string(d.value) + " by constraint '" +
                            c.multiplier + "'");
        }
    }
    return data;
}

} // namespace detail

/// Reduces the canonical equations to a square differential system and
/// attaches the boundary data.
inline NumericModel reduce_for_numerics(const CanonicalSystem& sys)
{
    if (sys.equations.empty()) {
        throw WellPosednessError("no equations to solve");
    }
    NumericModel model;
    model.spec = sys.spec;
    for (auto& [e, origin] : detail::phase_equations(sys, sys.spec.momentum_operator)) {
        model.equations.push_back(e);
        model.origins.push_back(origin);
    }

    detail::Reducer reducer(sys, model);
    reducer.run();
    for (;;) {
        const auto unknowns = reducer.unknowns();
        if (unknowns.size() <= model.equations.size()) {
            break;
        }
        std::optional<Atom> free;
        for (const auto& a : sys.undetermined) {
            if (unknowns.count(a.multiplier) != 0) {
                free = a.multiplier;
                break;
            }
        }
        if (!free) {
            break;
        }
        reducer.gauge_fix(*free);
        reducer.run();
    }

    const auto unknown_set = reducer.unknowns();
    model.unknowns.assign(unknown_set.begin(), unknown_set.end());
    for (const auto& a : model.unknowns) {
        if (a.kind == AtomKind::Endpoint) {
            throw WellPosednessError("endpoint value '" + render(a) + "' appears in a dynamical equation");
        }
    }

    // Every declared variable must end up solved or recovered.
    for (int r = 1; r <= sys.spec.variable_count(); ++r) {
        const Atom x = sys.spec.coordinate(r);
        const bool recovered = std::any_of(model.recoveries.begin(), model.recoveries.end(),
                                           [&](const Recovery& rec) { return rec.atom == x; });
        if (!recovered && unknown_set.count(x) == 0) {
            throw WellPosednessError("variable '" + x.var + "' is not determined by any equation");
        }
    }

    const std::size_t ne = model.equations.size();
    const std::size_t nu = model.unknowns.size();
    std::vector<std::vector<std::size_t>> adj(nu);
    for (std::size_t u = 0; u < nu; ++u) {
        for (std::size_t e = 0; e < ne; ++e) {
            if (detail::mentions(model.equations[e], model.unknowns[u])) {
                adj[u].push_back(e);
            }
        }
    }
    const auto match = detail::bipartite_match(nu, ne, adj);
    std::vector<bool> eq_used(ne, false);
    std::string deficient;
    for (std::size_t u = 0; u < nu; ++u) {
        if (match[u] < 0) {
            deficient += (deficient.empty() ? "" : ", ") + render(model.unknowns[u]);
        } else {
            eq_used[static_cast<std::size_t>(match[u])] = true;
        }
    }
    if (ne != nu || !deficient.empty()) {
        std::string surplus;
        for (std::size_t e = 0; e < ne; ++e) {
            if (!eq_used[e]) {
                surplus += (surplus.empty() ? "" : "; ") + render(model.equations[e]) + " = 0";
            }
        }
        throw WellPosednessError(std::to_string(ne) + " equations for " + std::to_string(nu) + " unknowns" +
                                 (deficient.empty() ? "" : "; undetermined: " + deficient) +
                                 (surplus.empty() ? "" : "; surplus: " + surplus));
    }

    // Boundary data, translated through single-symbol recoveries.
    struct Datum {
        Atom var;
        Endpoint at;
        Rational value;
        std::string source;
    };
    std::vector<Datum> data;
    for (const auto& d : detail::collect_boundary(sys.spec)) {
        const std::string source = d.var + "(" + detail::endpoint_name(d.at) + ") = " + to_string(d.value);
        auto atom = detail::resolve_name(sys, d.var);
        if (!atom) {
            throw SpecError("boundary: unknown symbol '" + d.var + "'");
        }
        Rational value = d.value;
        for (auto it = model.recoveries.rbegin(); it != model.recoveries.rend(); ++it) {
            if (it->atom != *atom) {
                continue;
            }
            const LinExpr& rec = it->value;
            if (rec.terms().size() != 1 || !rec.terms().begin()->first.plain()) {
                throw WellPosednessError("boundary datum " + source + " refers to '" + d.var +
                                         "', which is eliminated as " + render(rec));
            }
            const auto& [y, c] = *rec.terms().begin();
            value = (value - rec.constant_term()) / c;
            atom = y;
            break;
        }
        if (unknown_set.count(*atom) == 0) {
            throw WellPosednessError("boundary datum " + source + " does not refer to an unknown of the reduced system");
        }
        data.push_back({*atom, d.at, value, source});
    }

    std::vector<std::vector<std::size_t>> dadj(data.size());
    for (std::size_t k = 0; k < data.size(); ++k) {
        for (std::size_t e = 0; e < ne; ++e) {
            const LinExpr& eq = model.equations[e];
            const bool side = data[k].at == Endpoint::A ? detail::has_word(eq, Op::L) : detail::has_word(eq, Op::R);
            if (side && detail::mentions(eq, data[k].var)) {
                dadj[k].push_back(e);
            }
        }
    }
    const auto dmatch = detail::bipartite_match(data.size(), ne, dadj);
    std::vector<bool> pinned(ne, false);
    for (std::size_t k = 0; k < data.size(); ++k) {
        if (dmatch[k] < 0) {
            throw WellPosednessError("boundary datum " + data[k].source +
                                     " does not match any differential equation on its side");
        }
        const auto e = static_cast<std::size_t>(dmatch[k]);
        pinned[e] = true;
        model.pins.push_back({data[k].var, data[k].at, data[k].value, e, data[k].source});
    }
    for (std::size_t e = 0; e < ne; ++e) {
        if (!detail::is_algebraic(model.equations[e]) && !pinned[e]) {
            throw WellPosednessError("differential equation " + render(model.equations[e]) +
                                     " = 0 has no boundary datum");
        }
    }
    return model;
}

struct RowOrigin {
    std::size_t equation = 0;
    std::size_t node = 0;
    bool boundary = false;
    std::string text;
};

struct DiscreteSystem {
    UniformGrid grid{0.0, 1.0, 2};
    std::vector<std::pair<Atom, std::size_t>> unknowns; // (variable, node)
    DenseMatrix matrix;
    std::vector<double> rhs;
    std::vector<RowOrigin> row_origin;
};

// Largest dense system assembled before refusing (entries).
inline constexpr std::size_t max_dense_entries = std::size_t{1} << 27;

namespace detail {

class BlockCache {
public:
    BlockCache(const ProblemSpec& spec, const UniformGrid& grid) : spec_(spec), grid_(grid) {}

    const DenseMatrix& block(const Word& w)
    {
        if (auto it = cache_.find(w); it != cache_.end()) {
            return it->second;
        }
        DenseMatrix m = op(w.back());
        for (auto it = w.rbegin() + 1; it != w.rend(); ++it) {
            m = op(*it) * m;
        }
        return cache_.emplace(w, std::move(m)).first->second;
    }

private:
    const DenseMatrix& op(Op o)
    {
        const Word key{o};
        if (auto it = cache_.find(key); it != cache_.end()) {
            return it->second;
        }
        DenseMatrix m = o == Op::L ? operator_matrix(spec_.alpha, grid_, Side::Left)
                                   : operator_matrix(spec_.beta, grid_, Side::Right);
        return cache_.emplace(key, std::move(m)).first->second;
    }

    const ProblemSpec& spec_;
    const UniformGrid& grid_;
    std::map<Word, DenseMatrix> cache_;
};

inline UniformGrid grid_for(const ProblemSpec& spec, std::size_t m)
{
    return UniformGrid(to_double(spec.a), to_double(spec.b), m);
}

} // namespace detail

/// One row per equation and node; the row of a pinned equation at its
/// endpoint node is replaced by the boundary datum.
inline DiscreteSystem assemble(const NumericModel& model, const UniformGrid& grid)
{
    require_numeric_order(model.spec.alpha);
    require_numeric_order(model.spec.beta);
    const std::size_t n = grid.nodes();
    const std::size_t nu = model.unknowns.size();
    const std::size_t size = nu * n;
    if (size == 0) {
        throw WellPosednessError("no unknowns to solve for");
    }
    if (size > 0 && size > max_dense_entries / size) {
        throw WellPosednessError("dense system of size " + std::to_string(size) + " exceeds the solver limit");
    }

    DiscreteSystem ds;
    ds.grid = grid;
    std::map<Atom, std::size_t> column;
    for (std::size_t u = 0; u < nu; ++u) {
        column.emplace(model.unknowns[u], u * n);
        for (std::size_t k = 0; k < n; ++k) {
            ds.unknowns.emplace_back(model.unknowns[u], k);
        }
    }
    ds.matrix = DenseMatrix(size, size);
    ds.rhs.assign(size, 0.0);
    ds.row_origin.resize(size);

    detail::BlockCache blocks(model.spec, grid);
    for (std::size_t e = 0; e < model.equations.size(); ++e) {
        const LinExpr& eq = model.equations[e];
        const double constant = to_double(eq.constant_term());
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t row = e * n + k;
            ds.rhs[row] = -constant;
            ds.row_origin[row] = {e, k, false, model.origins[e] + " at node " + std::to_string(k)};
        }
        for (const auto& [a, c] : eq.terms()) {
            const double coef = to_double(c);
            const std::size_t col0 = column.at(a.base());
            if (a.plain()) {
                for (std::size_t k = 0; k < n; ++k) {
                    ds.matrix(e * n + k, col0 + k) += coef;
                }
                continue;
            }
            const DenseMatrix& b = blocks.block(a.word);
            for (std::size_t k = 0; k < n; ++k) {
                auto row = ds.matrix.row(e * n + k);
                for (std::size_t j = 0; j < n; ++j) {
                    row[col0 + j] += coef * b(k, j);
                }
            }
        }
    }

    for (const auto& pin : model.pins) {
        const std::size_t node = pin.at == Endpoint::A ? 0 : n - 1;
        const std::size_t row = pin.equation * n + node;
        auto r = ds.matrix.row(row);
        std::fill(r.begin(), r.end(), 0.0);
        r[column.at(pin.var) + node] = 1.0;
        ds.rhs[row] = to_double(pin.value);
        ds.row_origin[row] = {pin.equation, node, true, "boundary " + pin.source};
    }
    return ds;
}

// Pivot threshold relative to the original row scale.
inline constexpr double singular_threshold = 1e-13;

/// Dense LU with partial pivoting.
inline std::vector<double> lu_solve(const DenseMatrix& a_in, const std::vector<double>& b_in,
                                    const std::vector<RowOrigin>* origins = nullptr)
{
    const std::size_t n = a_in.rows();
    if (a_in.cols() != n || b_in.size() != n) {
        throw SingularSystemError("system is not square");
    }
    DenseMatrix a = a_in;
    std::vector<double> b = b_in;
    std::vector<std::size_t> perm(n);
    std::vector<double> scale(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        perm[i] = i;
        for (double x : a.row(i)) {
            scale[i] = std::max(scale[i], std::abs(x));
        }
        if (scale[i] == 0.0) {
            throw SingularSystemError("row " + std::to_string(i) + " is zero" +
                                      (origins ? " (" + (*origins)[i].text + ")" : std::string()));
        }
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t i = c + 1; i < n; ++i) {
            if (std::abs(a(i, c)) > std::abs(a(p, c))) {
                p = i;
            }
        }
        if (std::abs(a(p, c)) < singular_threshold * scale[perm[p]]) {
            throw SingularSystemError("pivot below threshold in column " + std::to_string(c) +
                                      (origins ? " (" + (*origins)[perm[p]].text + ")" : std::string()));
        }
        if (p != c) {
            std::swap_ranges(a.row(p).begin(), a.row(p).end(), a.row(c).begin());
            std::swap(b[p], b[c]);
            std::swap(perm[p], perm[c]);
        }
        const double piv = a(c, c);
        const auto prow = a.row(c);
        for (std::size_t i = c + 1; i < n; ++i) {
            const double f = a(i, c) / piv;
            if (f == 0.0) {
                continue;
            }
            auto r = a.row(i);
            r[c] = 0.0;
            for (std::size_t j = c + 1; j < n; ++j) {
                r[j] -= f * prow[j];
            }
            b[i] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        const auto r = a.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            s -= r[j] * x[j];
        }
        x[i] = s / r[i];
    }
    return x;
}

struct Trajectory {
    UniformGrid grid{0.0, 1.0, 2};
    FracOrder alpha{Rational(1, 2)};
    FracOrder beta{Rational(1, 2)};
    std::map<Atom, std::vector<double>> series;
    std::vector<double> node_residual;
    double residual = 0.0;

    const std::vector<double>& at(const Atom& a) const
    {
        auto it = series.find(a);
        if (it == series.end()) {
            throw EvaluationError("no series for '" + render(a) + "'");
        }
        return it->second;
    }
};

/// Evaluates an expression on a trajectory; operator words are applied with
/// the Grunwald-Letnikov sums.
inline std::vector<double> evaluate(const Trajectory& t, const LinExpr& e)
{
    const std::size_t n = t.grid.nodes();
    std::vector<double> out(n, to_double(e.constant_term()));
    for (const auto& [a, c] : e.terms()) {
        std::vector<double> v;
        if (a.kind == AtomKind::Endpoint) {
            const auto& base = t.at(Atom::coordinate(a.index, a.var));
            v.assign(n, a.level == static_cast<int>(Endpoint::A) ? base.front() : base.back());
        } else {
            SampledFunction f(t.grid, t.at(a.base()));
            for (auto it = a.word.rbegin(); it != a.word.rend(); ++it) {
                f = *it == Op::L ? left_rl_apply(f, t.alpha) : right_rl_apply(f, t.beta);
            }
            v = std::move(f.values);
        }
        const double coef = to_double(c);
        for (std::size_t k = 0; k < n; ++k) {
            out[k] += coef * v[k];
        }
    }
    return out;
}

inline Trajectory solve(const DiscreteSystem& ds, const NumericModel& model)
{
    const std::vector<double> x = lu_solve(ds.matrix, ds.rhs, &ds.row_origin);
    const std::size_t n = ds.grid.nodes();

    Trajectory t;
    t.grid = ds.grid;
    t.alpha = model.spec.alpha;
    t.beta = model.spec.beta;
    for (std::size_t u = 0; u < model.unknowns.size(); ++u) {
        t.series.emplace(model.unknowns[u],
                         std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(u * n),
                                             x.begin() + static_cast<std::ptrdiff_t>((u + 1) * n)));
    }

    const std::vector<double> ax = ds.matrix * x;
    t.node_residual.assign(n, 0.0);
    for (std::size_t i = 0; i < ax.size(); ++i) {
        const double r = std::abs(ax[i] - ds.rhs[i]);
        t.residual = std::max(t.residual, r);
        auto& slot = t.node_residual[ds.row_origin[i].node];
        slot = std::max(slot, r);
    }

    for (auto it = model.recoveries.rbegin(); it != model.recoveries.rend(); ++it) {
        if (t.series.count(it->atom) == 0) {
            t.series.emplace(it->atom, evaluate(t, it->value));
        }
    }
    return t;
}

/// Convenience: reduce, assemble and solve on m intervals.
inline Trajectory solve_problem(const CanonicalSystem& sys, std::size_t m)
{
    const NumericModel model = reduce_for_numerics(sys);
    return solve(assemble(model, detail::grid_for(sys.spec, m)), model);
}

/// Max over constraints and nodes of |constraint|. Expressions with operator
/// words are checked at interior nodes only, since the GL sums are not
/// consistent at the pinned endpoints.
inline double check_constraint_preservation(const Trajectory& t, const std::vector<LinExpr>& constraints)
{
    double worst = 0.0;
    const std::size_t n = t.grid.nodes();
    for (const auto& c : constraints) {
        const auto v = evaluate(t, c);
        const bool worded = !detail::is_algebraic(c);
        const std::size_t lo = worded ? 1 : 0;
        const std::size_t hi = worded ? n - 1 : n;
        for (std::size_t k = lo; k < hi; ++k) {
            worst = std::max(worst, std::abs(v[k]));
        }
    }
    return worst;
}

inline double check_constraint_preservation(const Trajectory& t, const ConstraintReport& report)
{
    std::vector<LinExpr> exprs;
    for (const auto& c : report.constraints) {
        exprs.push_back(c.expr);
    }
    return check_constraint_preservation(t, exprs);
}

struct LimitRow {
    double alpha = 0.0;
    double max_deviation = 0.0;
};

/// Solves at each order and at order 1 (alpha and beta set together) and
/// tabulates the max deviation over the declared variables.
template <typename Derive>
std::vector<LimitRow> limit_study(const ProblemSpec& spec, std::size_t m, const std::vector<Rational>& orders,
                                  Derive&& derive)
{
    auto run = [&](const Rational& order) {
        ProblemSpec s = spec;
        s.alpha = FracOrder(order);
        s.beta = FracOrder(order);
        return solve_problem(derive(s), m);
    };
    const Trajectory ref = run(Rational(1));
    std::vector<LimitRow> rows;
    for (const auto& order : orders) {
        const Trajectory t = run(order);
        double worst = 0.0;
        for (int r = 1; r <= spec.variable_count(); ++r) {
            const Atom x = spec.coordinate(r);
            const auto& a = t.at(x);
            const auto& b = ref.at(x);
            for (std::size_t k = 0; k < a.size(); ++k) {
                worst = std::max(worst, std::abs(a[k] - b[k]));
            }
        }
        rows.push_back({to_double(order), worst});
    }
    return rows;
}

} // namespace fracmech
