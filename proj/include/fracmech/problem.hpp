#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fracmech/exact_linalg.hpp"
#include "fracmech/expr.hpp"
#include "fracmech/fracnum.hpp"

namespace fracmech {

enum class ConstraintKind { Dynamical, Boundary };

struct ConstraintDecl {
    std::string multiplier;
    LinExpr expr; // Phi = 0; boundary constraints are written over Endpoint atoms
    ConstraintKind kind = ConstraintKind::Dynamical;

    bool operator==(const ConstraintDecl&) const = default;
};

struct BoundaryDatum {
    std::string var; // variable, multiplier, or momentum name such as "p0_1"
    Endpoint at = Endpoint::A;
    Rational value;

    bool operator==(const BoundaryDatum&) const = default;
};

struct ProblemSpec {
    std::string name;
    std::vector<std::string> variables;
    FracOrder alpha{Rational(1, 2)};
    FracOrder beta{Rational(1, 2)};
    Rational a = 0;
    Rational b = 1;
    int max_left_order = 1;
    int max_right_order = 0;
    QuadForm lagrangian;
    std::vector<ConstraintDecl> constraints;
    std::vector<BoundaryDatum> boundary;
    // Operator used for momentum evolution rows in the numeric solver.
    Op momentum_operator = Op::R;

    bool operator==(const ProblemSpec&) const = default;

    int variable_index(const std::string& var) const
    {
        auto it = std::find(variables.begin(), variables.end(), var);
        return it == variables.end() ? 0 : static_cast<int>(it - variables.begin()) + 1;
    }

    const std::string& variable(int index) const { return variables.at(static_cast<std::size_t>(index - 1)); }

    Atom coordinate(int index, Word word = {}) const
    {
        return Atom::coordinate(index, variable(index), std::move(word));
    }
    Atom momentum(int index, int level = 0) const
    {
        return Atom::momentum(index, variable(index), level);
    }
    Atom momentum_right(int index, int level = 0) const
    {
        return Atom::momentum_right(index, variable(index), level);
    }

    int variable_count() const { return static_cast<int>(variables.size()); }

    std::vector<Atom> multipliers(ConstraintKind kind) const
    {
        std::vector<Atom> out;
        for (const auto& c : constraints) {
            if (c.kind == kind) {
                out.push_back(Atom::multiplier(c.multiplier));
            }
        }
        return out;
    }

    bool is_inert_multiplier(const Atom& a) const
    {
        if (!a.is_multiplier()) {
            return false;
        }
        return std::any_of(constraints.begin(), constraints.end(), [&](const ConstraintDecl& c) {
            return c.kind == ConstraintKind::Boundary && c.multiplier == a.var;
        });
    }
};

namespace detail {

inline void check_coordinate_atom(const ProblemSpec& spec, const Atom& a, const std::string& where)
{
    if (a.kind != AtomKind::Coordinate) {
        throw SpecError(where + ": only coordinate atoms are allowed, found '" + render(a) + "'");
    }
    if (a.index < 1 || a.index > spec.variable_count() || spec.variable(a.index) != a.var) {
        throw SpecError(where + ": undeclared variable '" + a.var + "'");
    }
    const int n = static_cast<int>(a.word.size());
    if (is_pure(a.word, Op::L)) {
        if (n > spec.max_left_order) {
            throw SpecError(where + ": '" + render(a) + "' exceeds left sequential order " +
                            std::to_string(spec.max_left_order));
        }
    } else if (is_pure(a.word, Op::R)) {
        if (n > spec.max_right_order) {
            throw SpecError(where + ": '" + render(a) + "' exceeds right sequential order " +
                            std::to_string(spec.max_right_order));
        }
    } else {
        throw SpecError(where + ": mixed operator word in '" + render(a) + "'");
    }
}

} // namespace detail

/// Checks the structural invariants of a problem; throws SpecError naming the
/// offending field.
inline void validate(const ProblemSpec& spec)
{
    if (spec.variables.empty()) {
        throw SpecError("variables: at least one variable is required");
    }
    std::set<std::string> names;
    for (const auto& v : spec.variables) {
        if (v.empty() || !names.insert(v).second) {
            throw SpecError("variables: duplicate or empty name '" + v + "'");
        }
    }
    if (!(spec.b > spec.a)) {
        throw SpecError("interval: requires a < b");
    }
    if (spec.max_left_order < 0 || spec.max_right_order < 0) {
        throw SpecError("sequential orders must be non-negative");
    }
    for (const auto& a : spec.lagrangian.atoms()) {
        detail::check_coordinate_atom(spec, a, "lagrangian");
    }
    std::set<std::string> multipliers;
    for (std::size_t i = 0; i < spec.constraints.size(); ++i) {
        const auto& c = spec.constraints[i];
        const std::string where = "constraints[" + std::to_string(i) + "]";
        if (c.multiplier.empty()) {
            throw SpecError(where + ".multiplier: empty name");
        }
        if (names.count(c.multiplier) != 0) {
            throw SpecError(where + ".multiplier: '" + c.multiplier + "' clashes with a variable");
        }
        if (!multipliers.insert(c.multiplier).second) {
            throw SpecError(where + ".multiplier: duplicate multiplier '" + c.multiplier + "'");
        }
        if (c.expr.is_constant()) {
            throw SpecError(where + ": constraint has no variable dependence");
        }
        if (c.kind == ConstraintKind::Dynamical) {
            for (const auto& [a, coef] : c.expr.terms()) {
                detail::check_coordinate_atom(spec, a, where);
            }
        } else {
            std::optional<Atom> point;
            for (const auto& [a, coef] : c.expr.terms()) {
                if (a.kind != AtomKind::Endpoint || spec.variable_index(a.var) != a.index) {
                    throw SpecError(where + ": boundary constraint must reference endpoint values");
                }
                if (point && *point != a) {
                    throw SpecError(where + ": boundary constraint must reference exactly one endpoint value");
                }
                point = a;
            }
        }
    }
    for (std::size_t i = 0; i < spec.boundary.size(); ++i) {
        const auto& d = spec.boundary[i];
        if (d.var.empty()) {
            throw SpecError("boundary[" + std::to_string(i) + "].var: empty name");
        }
    }
}

/// L + sum_m lambda_m * Phi_m, one fresh multiplier atom per constraint.
inline QuadForm build_modified_lagrangian(const ProblemSpec& spec)
{
    std::set<std::string> seen;
    QuadForm lbar = spec.lagrangian;
    for (const auto& c : spec.constraints) {
        if (!seen.insert(c.multiplier).second) {
            throw SpecError("duplicate multiplier '" + c.multiplier + "'");
        }
        lbar += multiply(LinExpr(Atom::multiplier(c.multiplier)), c.expr);
    }
    return lbar;
}

/// Highest-order fractional velocities: DL^N x_r for every r, then DR^N' x_r.
inline std::vector<Atom> velocity_basis(const ProblemSpec& spec)
{
    std::vector<Atom> basis;
    if (spec.max_left_order > 0) {
        for (int r = 1; r <= spec.variable_count(); ++r) {
            basis.push_back(spec.coordinate(r, repeat(Op::L, spec.max_left_order)));
        }
    }
    if (spec.max_right_order > 0) {
        for (int r = 1; r <= spec.variable_count(); ++r) {
            basis.push_back(spec.coordinate(r, repeat(Op::R, spec.max_right_order)));
        }
    }
    return basis;
}

struct FracHessian {
    std::vector<Atom> basis;
    RationalMatrix matrix;
};

inline FracHessian fractional_hessian(const QuadForm& lbar, const ProblemSpec& spec)
{
    FracHessian h;
    h.basis = velocity_basis(spec);
    const std::size_t n = h.basis.size();
    h.matrix.assign(n, RationalVector(n, Rational(0)));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const Rational c = lbar.coefficient(h.basis[i], h.basis[j]);
            h.matrix[i][j] = i == j ? 2 * c : c;
        }
    }
    return h;
}

struct HessianRank {
    std::size_t rank = 0;
    std::vector<RationalVector> null_space;
};

inline HessianRank hessian_rank(const FracHessian& h)
{
    return {bareiss_rank(h.matrix), nullspace(h.matrix, h.basis.size())};
}

} // namespace fracmech
