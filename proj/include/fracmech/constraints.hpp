#pragma once

// Consistency algorithm: constraints are evolved with the canonical
// Hamiltonian until every evolution lies in the span of the known constraints.

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fracmech/canonical.hpp"
#include "fracmech/exact_linalg.hpp"

namespace fracmech {

struct Constraint {
    LinExpr expr;
    int generation = 0;
    std::string origin;
};

enum class Outcome { Preserved, DeterminesMultiplier, NewConstraint, Deferred };

inline const char* to_string(Outcome o)
{
    switch (o) {
    case Outcome::Preserved:
        return "preserved";
    case Outcome::DeterminesMultiplier:
        return "determines-multiplier";
    case Outcome::NewConstraint:
        return "new-constraint";
    case Outcome::Deferred:
        return "deferred";
    }
    return "?";
}

struct Determination {
    Atom multiplier;
    LinExpr value;
    std::string origin;
};

struct StepRecord {
    int pass = 0;
    LinExpr constraint;
    LinExpr evolution;
    Outcome outcome = Outcome::Preserved;
    std::string note;
};

struct ConstraintReport {
    std::vector<Constraint> constraints;
    std::vector<Determination> determinations;
    std::vector<StepRecord> steps;
    int passes = 0;
    bool closed = false;

    std::vector<Constraint> primary() const { return of_generation(0, 0); }
    std::vector<Constraint> secondary() const { return of_generation(1, std::numeric_limits<int>::max()); }

    std::optional<LinExpr> value_of(const Atom& m) const
    {
        for (const auto& d : determinations) {
            if (d.multiplier == m) {
                return d.value;
            }
        }
        return std::nullopt;
    }

    bool is_determined(const Atom& m) const { return value_of(m).has_value(); }

private:
    std::vector<Constraint> of_generation(int lo, int hi) const
    {
        std::vector<Constraint> out;
        for (const auto& c : constraints) {
            if (c.generation >= lo && c.generation <= hi) {
                out.push_back(c);
            }
        }
        return out;
    }
};

namespace detail {

// Replaces W v, with v a top-level velocity, by W applied to its phase value.
inline std::optional<LinExpr> expand_velocity(const CanonicalSystem& sys, const Atom& a)
{
    if (a.kind != AtomKind::Coordinate || a.word.empty()) {
        return std::nullopt;
    }
    const int nl = sys.spec.max_left_order;
    const int nr = sys.spec.max_right_order;
    for (std::size_t split = 0; split < a.word.size(); ++split) {
        const Word inner(a.word.begin() + static_cast<std::ptrdiff_t>(split), a.word.end());
        const int n = static_cast<int>(inner.size());
        const bool velocity = (nl > 0 && n == nl && is_pure(inner, Op::L)) ||
                              (nr > 0 && n == nr && is_pure(inner, Op::R));
        if (!velocity) {
            continue;
        }
        const Word outer(a.word.begin(), a.word.begin() + static_cast<std::ptrdiff_t>(split));
        const LinExpr value = sys.velocity_value(Atom::coordinate(a.index, a.var, inner));
        try {
            return apply_word(value, outer);
        } catch (const NonzeroConstantError& e) {
            throw DerivationError("expanding '" + render(a) + "': " + e.what());
        }
    }
    return std::nullopt;
}

} // namespace detail

/// Rewrites an expression on the phase space: velocities become their
/// solutions or aliases and determined multipliers become their values.
inline LinExpr phase_reduce(const CanonicalSystem& sys, const std::vector<Determination>& dets,
                            const LinExpr& e)
{
    Bindings values;
    for (const auto& d : dets) {
        values.emplace(d.multiplier, d.value);
    }
    LinExpr cur = e;
    for (int guard = 0; guard < 256; ++guard) {
        LinExpr next = LinExpr::constant(cur.constant_term());
        bool changed = false;
        for (const auto& [a, c] : cur.terms()) {
            if (auto v = detail::expand_velocity(sys, a)) {
                next += *v * c;
                changed = true;
            } else if (auto it = values.find(a.base()); it != values.end()) {
                try {
                    next += apply_word(it->second, a.word) * c;
                } catch (const NonzeroConstantError& err) {
                    throw DerivationError("substituting '" + render(a) + "': " + err.what());
                }
                changed = true;
            } else {
                next.add(a, c);
            }
        }
        if (!changed) {
            return cur;
        }
        cur = std::move(next);
    }
    throw DerivationError("phase reduction did not terminate for '" + render(e) + "'");
}

/// Time evolution {atom, H} of a single atom. Operator words are applied to
/// the bracket of the innermost phase-space variable.
inline LinExpr evolve_atom(const CanonicalSystem& sys, const Atom& a)
{
    const ProblemSpec& spec = sys.spec;
    const QuadForm& h = sys.hamiltonian;
    const int nl = spec.max_left_order;
    const int nr = spec.max_right_order;

    auto with_word = [&](const LinExpr& bracket, const Word& outer) {
        try {
            return apply_word(bracket, outer);
        } catch (const NonzeroConstantError& e) {
            throw DerivationError("evolving '" + render(a) + "': " + e.what());
        }
    };

    switch (a.kind) {
    case AtomKind::Endpoint:
        return LinExpr();
    case AtomKind::Multiplier:
        throw InertVariableError("multiplier '" + render(a.base()) + "' has no evolution");
    case AtomKind::Momentum:
        return with_word(-partial(h, spec.coordinate(a.index, repeat(Op::L, a.level))), a.word);
    case AtomKind::MomentumRight:
        if (a.level == 0) {
            throw InertVariableError("'" + render(a.base()) + "' has no conjugate coordinate");
        }
        return with_word(-partial(h, spec.coordinate(a.index, repeat(Op::R, a.level))), a.word);
    case AtomKind::Coordinate:
        break;
    }
    for (std::size_t split = 0; split <= a.word.size(); ++split) {
        const Word inner(a.word.begin() + static_cast<std::ptrdiff_t>(split), a.word.end());
        const Word outer(a.word.begin(), a.word.begin() + static_cast<std::ptrdiff_t>(split));
        const int n = static_cast<int>(inner.size());
        if (nl > 0 && n < nl && is_pure(inner, Op::L)) {
            return with_word(partial(h, spec.momentum(a.index, n)), outer);
        }
        if (n >= 1 && n < nr && is_pure(inner, Op::R)) {
            return with_word(partial(h, spec.momentum_right(a.index, n)), outer);
        }
    }
    throw InertVariableError("'" + render(a) + "' is not a phase-space variable");
}

inline LinExpr evolve(const CanonicalSystem& sys, const LinExpr& e)
{
    LinExpr out;
    for (const auto& [a, c] : e.terms()) {
        out += evolve_atom(sys, a) * c;
    }
    return out;
}

namespace detail {

inline std::optional<Atom> determinable_atom(const CanonicalSystem& sys, const std::vector<Determination>& dets,
                                             const LinExpr& e)
{
    for (const auto& [a, c] : e.terms()) {
        if (!sys.is_determinable(a)) {
            continue;
        }
        const bool known = std::any_of(dets.begin(), dets.end(),
                                       [&](const Determination& d) { return d.multiplier == a; });
        if (!known) {
            return a;
        }
    }
    return std::nullopt;
}

inline LinExpr solve_for(const LinExpr& e, const Atom& m)
{
    const Rational c = e.coefficient(m);
    LinExpr rest = e;
    rest.add(m, -c);
    return rest * Rational(-1 / c);
}

inline void sort_canonical(std::vector<Constraint>& cs)
{
    std::stable_sort(cs.begin(), cs.end(), [](const Constraint& x, const Constraint& y) {
        if (x.generation != y.generation) {
            return x.generation < y.generation;
        }
        return canonical_less(x.expr, y.expr);
    });
}

} // namespace detail

/// One consistency check of constraint `c` against the current state.
/// Updates `report` and returns the outcome.
inline Outcome consistency_step(const CanonicalSystem& sys, ConstraintReport& report, const Constraint& c,
                                int pass)
{
    StepRecord rec;
    rec.pass = pass;
    rec.constraint = c.expr;

    LinExpr evolution;
    try {
        evolution = phase_reduce(sys, report.determinations,
                                 evolve(sys, phase_reduce(sys, report.determinations, c.expr)));
    } catch (const InertVariableError& e) {
        rec.outcome = Outcome::Deferred;
        rec.note = e.what();
        report.steps.push_back(rec);
        return Outcome::Deferred;
    }
    rec.evolution = evolution;

    std::vector<LinExpr> reduced;
    for (const auto& k : report.constraints) {
        reduced.push_back(phase_reduce(sys, report.determinations, k.expr));
    }
    if (in_span(reduced, evolution)) {
        rec.outcome = Outcome::Preserved;
        report.steps.push_back(rec);
        return Outcome::Preserved;
    }

    if (auto m = detail::determinable_atom(sys, report.determinations, evolution)) {
        const LinExpr value = detail::solve_for(evolution, *m);
        report.determinations.push_back({*m, value, "evolution of " + render(c.expr)});
        rec.outcome = Outcome::DeterminesMultiplier;
        rec.note = render(*m) + " = " + render(value);
        if (const auto* alias = sys.alias_for_multiplier(*m)) {
            report.constraints.push_back({LinExpr(alias->velocity) - value, c.generation + 1,
                                          "velocity condition from " + render(*m)});
        }
        report.steps.push_back(rec);
        return Outcome::DeterminesMultiplier;
    }

    report.constraints.push_back({evolution, c.generation + 1, "evolution of " + render(c.expr)});
    rec.outcome = Outcome::NewConstraint;
    report.steps.push_back(rec);
    return Outcome::NewConstraint;
}

/// Primary constraints, then passes of consistency checks until a pass
/// preserves everything (closed) or makes no progress (not closed).
inline ConstraintReport run_constraint_algorithm(const CanonicalSystem& sys, int max_passes = 64)
{
    ConstraintReport report;
    for (const auto& row : sys.primary_rows) {
        report.constraints.push_back({row.expr, 0, row.origin});
    }

    // Stationarity in the dynamical multipliers.
    for (const auto& m : sys.dynamical_multipliers()) {
        const LinExpr row = phase_reduce(sys, report.determinations, partial(sys.hamiltonian, m));
        if (row.is_zero()) {
            continue;
        }
        if (auto target = detail::determinable_atom(sys, report.determinations, row)) {
            report.determinations.push_back(
                {*target, detail::solve_for(row, *target), "stationarity in " + render(m)});
        } else {
            report.constraints.push_back({row, 0, "stationarity in " + render(m)});
        }
    }

    for (int pass = 1; pass <= max_passes; ++pass) {
        detail::sort_canonical(report.constraints);
        report.passes = pass;
        const std::vector<Constraint> snapshot = report.constraints;
        bool all_preserved = true;
        bool progress = false;
        for (const auto& c : snapshot) {
            const Outcome o = consistency_step(sys, report, c, pass);
            all_preserved = all_preserved && o == Outcome::Preserved;
            progress = progress || o == Outcome::DeterminesMultiplier || o == Outcome::NewConstraint;
        }
        if (all_preserved) {
            report.closed = true;
            detail::sort_canonical(report.constraints);
            return report;
        }
        if (!progress) {
            report.closed = false;
            detail::sort_canonical(report.constraints);
            return report;
        }
    }
    throw DerivationError("constraint algorithm did not settle within " + std::to_string(max_passes) +
                          " passes");
}

} // namespace fracmech
