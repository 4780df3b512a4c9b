#pragma once

// Fractional canonical momenta, the degenerate Legendre transform, Hamilton's
// equations and the Poisson bracket.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "fracmech/exact_linalg.hpp"
#include "fracmech/expr.hpp"
#include "fracmech/problem.hpp"

namespace fracmech {

struct MomentumDef {
    Atom momentum;
    LinExpr definition;
};

struct Equation {
    LinExpr lhs;
    LinExpr rhs;
    std::string origin;

    LinExpr residual() const { return lhs - rhs; }
};

inline std::string render(const Equation& e)
{
    return render(e.lhs) + " = " + render(e.rhs);
}

// A velocity that cannot be solved from the momenta, renamed to a multiplier.
struct VelocityAlias {
    Atom multiplier;
    Atom velocity;
};

// A velocity-free combination of momentum relations.
struct PrimaryRow {
    LinExpr expr;
    std::string origin;
};

struct CanonicalSystem {
    ProblemSpec spec;
    QuadForm lbar;
    std::vector<MomentumDef> momenta;
    QuadForm hamiltonian;
    std::map<Atom, LinExpr> velocity_solutions;
    std::vector<VelocityAlias> undetermined;
    std::vector<PrimaryRow> primary_rows;
    std::vector<Equation> equations;

    const VelocityAlias* alias_for_multiplier(const Atom& m) const
    {
        for (const auto& a : undetermined) {
            if (a.multiplier == m) {
                return &a;
            }
        }
        return nullptr;
    }

    // Phase-space value of a top-level velocity: its solution or its alias.
    LinExpr velocity_value(const Atom& v) const
    {
        if (auto it = velocity_solutions.find(v); it != velocity_solutions.end()) {
            return it->second;
        }
        for (const auto& a : undetermined) {
            if (a.velocity == v) {
                return LinExpr(a.multiplier);
            }
        }
        throw DerivationError("'" + render(v) + "' is not a velocity of this system");
    }

    std::vector<Atom> dynamical_multipliers() const { return spec.multipliers(ConstraintKind::Dynamical); }

    // Multipliers that consistency conditions may determine.
    bool is_determinable(const Atom& m) const
    {
        if (!m.is_multiplier() || !m.plain()) {
            return false;
        }
        if (alias_for_multiplier(m) != nullptr) {
            return true;
        }
        for (const auto& d : dynamical_multipliers()) {
            if (d == m) {
                return true;
            }
        }
        return false;
    }
};

/// p_n = sum_{k=n+1..N} DR^{k-n-1} dLbar/dq_k and
/// pi_n = sum_{k=n+1..N'} DL^{k-n-1} dLbar/dQ_k, for every variable.
inline std::vector<MomentumDef> canonical_momenta(const QuadForm& lbar, const ProblemSpec& spec)
{
    std::vector<MomentumDef> out;
    try {
        for (int r = 1; r <= spec.variable_count(); ++r) {
            for (int n = 0; n < spec.max_left_order; ++n) {
                LinExpr p;
                for (int k = n + 1; k <= spec.max_left_order; ++k) {
                    p += apply_word(partial(lbar, spec.coordinate(r, repeat(Op::L, k))),
                                    repeat(Op::R, k - n - 1));
                }
                out.push_back({spec.momentum(r, n), p});
            }
            for (int n = 0; n < spec.max_right_order; ++n) {
                LinExpr pi;
                for (int k = n + 1; k <= spec.max_right_order; ++k) {
                    pi += apply_word(partial(lbar, spec.coordinate(r, repeat(Op::R, k))),
                                     repeat(Op::L, k - n - 1));
                }
                out.push_back({spec.momentum_right(r, n), pi});
            }
        }
    } catch (const NonzeroConstantError& e) {
        throw DerivationError(std::string("momentum derivation: ") + e.what());
    }
    return out;
}

namespace detail {

inline std::string alias_name(const ProblemSpec& spec, const Atom& velocity, std::size_t free_count,
                              const std::set<std::string>& taken)
{
    const bool right = !velocity.word.empty() && velocity.word.front() == Op::R;
    std::vector<std::string> candidates;
    if (free_count == 1) {
        candidates.push_back(right ? "mu" : "lam");
    }
    const std::string stem = (right ? "mu_" : "lam_") + std::to_string(velocity.index);
    candidates.push_back(stem);
    for (const auto& c : candidates) {
        if (taken.count(c) == 0 && spec.variable_index(c) == 0) {
            return c;
        }
    }
    std::string name = stem;
    while (taken.count(name) != 0 || spec.variable_index(name) != 0) {
        name += "v";
    }
    return name;
}

} // namespace detail

/// Degenerate Legendre transform. Velocities are solved from the top-level
/// momentum relations by exact elimination in basis order; non-pivot velocities
/// become multiplier atoms and velocity-free rows are kept as primary rows.
inline CanonicalSystem legendre(const QuadForm& lbar, const std::vector<MomentumDef>& momenta,
                                const ProblemSpec& spec)
{
    CanonicalSystem sys;
    sys.spec = spec;
    sys.lbar = lbar;
    sys.momenta = momenta;

    const auto velocities = velocity_basis(spec);
    const std::size_t k = velocities.size();
    const std::set<Atom> velocity_set(velocities.begin(), velocities.end());

    // Row i: sum_j H_ij v_j = P_i - g_i, where dLbar/dv_i = H v + g.
    RationalMatrix h(k, RationalVector(k, Rational(0)));
    std::vector<LinExpr> rhs(k);
    std::vector<Atom> row_momentum;
    for (std::size_t i = 0; i < k; ++i) {
        const Atom& v = velocities[i];
        const bool right = v.word.front() == Op::R;
        const Atom p = right ? spec.momentum_right(v.index, spec.max_right_order - 1)
                             : spec.momentum(v.index, spec.max_left_order - 1);
        row_momentum.push_back(p);
        LinExpr d = partial(lbar, v);
        for (std::size_t j = 0; j < k; ++j) {
            h[i][j] = d.coefficient(velocities[j]);
            d.add(velocities[j], -h[i][j]);
        }
        rhs[i] = LinExpr(p) - d;
    }

    // Gauss-Jordan on [H | rhs].
    std::vector<std::size_t> pivot_cols;
    std::size_t r = 0;
    for (std::size_t c = 0; c < k && r < k; ++c) {
        std::size_t p = r;
        while (p < k && h[p][c] == 0) {
            ++p;
        }
        if (p == k) {
            continue;
        }
        std::swap(h[r], h[p]);
        std::swap(rhs[r], rhs[p]);
        std::swap(row_momentum[r], row_momentum[p]);
        const Rational inv = 1 / h[r][c];
        for (auto& x : h[r]) {
            x *= inv;
        }
        rhs[r] *= inv;
        for (std::size_t i = 0; i < k; ++i) {
            if (i == r || h[i][c] == 0) {
                continue;
            }
            const Rational f = h[i][c];
            for (std::size_t j = 0; j < k; ++j) {
                h[i][j] -= f * h[r][j];
            }
            rhs[i] -= rhs[r] * f;
        }
        pivot_cols.push_back(c);
        ++r;
    }

    std::vector<bool> is_pivot(k, false);
    for (auto c : pivot_cols) {
        is_pivot[c] = true;
    }
    std::set<std::string> taken;
    for (const auto& c : spec.constraints) {
        taken.insert(c.multiplier);
    }
    const std::size_t free_count = k - pivot_cols.size();
    std::map<std::size_t, Atom> alias_of;
    for (std::size_t c = 0; c < k; ++c) {
        if (is_pivot[c]) {
            continue;
        }
        const std::string name = detail::alias_name(spec, velocities[c], free_count, taken);
        taken.insert(name);
        const Atom m = Atom::multiplier(name);
        alias_of.emplace(c, m);
        sys.undetermined.push_back({m, velocities[c]});
    }

    for (std::size_t row = 0; row < pivot_cols.size(); ++row) {
        LinExpr value = rhs[row];
        for (const auto& [c, m] : alias_of) {
            value -= LinExpr(m) * h[row][c];
        }
        sys.velocity_solutions.emplace(velocities[pivot_cols[row]], value);
    }
    for (std::size_t row = pivot_cols.size(); row < k; ++row) {
        if (!rhs[row].is_zero()) {
            sys.primary_rows.push_back({rhs[row], "momentum relation of " + render(row_momentum[row])});
        }
    }

    // H = sum p_n q_{n+1} + sum pi_n Q_{n+1} - Lbar, velocities eliminated.
    QuadForm hamiltonian = -lbar;
    for (int var = 1; var <= spec.variable_count(); ++var) {
        for (int n = 0; n < spec.max_left_order; ++n) {
            hamiltonian += multiply(LinExpr(spec.momentum(var, n)),
                                    LinExpr(spec.coordinate(var, repeat(Op::L, n + 1))));
        }
        for (int n = 0; n < spec.max_right_order; ++n) {
            hamiltonian += multiply(LinExpr(spec.momentum_right(var, n)),
                                    LinExpr(spec.coordinate(var, repeat(Op::R, n + 1))));
        }
    }
    Bindings eliminate;
    for (const auto& v : velocities) {
        eliminate.emplace(v, sys.velocity_value(v));
    }
    sys.hamiltonian = substitute(hamiltonian, eliminate);
    for (const auto& a : sys.hamiltonian.atoms()) {
        if (velocity_set.count(a) != 0) {
            throw DerivationError("velocity '" + render(a) + "' survived the Legendre transform");
        }
    }
    return sys;
}

/// {A,B} over the pairs (q_n, p_n), n >= 0, and (Q_n, pi_n), n >= 1.
inline QuadForm poisson_bracket(const QuadForm& a, const QuadForm& b)
{
    std::set<AtomPair> pairs;
    auto collect = [&](const QuadForm& f) {
        for (const auto& at : f.atoms()) {
            if (at.kind == AtomKind::Coordinate) {
                const int n = static_cast<int>(at.word.size());
                if (is_pure(at.word, Op::L)) {
                    pairs.insert({at, Atom::momentum(at.index, at.var, n)});
                }
                if (n >= 1 && is_pure(at.word, Op::R)) {
                    pairs.insert({at, Atom::momentum_right(at.index, at.var, n)});
                }
            } else if (at.kind == AtomKind::Momentum && at.plain()) {
                pairs.insert({Atom::coordinate(at.index, at.var, repeat(Op::L, at.level)), at});
            } else if (at.kind == AtomKind::MomentumRight && at.plain() && at.level >= 1) {
                pairs.insert({Atom::coordinate(at.index, at.var, repeat(Op::R, at.level)), at});
            }
        }
    };
    collect(a);
    collect(b);

    QuadForm out;
    for (const auto& [q, p] : pairs) {
        out += multiply(partial(a, q), partial(b, p));
        out -= multiply(partial(b, q), partial(a, p));
    }
    return out;
}

/// Hamilton's equations with the operator sides written as in the
/// fractional formalism: DL on coordinates, DR on left-family momenta, DL on
/// right-family momenta, plus dH/dm = 0 for every non-inert multiplier.
inline std::vector<Equation> hamilton_equations(CanonicalSystem& sys)
{
    const ProblemSpec& spec = sys.spec;
    const QuadForm& h = sys.hamiltonian;
    const int nl = spec.max_left_order;
    const int nr = spec.max_right_order;
    std::vector<Equation> eqs;

    for (int r = 1; r <= spec.variable_count(); ++r) {
        for (int n = 0; n < nl; ++n) {
            const Atom p = spec.momentum(r, n);
            eqs.push_back({LinExpr(spec.coordinate(r, repeat(Op::L, n + 1))), partial(h, p),
                           "dH/d" + render(p)});
        }
        for (int n = 0; n < nr; ++n) {
            const Atom pi = spec.momentum_right(r, n);
            eqs.push_back({LinExpr(spec.coordinate(r, repeat(Op::R, n + 1))), partial(h, pi),
                           "dH/d" + render(pi)});
        }
        const Atom x = spec.coordinate(r);
        LinExpr lhs;
        if (nl > 0) {
            lhs += LinExpr(spec.momentum(r, 0).prefixed(Op::R));
        }
        if (nr > 0) {
            lhs += LinExpr(spec.momentum_right(r, 0).prefixed(Op::L));
        }
        eqs.push_back({lhs, partial(h, x), "dH/d" + render(x)});
        for (int n = 1; n < nl; ++n) {
            const Atom q = spec.coordinate(r, repeat(Op::L, n));
            eqs.push_back({LinExpr(spec.momentum(r, n).prefixed(Op::R)), partial(h, q), "dH/d" + render(q)});
        }
        for (int n = 1; n < nr; ++n) {
            const Atom q = spec.coordinate(r, repeat(Op::R, n));
            eqs.push_back({LinExpr(spec.momentum_right(r, n).prefixed(Op::L)), partial(h, q),
                           "dH/d" + render(q)});
        }
    }
    for (const auto& alias : sys.undetermined) {
        eqs.push_back({LinExpr(), partial(h, alias.multiplier), "dH/d" + render(alias.multiplier)});
    }
    for (const auto& m : sys.dynamical_multipliers()) {
        eqs.push_back({LinExpr(), partial(h, m), "dH/d" + render(m)});
    }
    sys.equations = eqs;
    return eqs;
}

/// Momenta whose definitions contain no velocity atoms (e.g. p0_1 = l).
inline Bindings velocity_free_momenta(const CanonicalSystem& sys)
{
    const auto velocities = velocity_basis(sys.spec);
    const std::set<Atom> vset(velocities.begin(), velocities.end());
    Bindings out;
    for (const auto& m : sys.momenta) {
        bool free = true;
        for (const auto& [a, c] : m.definition.terms()) {
            if (a.kind == AtomKind::Coordinate && !a.plain()) {
                free = false;
            }
        }
        if (free) {
            out.emplace(m.momentum, m.definition);
        }
    }
    (void)vset;
    return out;
}

/// Equations in Lagrangian form: velocity-free momentum definitions are
/// substituted and renamed velocities are written back as derivatives.
/// Identities are dropped.
inline std::vector<LinExpr> reduced_equations(const CanonicalSystem& sys)
{
    Bindings momenta = velocity_free_momenta(sys);
    Bindings aliases;
    for (const auto& a : sys.undetermined) {
        aliases.emplace(a.multiplier, LinExpr(a.velocity));
    }
    std::vector<LinExpr> out;
    for (const auto& eq : sys.equations) {
        LinExpr e;
        try {
            e = substitute_bases(substitute_bases(eq.residual(), momenta), aliases);
        } catch (const NonzeroConstantError& err) {
            throw DerivationError("reducing " + eq.origin + ": " + err.what());
        }
        if (e.is_zero()) {
            continue;
        }
        const bool duplicate = std::any_of(out.begin(), out.end(),
                                           [&](const LinExpr& o) { return same_equation(o, e); });
        if (!duplicate) {
            out.push_back(e);
        }
    }
    return out;
}

/// Full symbolic pipeline: validation, modified Lagrangian, momenta,
/// Legendre transform and Hamilton's equations.
inline CanonicalSystem derive_canonical(const ProblemSpec& spec)
{
    validate(spec);
    const QuadForm lbar = build_modified_lagrangian(spec);
    CanonicalSystem sys = legendre(lbar, canonical_momenta(lbar, spec), spec);
    hamilton_equations(sys);
    return sys;
}

} // namespace fracmech
