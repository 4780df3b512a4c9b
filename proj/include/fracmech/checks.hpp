#pragma once

// Self-checks run by `fracmech check`: operator convergence, bracket algebra
// and constraint preservation for one problem.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "fracmech/canonical.hpp"
#include "fracmech/constraints.hpp"
#include "fracmech/fracsolve.hpp"
#include "fracmech/report.hpp"

namespace fracmech {

namespace detail {

// Max interior error of the left GL derivative of t^2 on [0,1] against
// 2/Gamma(3-a) t^(2-a).
inline double gl_square_error(const FracOrder& alpha, std::size_t m)
{
    const UniformGrid g(0.0, 1.0, m);
    const double a = alpha.to_double();
    const auto d = left_rl_apply(SampledFunction::sample(g, [](double t) { return t * t; }), alpha);
    double worst = 0.0;
    for (std::size_t k = 1; k < m; ++k) {
        const double t = g.node(k);
        worst = std::max(worst, std::abs(d.values[k] - 2.0 / std::tgamma(3.0 - a) * std::pow(t, 2.0 - a)));
    }
    return worst;
}

inline std::vector<Atom> phase_atoms(const ProblemSpec& spec)
{
    std::vector<Atom> out;
    for (int r = 1; r <= spec.variable_count(); ++r) {
        for (int n = 0; n < spec.max_left_order; ++n) {
            out.push_back(spec.coordinate(r, repeat(Op::L, n)));
            out.push_back(spec.momentum(r, n));
        }
        for (int n = 1; n < spec.max_right_order; ++n) {
            out.push_back(spec.coordinate(r, repeat(Op::R, n)));
            out.push_back(spec.momentum_right(r, n));
        }
    }
    return out;
}

inline LinExpr random_linear(std::mt19937& rng, const std::vector<Atom>& atoms)
{
    std::uniform_int_distribution<int> num(-5, 5);
    std::uniform_int_distribution<int> den(1, 4);
    LinExpr e = LinExpr::constant(Rational(num(rng), den(rng)));
    for (const auto& a : atoms) {
        e.add(a, Rational(num(rng), den(rng)));
    }
    return e;
}

} // namespace detail

inline std::vector<CheckResult> run_checks(const CanonicalSystem& sys, std::size_t m)
{
    std::vector<CheckResult> out;
    const ProblemSpec& spec = sys.spec;

    if (spec.alpha.numeric_admissible()) {
        const double e1 = detail::gl_square_error(spec.alpha, 256);
        const double e2 = detail::gl_square_error(spec.alpha, 512);
        const double ratio = e1 / e2;
        out.push_back({"operator convergence ratio (t^2, m=256 to 512)", ratio, 0.4,
                       ratio >= 1.6 && ratio <= 2.4, "errors " + format_double(e1) + ", " + format_double(e2)});
    }

    // Bracket algebra on random linear phase functions.
    const auto atoms = detail::phase_atoms(spec);
    std::mt19937 rng(20240611u);
    int failures = 0;
    const int trials = 200;
    for (int i = 0; i < trials; ++i) {
        const QuadForm a(detail::random_linear(rng, atoms));
        const QuadForm b(detail::random_linear(rng, atoms));
        const QuadForm c(detail::random_linear(rng, atoms));
        const bool anti = poisson_bracket(a, b) == -poisson_bracket(b, a);
        const QuadForm jac = poisson_bracket(a, poisson_bracket(b, c)) + poisson_bracket(b, poisson_bracket(c, a)) +
                             poisson_bracket(c, poisson_bracket(a, b));
        if (!anti || !jac.is_zero()) {
            ++failures;
        }
    }
    for (std::size_t i = 0; i + 1 < atoms.size(); i += 2) {
        if (poisson_bracket(QuadForm(atoms[i]), QuadForm(atoms[i + 1])) != QuadForm(LinExpr::constant(1))) {
            ++failures;
        }
    }
    out.push_back({"bracket antisymmetry, Jacobi and canonical pairs", static_cast<double>(failures), 0.0,
                   failures == 0, std::to_string(trials) + " random triples"});

    int mismatched = 0;
    for (std::size_t i = 0; i + 1 < atoms.size(); i += 2) {
        if (poisson_bracket(QuadForm(atoms[i]), sys.hamiltonian) != QuadForm(partial(sys.hamiltonian, atoms[i + 1]))) {
            ++mismatched;
        }
    }
    out.push_back({"bracket with H matches dH/dp", static_cast<double>(mismatched), 0.0, mismatched == 0, ""});

    const ConstraintReport report = run_constraint_algorithm(sys);
    out.push_back({"constraint algorithm closes", report.closed ? 1.0 : 0.0, 0.0, report.closed,
                   std::to_string(report.passes) + " passes"});

    if (spec.alpha.numeric_admissible() && spec.beta.numeric_admissible()) {
        const NumericModel model = reduce_for_numerics(sys);
        const Trajectory t = solve(assemble(model, detail::grid_for(spec, m)), model);
        out.push_back({"solve residual", t.residual, 1e-9, t.residual <= 1e-9, "m=" + std::to_string(m)});
        std::vector<LinExpr> primary;
        for (const auto& c : report.primary()) {
            primary.push_back(c.expr);
        }
        const double v = check_constraint_preservation(t, primary);
        out.push_back({"primary constraint preservation", v, 1e-10, v <= 1e-10, ""});
    }
    return out;
}

} // namespace fracmech
