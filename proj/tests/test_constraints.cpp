#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "fracmech/constraints.hpp"
#include "fracmech/problem_io.hpp"

using namespace fracmech;

namespace {

CanonicalSystem load(const std::string& name)
{
    return derive_canonical(parse_problem(std::string(FRACMECH_PROBLEMS_DIR) + "/" + name));
}

std::vector<LinExpr> exprs(const std::vector<Constraint>& cs)
{
    std::vector<LinExpr> out;
    for (const auto& c : cs) {
        out.push_back(c.expr);
    }
    return out;
}

std::vector<std::string> rendered(const ConstraintReport& r)
{
    std::vector<std::string> out;
    for (const auto& c : r.constraints) {
        out.push_back(render(c.expr) + "@" + std::to_string(c.generation));
    }
    for (const auto& d : r.determinations) {
        out.push_back(render(d.multiplier) + "=" + render(d.value));
    }
    return out;
}

} // namespace

TEST(Constraints, ExampleTwoPreserved)
{
    const CanonicalSystem sys = load("example2.json");
    const ConstraintReport r = run_constraint_algorithm(sys);
    EXPECT_TRUE(r.closed);
    EXPECT_EQ(r.passes, 1);
    ASSERT_EQ(r.primary().size(), 1u);
    EXPECT_TRUE(r.secondary().empty());
    EXPECT_TRUE(r.determinations.empty());
    EXPECT_EQ(r.steps.front().outcome, Outcome::Preserved);
    EXPECT_TRUE(evolve(sys, r.primary()[0].expr).is_zero());
}

TEST(Constraints, ExampleThreeDeterminesMultiplier)
{
    const CanonicalSystem sys = load("example3.json");
    const ConstraintReport r = run_constraint_algorithm(sys);
    EXPECT_TRUE(r.closed);
    EXPECT_EQ(r.passes, 2);
    EXPECT_TRUE(same_span(exprs(r.primary()), {LinExpr(Atom::momentum(2, "x2")) + LinExpr(sys.spec.coordinate(3)),
                                               LinExpr(Atom::momentum(3, "x3"))}));
    // The multiplier of the p0_2 relation vanishes and DL x2 = 0 follows.
    const Atom lam2 = Atom::multiplier("lam_2");
    ASSERT_TRUE(r.is_determined(lam2));
    EXPECT_TRUE(r.value_of(lam2)->is_zero());
    const auto sec = exprs(r.secondary());
    EXPECT_TRUE(std::any_of(sec.begin(), sec.end(), [&](const LinExpr& e) {
        return same_equation(e, LinExpr(sys.spec.coordinate(2, {Op::L})));
    }));
}

TEST(Constraints, ExampleOneCloses)
{
    const CanonicalSystem sys = load("example1.json");
    const ConstraintReport r = run_constraint_algorithm(sys);
    EXPECT_TRUE(r.closed);
    const Atom l = Atom::multiplier("l");
    ASSERT_TRUE(r.is_determined(l));
    EXPECT_EQ(*r.value_of(l), LinExpr(sys.spec.coordinate(2)));
}

TEST(Constraints, EvolutionOfCoordinateIsVelocity)
{
    const CanonicalSystem sys = load("example2.json");
    // {x1, H} = p0_1 - lam
    EXPECT_EQ(evolve(sys, LinExpr(sys.spec.coordinate(1))),
              LinExpr(Atom::momentum(1, "x1")) - LinExpr(Atom::multiplier("lam")));
    EXPECT_TRUE(evolve(sys, LinExpr::constant(4)).is_zero());
}

TEST(Constraints, SolveFor)
{
    const Atom m = Atom::multiplier("m");
    const Atom x = Atom::coordinate(1, "x");
    EXPECT_EQ(detail::solve_for(LinExpr(m, 2) - LinExpr(x, 4) + LinExpr::constant(2), m),
              LinExpr(x, 2) - LinExpr::constant(1));
}

TEST(Constraints, DeterministicUnderReordering)
{
    // Declaration order must not change the result.
    const ProblemSpec base = parse_problem(std::string(FRACMECH_PROBLEMS_DIR) + "/example1.json");
    const ConstraintReport ref = run_constraint_algorithm(derive_canonical(base));
    ProblemSpec swapped = base;
    std::reverse(swapped.constraints.begin(), swapped.constraints.end());
    const ConstraintReport again = run_constraint_algorithm(derive_canonical(swapped));
    EXPECT_EQ(rendered(again), rendered(ref));
    EXPECT_EQ(again.passes, ref.passes);
    EXPECT_EQ(rendered(run_constraint_algorithm(derive_canonical(base))), rendered(ref));
}

TEST(Constraints, SpanGrowsMonotonically)
{
    for (const char* name : {"example1.json", "example2.json", "example3.json"}) {
        const CanonicalSystem sys = load(name);
        const ConstraintReport r = run_constraint_algorithm(sys);
        int max_gen = 0;
        for (const auto& c : r.constraints) {
            max_gen = std::max(max_gen, c.generation);
        }
        std::size_t prev = 0;
        for (int g = 0; g <= max_gen; ++g) {
            std::vector<LinExpr> upto;
            for (const auto& c : r.constraints) {
                if (c.generation <= g) {
                    upto.push_back(c.expr);
                }
            }
            const std::size_t rank = span_rank(upto);
            EXPECT_GT(rank, prev) << name << " generation " << g;
            EXPECT_EQ(rank, upto.size()) << name << ": constraints should be independent";
            prev = rank;
        }
    }
}

TEST(Constraints, FreeParticleHasNone)
{
    ProblemSpec s;
    s.name = "free";
    s.variables = {"x"};
    s.lagrangian = QuadForm::product(s.coordinate(1, {Op::L}), s.coordinate(1, {Op::L}), Rational(1, 2));
    const ConstraintReport r = run_constraint_algorithm(derive_canonical(s));
    EXPECT_TRUE(r.closed);
    EXPECT_TRUE(r.constraints.empty());
}

TEST(Constraints, OutcomeNames)
{
    EXPECT_STREQ(to_string(Outcome::Preserved), "preserved");
    EXPECT_STREQ(to_string(Outcome::NewConstraint), "new-constraint");
}
