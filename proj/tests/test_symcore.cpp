#include <random>

#include <gtest/gtest.h>

#include "fracmech/expr.hpp"

using namespace fracmech;

namespace {

const Atom x1 = Atom::coordinate(1, "x1");
const Atom x2 = Atom::coordinate(2, "x2");
const Atom dx1 = Atom::coordinate(1, "x1", {Op::L});
const Atom dx2 = Atom::coordinate(2, "x2", {Op::L});
const Atom p1 = Atom::momentum(1, "x1");
const Atom p2 = Atom::momentum(2, "x2");
const Atom lam = Atom::multiplier("lam");

LinExpr random_lin(std::mt19937& rng, bool with_constant = true)
{
    static const std::vector<Atom> pool{x1, x2, dx1, dx2, p1, p2, lam};
    std::uniform_int_distribution<int> num(-6, 6);
    std::uniform_int_distribution<int> den(1, 5);
    LinExpr e = with_constant ? LinExpr::constant(Rational(num(rng), den(rng))) : LinExpr();
    for (const auto& a : pool) {
        if (rng() % 2 == 0) {
            e.add(a, Rational(num(rng), den(rng)));
        }
    }
    return e;
}

} // namespace

TEST(Atom, Rendering)
{
    EXPECT_EQ(render(x1), "x1");
    EXPECT_EQ(render(dx1), "DL x1");
    EXPECT_EQ(render(Atom::coordinate(1, "x1", {Op::L, Op::L, Op::R})), "DL^2 DR x1");
    EXPECT_EQ(render(p2), "p0_2");
    EXPECT_EQ(render(Atom::momentum_right(1, "x1", 2)), "pi2_1");
    EXPECT_EQ(render(p1.prefixed(Op::R)), "DR p0_1");
    EXPECT_EQ(render(Atom::endpoint(1, "x1", Endpoint::A)), "x1(a)");
    EXPECT_EQ(render(lam), "lam");
}

TEST(Atom, PrefixPutsOperatorOutermost)
{
    const Atom a = dx1.prefixed(Op::R);
    ASSERT_EQ(a.word.size(), 2u);
    EXPECT_EQ(a.word.front(), Op::R);
    EXPECT_EQ(a.base(), x1);
}

TEST(LinExpr, CanonicalFormDropsZeros)
{
    LinExpr e = LinExpr(x1) + LinExpr(x2) - LinExpr(x1);
    EXPECT_EQ(e, LinExpr(x2));
    EXPECT_FALSE(e.contains(x1));
    EXPECT_TRUE((LinExpr(x1) - LinExpr(x1)).is_zero());
    EXPECT_EQ(e * Rational(0), LinExpr());
}

TEST(LinExpr, RenderingOrder)
{
    LinExpr e = LinExpr(p2) - LinExpr(p1);
    EXPECT_EQ(render(e), "p0_2 - p0_1");
    EXPECT_EQ(render(LinExpr(x1) + LinExpr(lam) + LinExpr(lam.prefixed(Op::R))), "x1 + lam + DR lam");
    EXPECT_EQ(render(LinExpr::constant(Rational(-3, 2))), "-3/2");
    EXPECT_EQ(render(LinExpr()), "0");
    EXPECT_EQ(render(LinExpr(x1, Rational(1, 2)) + LinExpr::constant(1)), "1/2*x1 + 1");
}

TEST(QuadForm, RenderingGroupsMultipliers)
{
    QuadForm h = QuadForm::product(p1, p1, Rational(1, 2)) + multiply(LinExpr(lam), LinExpr(p2) - LinExpr(p1));
    EXPECT_EQ(render(h), "1/2*(p0_1)^2 + lam*(p0_2 - p0_1)");
}

TEST(QuadForm, PartialDerivatives)
{
    // q = 1/2 p1^2 + lam p2 - lam p1 + 3 x1
    QuadForm q = QuadForm::product(p1, p1, Rational(1, 2)) + multiply(LinExpr(lam), LinExpr(p2) - LinExpr(p1)) +
                 QuadForm(LinExpr(x1, 3));
    EXPECT_EQ(partial(q, p1), LinExpr(p1) - LinExpr(lam));
    EXPECT_EQ(partial(q, lam), LinExpr(p2) - LinExpr(p1));
    EXPECT_EQ(partial(q, x1), LinExpr::constant(3));
    EXPECT_TRUE(partial(q, x2).is_zero());
}

TEST(QuadForm, DegreeOverflowRejected)
{
    const QuadForm sq = QuadForm::product(x1, x1);
    EXPECT_THROW(multiply(sq, QuadForm(LinExpr(x2))), DegreeError);
    EXPECT_NO_THROW(multiply(sq, QuadForm(LinExpr::constant(2))));
    EXPECT_EQ(multiply(sq, QuadForm(LinExpr::constant(2))), QuadForm::product(x1, x1, 2));
}

TEST(Operators, ConstantRejected)
{
    EXPECT_THROW(apply_operator(LinExpr(x1) + LinExpr::constant(1), Op::L), NonzeroConstantError);
    EXPECT_EQ(apply_operator(LinExpr(x1, 2) - LinExpr(lam), Op::R),
              LinExpr(x1.prefixed(Op::R), 2) - LinExpr(lam.prefixed(Op::R)));
    EXPECT_EQ(apply_word(LinExpr(x1), {Op::R, Op::L}), LinExpr(Atom::coordinate(1, "x1", {Op::R, Op::L})));
}

TEST(Substitution, WordsFollowBases)
{
    const Bindings b{{lam, LinExpr(x1) - LinExpr(x2)}};
    const LinExpr e = LinExpr(lam.prefixed(Op::R)) + LinExpr(lam);
    EXPECT_EQ(substitute_bases(e, b), LinExpr(Atom::coordinate(1, "x1", {Op::R})) -
                                          LinExpr(Atom::coordinate(2, "x2", {Op::R})) + LinExpr(x1) - LinExpr(x2));
    // Plain substitution leaves worded atoms alone.
    EXPECT_EQ(substitute(e, b), LinExpr(lam.prefixed(Op::R)) + LinExpr(x1) - LinExpr(x2));
}

TEST(SameEquation, UpToScale)
{
    EXPECT_TRUE(same_equation(LinExpr(x1) - LinExpr(x2), LinExpr(x2, 3) - LinExpr(x1, 3)));
    EXPECT_FALSE(same_equation(LinExpr(x1) - LinExpr(x2), LinExpr(x1) + LinExpr(x2)));
    EXPECT_FALSE(same_equation(LinExpr(x1), LinExpr()));
}

TEST(Properties, RingLawsOnRandomExpressions)
{
    std::mt19937 rng(11);
    for (int i = 0; i < 300; ++i) {
        const LinExpr a = random_lin(rng);
        const LinExpr b = random_lin(rng);
        const LinExpr c = random_lin(rng);
        EXPECT_EQ(a + b, b + a);
        EXPECT_EQ((a + b) + c, a + (b + c));
        EXPECT_EQ(multiply(a, b), multiply(b, a));
        EXPECT_EQ(multiply(a, b + c), multiply(a, b) + multiply(a, c));
        EXPECT_TRUE((a - a).is_zero());
    }
}

TEST(Properties, PartialOfProductIsProductRule)
{
    std::mt19937 rng(12);
    for (int i = 0; i < 300; ++i) {
        const LinExpr a = random_lin(rng);
        const LinExpr b = random_lin(rng);
        for (const auto& at : {x1, dx2, p1, lam}) {
            const LinExpr expected = b * a.coefficient(at) + a * b.coefficient(at);
            EXPECT_EQ(partial(multiply(a, b), at), expected);
        }
    }
}

TEST(Properties, OperatorsAreLinear)
{
    std::mt19937 rng(13);
    for (int i = 0; i < 300; ++i) {
        const LinExpr a = random_lin(rng, false);
        const LinExpr b = random_lin(rng, false);
        const Rational s(static_cast<int>(rng() % 7) - 3, 2);
        EXPECT_EQ(apply_operator(a * s + b, Op::L), apply_operator(a, Op::L) * s + apply_operator(b, Op::L));
    }
}
