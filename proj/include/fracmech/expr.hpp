#pragma once

// Exact-rational linear and quadratic expressions over atoms. Both types keep
// a canonical form at all times (sorted atoms, no stored zeros), so equality
// is structural.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fracmech/atom.hpp"
#include "fracmech/errors.hpp"
#include "fracmech/rational.hpp"

namespace fracmech {

class LinExpr {
public:
    using Terms = std::map<Atom, Rational>;

    LinExpr() = default;
    LinExpr(const Atom& a, Rational c = 1) { add(a, std::move(c)); } // NOLINT(implicit)
    static LinExpr constant(Rational c)
    {
        LinExpr e;
        e.constant_ = std::move(c);
        return e;
    }

    const Terms& terms() const { return terms_; }
    const Rational& constant_term() const { return constant_; }

    Rational coefficient(const Atom& a) const
    {
        auto it = terms_.find(a);
        return it == terms_.end() ? Rational(0) : it->second;
    }
    bool contains(const Atom& a) const { return terms_.count(a) != 0; }
    bool is_zero() const { return terms_.empty() && constant_ == 0; }
    bool is_constant() const { return terms_.empty(); }

    LinExpr& add(const Atom& a, const Rational& c)
    {
        if (c == 0) {
            return *this;
        }
        auto [it, inserted] = terms_.try_emplace(a, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) {
                terms_.erase(it);
            }
        }
        return *this;
    }

    LinExpr& operator+=(const LinExpr& o)
    {
        for (const auto& [a, c] : o.terms_) {
            add(a, c);
        }
        constant_ += o.constant_;
        return *this;
    }
    LinExpr& operator-=(const LinExpr& o)
    {
        for (const auto& [a, c] : o.terms_) {
            add(a, -c);
        }
        constant_ -= o.constant_;
        return *this;
    }
    LinExpr& operator*=(const Rational& s)
    {
        if (s == 0) {
            terms_.clear();
            constant_ = 0;
            return *this;
        }
        for (auto& [a, c] : terms_) {
            c *= s;
        }
        constant_ *= s;
        return *this;
    }

    friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
    friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
    friend LinExpr operator*(LinExpr a, const Rational& s) { return a *= s; }
    friend LinExpr operator*(const Rational& s, LinExpr a) { return a *= s; }
    friend LinExpr operator-(LinExpr a) { return a *= Rational(-1); }

    friend bool operator==(const LinExpr&, const LinExpr&) = default;

    std::set<Atom> atoms() const
    {
        std::set<Atom> out;
        for (const auto& [a, c] : terms_) {
            out.insert(a);
        }
        return out;
    }

private:
    Terms terms_;
    Rational constant_ = 0;
};

using AtomPair = std::pair<Atom, Atom>;

inline AtomPair ordered_pair(const Atom& a, const Atom& b)
{
    return a <= b ? AtomPair{a, b} : AtomPair{b, a};
}

class QuadForm {
public:
    using QuadTerms = std::map<AtomPair, Rational>;

    QuadForm() = default;
    QuadForm(LinExpr lin) : lin_(std::move(lin)) {} // NOLINT(implicit)

    static QuadForm product(const Atom& a, const Atom& b, const Rational& c = 1)
    {
        QuadForm q;
        q.add_quad(a, b, c);
        return q;
    }

    const QuadTerms& quad() const { return quad_; }
    const LinExpr& lin() const { return lin_; }

    bool is_zero() const { return quad_.empty() && lin_.is_zero(); }
    int degree() const
    {
        if (!quad_.empty()) {
            return 2;
        }
        return lin_.is_constant() ? 0 : 1;
    }

    // Coefficient of the monomial a*b (or a^2 when a == b).
    Rational coefficient(const Atom& a, const Atom& b) const
    {
        auto it = quad_.find(ordered_pair(a, b));
        return it == quad_.end() ? Rational(0) : it->second;
    }

    QuadForm& add_quad(const Atom& a, const Atom& b, const Rational& c)
    {
        if (c == 0) {
            return *this;
        }
        auto key = ordered_pair(a, b);
        auto [it, inserted] = quad_.try_emplace(key, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) {
                quad_.erase(it);
            }
        }
        return *this;
    }

    QuadForm& operator+=(const QuadForm& o)
    {
        for (const auto& [k, c] : o.quad_) {
            add_quad(k.first, k.second, c);
        }
        lin_ += o.lin_;
        return *this;
    }
    QuadForm& operator-=(const QuadForm& o)
    {
        for (const auto& [k, c] : o.quad_) {
            add_quad(k.first, k.second, -c);
        }
        lin_ -= o.lin_;
        return *this;
    }
    QuadForm& operator*=(const Rational& s)
    {
        if (s == 0) {
            quad_.clear();
        } else {
            for (auto& [k, c] : quad_) {
                c *= s;
            }
        }
        lin_ *= s;
        return *this;
    }

    friend QuadForm operator+(QuadForm a, const QuadForm& b) { return a += b; }
    friend QuadForm operator-(QuadForm a, const QuadForm& b) { return a -= b; }
    friend QuadForm operator*(QuadForm a, const Rational& s) { return a *= s; }
    friend QuadForm operator*(const Rational& s, QuadForm a) { return a *= s; }
    friend QuadForm operator-(QuadForm a) { return a *= Rational(-1); }

    friend bool operator==(const QuadForm&, const QuadForm&) = default;

    std::optional<LinExpr> as_linear() const
    {
        if (!quad_.empty()) {
            return std::nullopt;
        }
        return lin_;
    }

    std::set<Atom> atoms() const
    {
        std::set<Atom> out = lin_.atoms();
        for (const auto& [k, c] : quad_) {
            out.insert(k.first);
            out.insert(k.second);
        }
        return out;
    }

private:
    QuadTerms quad_;
    LinExpr lin_;
};

// ---------------------------------------------------------------------------
// Products

inline QuadForm multiply(const LinExpr& a, const LinExpr& b)
{
    QuadForm out;
    for (const auto& [x, cx] : a.terms()) {
        for (const auto& [y, cy] : b.terms()) {
            out.add_quad(x, y, cx * cy);
        }
    }
    LinExpr lin = a * b.constant_term();
    lin += b * a.constant_term();
    lin -= LinExpr::constant(a.constant_term() * b.constant_term());
    out += QuadForm(lin);
    return out;
}

/// Product of two forms; throws DegreeError when the result exceeds degree 2.
inline QuadForm multiply(const QuadForm& a, const QuadForm& b)
{
    if (a.degree() + b.degree() > 2) {
        throw DegreeError("product of degree " + std::to_string(a.degree()) + " and degree " +
                          std::to_string(b.degree()) + " forms exceeds degree 2");
    }
    if (a.degree() == 2) {
        return a * b.lin().constant_term();
    }
    if (b.degree() == 2) {
        return b * a.lin().constant_term();
    }
    return multiply(a.lin(), b.lin());
}

// ---------------------------------------------------------------------------
// Calculus

// Each distinct atom is an independent variable.
inline LinExpr partial(const QuadForm& e, const Atom& a)
{
    LinExpr out = LinExpr::constant(e.lin().coefficient(a));
    for (const auto& [k, c] : e.quad()) {
        if (k.first == a && k.second == a) {
            out.add(a, 2 * c);
        } else if (k.first == a) {
            out.add(k.second, c);
        } else if (k.second == a) {
            out.add(k.first, c);
        }
    }
    return out;
}

inline Rational partial(const LinExpr& e, const Atom& a)
{
    return e.coefficient(a);
}

// Prefixes op to every atom's word. Constants are rejected: the fractional
// derivative of a constant is not a constant.
inline LinExpr apply_operator(const LinExpr& e, Op op)
{
    if (e.constant_term() != 0) {
        throw NonzeroConstantError("cannot apply " + std::string(op == Op::L ? "DL" : "DR") +
                                   " to an expression with constant term " +
                                   to_string(e.constant_term()));
    }
    LinExpr out;
    for (const auto& [a, c] : e.terms()) {
        out.add(a.prefixed(op), c);
    }
    return out;
}

// Applies a whole word; word.front() ends up outermost.
inline LinExpr apply_word(const LinExpr& e, const Word& w)
{
    LinExpr out = e;
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
        out = apply_operator(out, *it);
    }
    return out;
}

using Bindings = std::map<Atom, LinExpr>;

inline LinExpr substitute(const LinExpr& e, const Bindings& b)
{
    if (b.empty()) {
        return e;
    }
    LinExpr out = LinExpr::constant(e.constant_term());
    for (const auto& [a, c] : e.terms()) {
        if (auto it = b.find(a); it != b.end()) {
            out += it->second * c;
        } else {
            out.add(a, c);
        }
    }
    return out;
}

// Linear bindings keep the total degree at most two.
inline QuadForm substitute(const QuadForm& e, const Bindings& b)
{
    if (b.empty()) {
        return e;
    }
    QuadForm out(substitute(e.lin(), b));
    for (const auto& [k, c] : e.quad()) {
        LinExpr x = substitute(LinExpr(k.first), b);
        LinExpr y = substitute(LinExpr(k.second), b);
        out += multiply(x, y) * c;
    }
    return out;
}

// Substitution keyed on base atoms: an atom W b with b bound to e becomes W e.
inline LinExpr substitute_bases(const LinExpr& e, const Bindings& b)
{
    if (b.empty()) {
        return e;
    }
    LinExpr out = LinExpr::constant(e.constant_term());
    for (const auto& [a, c] : e.terms()) {
        if (auto it = b.find(a.base()); it != b.end()) {
            out += apply_word(it->second, a.word) * c;
        } else {
            out.add(a, c);
        }
    }
    return out;
}

// Total order on expressions, used only to make processing order canonical.
inline bool canonical_less(const LinExpr& a, const LinExpr& b)
{
    if (a.terms() != b.terms()) {
        return a.terms() < b.terms();
    }
    return a.constant_term() < b.constant_term();
}

inline bool equal(const LinExpr& a, const LinExpr& b) { return a == b; }
inline bool equal(const QuadForm& a, const QuadForm& b) { return a == b; }

// Equality of the equations a = 0 and b = 0 up to a nonzero scale factor.
inline bool same_equation(const LinExpr& a, const LinExpr& b)
{
    if (a.is_zero() || b.is_zero()) {
        return a.is_zero() && b.is_zero();
    }
    const Atom* lead_a = a.terms().empty() ? nullptr : &a.terms().begin()->first;
    if (lead_a == nullptr) {
        return b.is_constant() && (b.constant_term() == 0) == (a.constant_term() == 0);
    }
    const Rational cb = b.coefficient(*lead_a);
    if (cb == 0) {
        return false;
    }
    return a * (cb / a.terms().begin()->second) == b;
}

// ---------------------------------------------------------------------------
// Rendering

namespace detail {

inline std::string join_signed(const std::vector<std::string>& pieces)
{
    if (pieces.empty()) {
        return "0";
    }
    std::string out = pieces.front();
    for (std::size_t i = 1; i < pieces.size(); ++i) {
        const std::string& p = pieces[i];
        if (!p.empty() && p.front() == '-') {
            out += " - " + p.substr(1);
        } else {
            out += " + " + p;
        }
    }
    return out;
}

inline std::string scaled(const Rational& c, const std::string& body)
{
    if (c == 1) {
        return body;
    }
    if (c == -1) {
        return "-" + body;
    }
    return to_string(c) + "*" + body;
}

} // namespace detail

// Terms with positive coefficients first, then negative ones, each in
// canonical atom order; the constant comes last.
inline std::string render(const LinExpr& e)
{
    std::vector<std::string> pieces;
    for (const auto& [a, c] : e.terms()) {
        if (c > 0) {
            pieces.push_back(detail::scaled(c, render(a)));
        }
    }
    for (const auto& [a, c] : e.terms()) {
        if (c < 0) {
            pieces.push_back(detail::scaled(c, render(a)));
        }
    }
    if (e.constant_term() != 0) {
        pieces.push_back(to_string(e.constant_term()));
    }
    return detail::join_signed(pieces);
}

// Squares first, then plain cross terms, then one group per multiplier
// ("lam*(p0_2 - p0_1)"), then the linear part.
inline std::string render(const QuadForm& q)
{
    std::vector<std::string> pieces;
    std::map<Atom, LinExpr> groups;
    std::vector<std::string> cross;

    for (const auto& [k, c] : q.quad()) {
        const auto& [a, b] = k;
        if (a == b) {
            pieces.push_back(detail::scaled(c, "(" + render(a) + ")^2"));
        } else if (a.is_multiplier() || b.is_multiplier()) {
            // Key on the greater multiplier so renamed velocities own their group.
            const bool key_b = b.is_multiplier() && (!a.is_multiplier() || a < b);
            const Atom& key = key_b ? b : a;
            const Atom& other = key_b ? a : b;
            groups[key].add(other, c);
        } else {
            cross.push_back(detail::scaled(c, render(a) + "*" + render(b)));
        }
    }
    LinExpr rest = LinExpr::constant(q.lin().constant_term());
    for (const auto& [a, c] : q.lin().terms()) {
        if (a.is_multiplier() && groups.count(a) != 0) {
            groups[a] += LinExpr::constant(c);
        } else {
            rest.add(a, c);
        }
    }
    pieces.insert(pieces.end(), cross.begin(), cross.end());
    for (const auto& [m, g] : groups) {
        if (g.terms().size() == 1 && g.constant_term() == 0) {
            const auto& [a, c] = *g.terms().begin();
            pieces.push_back(detail::scaled(c, render(m) + "*" + render(a)));
        } else {
            pieces.push_back(render(m) + "*(" + render(g) + ")");
        }
    }
    if (!rest.is_zero()) {
        pieces.push_back(render(rest));
    }
    return detail::join_signed(pieces);
}

} // namespace fracmech
