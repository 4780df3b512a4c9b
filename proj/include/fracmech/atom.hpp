#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace fracmech {

// L = left derivative a_D_t (order alpha), R = right derivative t_D_b (order beta).
enum class Op : std::uint8_t { L, R };

// word.front() is the outermost application.
using Word = std::vector<Op>;

enum class AtomKind : std::uint8_t {
    Coordinate,    // x_r with an operator word: L^n x_r = q_n^r, R^n x_r = Q_n^r
    Momentum,      // p_n^r
    MomentumRight, // pi_n^r
    Multiplier,    // Lagrange multiplier or renamed velocity
    Endpoint,      // x_r evaluated at a or b; independent of the dynamics
};

enum class Endpoint : std::uint8_t { A, B };

struct Atom {
    AtomKind kind = AtomKind::Coordinate;
    int index = 0;   // 1-based variable index; 0 for multipliers
    std::string var; // variable name, or multiplier name
    int level = 0;   // momentum level n; endpoint code for Endpoint atoms
    Word word;

    auto operator<=>(const Atom&) const = default;
    bool operator==(const Atom&) const = default;

    static Atom coordinate(int index, std::string var, Word word = {})
    {
        return {AtomKind::Coordinate, index, std::move(var), 0, std::move(word)};
    }
    static Atom momentum(int index, std::string var, int level = 0)
    {
        return {AtomKind::Momentum, index, std::move(var), level, {}};
    }
    static Atom momentum_right(int index, std::string var, int level = 0)
    {
        return {AtomKind::MomentumRight, index, std::move(var), level, {}};
    }
    static Atom multiplier(std::string name)
    {
        return {AtomKind::Multiplier, 0, std::move(name), 0, {}};
    }
    static Atom endpoint(int index, std::string var, Endpoint at)
    {
        return {AtomKind::Endpoint, index, std::move(var), static_cast<int>(at), {}};
    }

    bool plain() const { return word.empty(); }
    bool is_multiplier() const { return kind == AtomKind::Multiplier; }
    bool is_momentum() const
    {
        return kind == AtomKind::Momentum || kind == AtomKind::MomentumRight;
    }

    Atom base() const
    {
        Atom b = *this;
        b.word.clear();
        return b;
    }

    Atom prefixed(Op op) const
    {
        Atom a = *this;
        a.word.insert(a.word.begin(), op);
        return a;
    }

    Atom prefixed(const Word& outer) const
    {
        Atom a = *this;
        a.word.insert(a.word.begin(), outer.begin(), outer.end());
        return a;
    }
};

inline Word repeat(Op op, int n)
{
    return Word(static_cast<std::size_t>(n < 0 ? 0 : n), op);
}

inline bool is_pure(const Word& w, Op op)
{
    for (Op o : w) {
        if (o != op) {
            return false;
        }
    }
    return true;
}

inline std::string render_word(const Word& w)
{
    std::string out;
    std::size_t i = 0;
    while (i < w.size()) {
        std::size_t j = i;
        while (j < w.size() && w[j] == w[i]) {
            ++j;
        }
        out += w[i] == Op::L ? "DL" : "DR";
        if (j - i > 1) {
            out += "^" + std::to_string(j - i);
        }
        out += ' ';
        i = j;
    }
    return out;
}

inline std::string render(const Atom& a)
{
    std::string base;
    switch (a.kind) {
    case AtomKind::Coordinate:
    case AtomKind::Multiplier:
        base = a.var;
        break;
    case AtomKind::Momentum:
        base = "p" + std::to_string(a.level) + "_" + std::to_string(a.index);
        break;
    case AtomKind::MomentumRight:
        base = "pi" + std::to_string(a.level) + "_" + std::to_string(a.index);
        break;
    case AtomKind::Endpoint:
        base = a.var + (a.level == static_cast<int>(Endpoint::A) ? "(a)" : "(b)");
        break;
    }
    return render_word(a.word) + base;
}

} // namespace fracmech
