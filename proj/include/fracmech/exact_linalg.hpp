#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <vector>

#include "fracmech/expr.hpp"
#include "fracmech/rational.hpp"

namespace fracmech {

using RationalMatrix = std::vector<std::vector<Rational>>;
using RationalVector = std::vector<Rational>;

inline std::size_t column_count(const RationalMatrix& m)
{
    return m.empty() ? 0 : m.front().size();
}

struct RrefResult {
    RationalMatrix reduced;
    std::vector<std::size_t> pivot_columns;
};

// Reduced row echelon form over the rationals. Pivots are taken in column
// order, first nonzero row below the current one.
inline RrefResult rref(RationalMatrix m)
{
    RrefResult out;
    const std::size_t rows = m.size();
    const std::size_t cols = column_count(m);
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t p = r;
        while (p < rows && m[p][c] == 0) {
            ++p;
        }
        if (p == rows) {
            continue;
        }
        std::swap(m[r], m[p]);
        const Rational inv = 1 / m[r][c];
        for (auto& x : m[r]) {
            x *= inv;
        }
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || m[i][c] == 0) {
                continue;
            }
            const Rational f = m[i][c];
            for (std::size_t j = c; j < cols; ++j) {
                m[i][j] -= f * m[r][j];
            }
        }
        out.pivot_columns.push_back(c);
        ++r;
    }
    out.reduced = std::move(m);
    return out;
}

/// Rank by fraction-free (Bareiss) elimination on the integer-scaled matrix.
inline std::size_t bareiss_rank(const RationalMatrix& m)
{
    const std::size_t rows = m.size();
    const std::size_t cols = column_count(m);
    std::vector<std::vector<Integer>> a(rows, std::vector<Integer>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        Integer l = 1;
        for (const auto& x : m[i]) {
            l = boost::multiprecision::lcm(l, boost::multiprecision::denominator(x));
        }
        for (std::size_t j = 0; j < cols; ++j) {
            a[i][j] = boost::multiprecision::numerator(m[i][j]) *
                      (l / boost::multiprecision::denominator(m[i][j]));
        }
    }

    Integer prev = 1;
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t p = rank;
        while (p < rows && a[p][c] == 0) {
            ++p;
        }
        if (p == rows) {
            continue;
        }
        std::swap(a[rank], a[p]);
        for (std::size_t i = rank + 1; i < rows; ++i) {
            for (std::size_t j = c + 1; j < cols; ++j) {
                a[i][j] = (a[rank][c] * a[i][j] - a[i][c] * a[rank][j]) / prev;
            }
            a[i][c] = 0;
        }
        prev = a[rank][c];
        ++rank;
    }
    return rank;
}

/// Basis of {v : m v = 0}, one vector per free column, with a 1 in that column.
inline std::vector<RationalVector> nullspace(const RationalMatrix& m, std::size_t cols)
{
    const auto [r, pivots] = rref(m);
    std::vector<bool> is_pivot(cols, false);
    for (auto c : pivots) {
        is_pivot[c] = true;
    }
    std::vector<RationalVector> basis;
    for (std::size_t free = 0; free < cols; ++free) {
        if (is_pivot[free]) {
            continue;
        }
        RationalVector v(cols, Rational(0));
        v[free] = 1;
        for (std::size_t k = 0; k < pivots.size(); ++k) {
            v[pivots[k]] = -r[k][free];
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

// ---------------------------------------------------------------------------
// Linear spans of expressions. Each distinct atom is a column, plus one
// column for the constant term.

namespace detail {

inline RationalMatrix to_rows(const std::vector<const LinExpr*>& exprs)
{
    std::map<Atom, std::size_t> columns;
    for (const auto* e : exprs) {
        for (const auto& [a, c] : e->terms()) {
            columns.emplace(a, 0);
        }
    }
    std::size_t next = 0;
    for (auto& [a, idx] : columns) {
        idx = next++;
    }
    RationalMatrix rows;
    for (const auto* e : exprs) {
        RationalVector row(next + 1, Rational(0));
        for (const auto& [a, c] : e->terms()) {
            row[columns.at(a)] = c;
        }
        row[next] = e->constant_term();
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace detail

inline std::size_t span_rank(const std::vector<LinExpr>& exprs)
{
    std::vector<const LinExpr*> ptrs;
    for (const auto& e : exprs) {
        ptrs.push_back(&e);
    }
    return bareiss_rank(detail::to_rows(ptrs));
}

inline bool in_span(const std::vector<LinExpr>& basis, const LinExpr& v)
{
    if (v.is_zero()) {
        return true;
    }
    std::vector<const LinExpr*> ptrs;
    for (const auto& e : basis) {
        ptrs.push_back(&e);
    }
    const auto base = detail::to_rows(ptrs);
    ptrs.push_back(&v);
    const auto with = detail::to_rows(ptrs);
    // to_rows may add columns for atoms only present in v; rank comparison
    // stays valid because those columns are zero in the basis rows.
    return bareiss_rank(with) == bareiss_rank(base);
}

// Row-space equality; insensitive to sign and scaling of individual rows.
inline bool same_span(const std::vector<LinExpr>& a, const std::vector<LinExpr>& b)
{
    std::vector<LinExpr> all = a;
    all.insert(all.end(), b.begin(), b.end());
    const auto r = span_rank(all);
    return r == span_rank(a) && r == span_rank(b);
}

} // namespace fracmech
