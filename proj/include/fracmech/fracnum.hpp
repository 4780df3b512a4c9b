#pragma once

// Grünwald-Letnikov realization of the left and right Riemann-Liouville
// derivatives on uniform grids.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fracmech/dense.hpp"
#include "fracmech/errors.hpp"
#include "fracmech/rational.hpp"

namespace fracmech {

// Fractional order, 0 < value < 2. Stored exactly.
class FracOrder {
public:
    explicit FracOrder(Rational value) : value_(std::move(value))
    {
        if (value_ <= 0 || value_ >= 2) {
            throw OrderDomainError("fractional order " + fracmech::to_string(value_) +
                                   " outside (0, 2)");
        }
    }
    explicit FracOrder(std::string_view text) : FracOrder(parse_rational(text)) {}

    const Rational& value() const { return value_; }
    double to_double() const { return fracmech::to_double(value_); }
    std::string to_string() const { return fracmech::to_string(value_); }

    // Numeric solvers only accept 0 < alpha <= 1.
    bool numeric_admissible() const { return value_ <= 1; }

    friend bool operator==(const FracOrder&, const FracOrder&) = default;

private:
    Rational value_;
};

inline void require_numeric_order(const FracOrder& alpha)
{
    if (!alpha.numeric_admissible()) {
        throw OrderDomainError("numeric operators require order in (0, 1], got " +
                               alpha.to_string());
    }
}

class UniformGrid {
public:
    UniformGrid(double a, double b, std::size_t m) : a_(a), b_(b), m_(m)
    {
        if (!(b > a)) {
            throw SpecError("grid requires b > a");
        }
        if (m < 2) {
            throw SpecError("grid requires at least 2 intervals");
        }
    }

    double a() const { return a_; }
    double b() const { return b_; }
    std::size_t intervals() const { return m_; }
    std::size_t nodes() const { return m_ + 1; }
    double step() const { return (b_ - a_) / static_cast<double>(m_); }
    double node(std::size_t k) const
    {
        // Last node is pinned to b to avoid round-off drift.
        return k == m_ ? b_ : a_ + static_cast<double>(k) * step();
    }

    friend bool operator==(const UniformGrid&, const UniformGrid&) = default;

private:
    double a_;
    double b_;
    std::size_t m_;
};

struct SampledFunction {
    UniformGrid grid;
    std::vector<double> values;

    SampledFunction(UniformGrid g, std::vector<double> v) : grid(g), values(std::move(v))
    {
        if (values.size() != grid.nodes()) {
            throw SpecError("sample count " + std::to_string(values.size()) +
                            " does not match node count " + std::to_string(grid.nodes()));
        }
    }

    template <typename F>
    static SampledFunction sample(const UniformGrid& g, F&& f)
    {
        std::vector<double> v(g.nodes());
        for (std::size_t k = 0; k < g.nodes(); ++k) {
            v[k] = f(g.node(k));
        }
        return {g, std::move(v)};
    }
};

enum class Side { Left, Right };

/// Grünwald-Letnikov weights w_j = (-1)^j binom(alpha, j), j < count.
inline std::vector<double> gl_weights(const FracOrder& alpha, std::size_t count)
{
    std::vector<double> w;
    if (count == 0) {
        return w;
    }
    w.reserve(count);
    const double a = alpha.to_double();
    w.push_back(1.0);
    for (std::size_t j = 1; j < count; ++j) {
        w.push_back(w.back() * (1.0 - (a + 1.0) / static_cast<double>(j)));
    }
    return w;
}

namespace detail {

inline std::vector<double> scaled_weights(const FracOrder& alpha, const UniformGrid& grid)
{
    auto w = gl_weights(alpha, grid.nodes());
    const double scale = std::pow(grid.step(), -alpha.to_double());
    for (double& x : w) {
        x *= scale;
    }
    return w;
}

} // namespace detail

// Both apply routines accumulate in ascending column order with pre-scaled
// weights, so they agree bit-for-bit with operator_matrix(...) * values.

/// Left derivative: h^-alpha * sum_{j<=k} w_j f(t_{k-j}).
inline SampledFunction left_rl_apply(const SampledFunction& f, const FracOrder& alpha)
{
    require_numeric_order(alpha);
    const std::size_t n = f.grid.nodes();
    const auto sw = detail::scaled_weights(alpha, f.grid);
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t col = 0; col <= k; ++col) {
            acc += sw[k - col] * f.values[col];
        }
        out[k] = acc;
    }
    return {f.grid, std::move(out)};
}

/// Right derivative: h^-alpha * sum_{j<=m-k} w_j f(t_{k+j}).
inline SampledFunction right_rl_apply(const SampledFunction& f, const FracOrder& alpha)
{
    require_numeric_order(alpha);
    const std::size_t n = f.grid.nodes();
    const auto sw = detail::scaled_weights(alpha, f.grid);
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t col = k; col < n; ++col) {
            acc += sw[col - k] * f.values[col];
        }
        out[k] = acc;
    }
    return {f.grid, std::move(out)};
}

inline SampledFunction rl_apply(const SampledFunction& f, const FracOrder& alpha, Side side)
{
    return side == Side::Left ? left_rl_apply(f, alpha) : right_rl_apply(f, alpha);
}

/// Dense matrix realizing the apply operation: lower-triangular Toeplitz for
/// the left side, upper-triangular Toeplitz for the right side.
inline DenseMatrix operator_matrix(const FracOrder& alpha, const UniformGrid& grid, Side side)
{
    require_numeric_order(alpha);
    const std::size_t n = grid.nodes();
    const auto sw = detail::scaled_weights(alpha, grid);
    DenseMatrix m(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        if (side == Side::Left) {
            for (std::size_t col = 0; col <= k; ++col) {
                m(k, col) = sw[k - col];
            }
        } else {
            for (std::size_t col = k; col < n; ++col) {
                m(k, col) = sw[col - k];
            }
        }
    }
    return m;
}

/// Observed convergence factor between successive grid refinements.
inline std::vector<double> error_ratios(std::span<const double> errors)
{
    std::vector<double> ratios;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        ratios.push_back(errors[i] / errors[i + 1]);
    }
    return ratios;
}

} // namespace fracmech
