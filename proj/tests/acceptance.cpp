// Acceptance gate: one PASS/FAIL line per criterion. With an argument
// (AC1..AC8) only that criterion runs. Exit status is 0 when every criterion
// that ran passed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "fracmech/fracmech.hpp"

using namespace fracmech;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
        }
        detail += (detail.empty() ? "" : "; ") + what + (ok ? "" : " [failed]");
    }
};

std::string problem(const std::string& name) { return std::string(FRACMECH_PROBLEMS_DIR) + "/" + name; }

CanonicalSystem load(const std::string& name) { return derive_canonical(parse_problem(problem(name))); }

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

bool contains_equation(const std::vector<LinExpr>& eqs, const LinExpr& e)
{
    for (const auto& x : eqs) {
        if (x == e || x == -e) {
            return true;
        }
    }
    return false;
}

LinExpr momentum_definition(const CanonicalSystem& sys, int r)
{
    for (const auto& m : sys.momenta) {
        if (m.momentum == Atom::momentum(r, sys.spec.variable(r))) {
            return m.definition;
        }
    }
    return LinExpr::constant(999);
}

// ---------------------------------------------------------------------------

Verdict ac1()
{
    Verdict o;
    const CanonicalSystem sys = load("example1.json");
    const Atom l = Atom::multiplier("l");
    const Atom x1 = sys.spec.coordinate(1);
    const Atom x2 = sys.spec.coordinate(2);
    o.require(momentum_definition(sys, 1) == LinExpr(l), "p0_1 = " + render(momentum_definition(sys, 1)));
    o.require(momentum_definition(sys, 2).is_zero(), "p0_2 = " + render(momentum_definition(sys, 2)));
    const auto eqs = reduced_equations(sys);
    const LinExpr costate = LinExpr(x1) + LinExpr(l) + LinExpr(l.prefixed(Op::R));
    const LinExpr algebraic = LinExpr(x2) - LinExpr(l);
    o.require(contains_equation(eqs, costate), "x1 + l + DR l = 0");
    o.require(contains_equation(eqs, algebraic), "x2 - l = 0");
    return o;
}

Verdict ac2()
{
    Verdict o;
    const CanonicalSystem sys = load("example2.json");
    const auto h = fractional_hessian(sys.lbar, sys.spec);
    o.require(h.matrix == RationalMatrix{{1, 1}, {1, 1}}, "Hessian [[1,1],[1,1]]");
    o.require(hessian_rank(h).rank == 1, "rank " + std::to_string(hessian_rank(h).rank));

    const LinExpr expected = LinExpr(Atom::momentum(2, "x2")) - LinExpr(Atom::momentum(1, "x1"));
    const ConstraintReport r = run_constraint_algorithm(sys);
    const auto primary = r.primary();
    o.require(primary.size() == 1 && primary[0].expr == expected,
              "primary " + (primary.empty() ? std::string("none") : render(primary[0].expr)) + " = 0");
    o.require(render(sys.hamiltonian) == "1/2*(p0_1)^2 + lam*(p0_2 - p0_1)", "H = " + render(sys.hamiltonian));
    bool preserved = !r.steps.empty();
    for (const auto& s : r.steps) {
        preserved = preserved && s.outcome == fracmech::Outcome::Preserved;
    }
    o.require(preserved && r.closed && r.secondary().empty(),
              std::string(preserved ? "preserved" : "not preserved") + ", " + (r.closed ? "closed" : "open") + ", " +
                  std::to_string(r.secondary().size()) + " secondary");
    return o;
}

Verdict ac3()
{
    Verdict o;
    const CanonicalSystem sys = load("example3.json");
    const auto h = fractional_hessian(sys.lbar, sys.spec);
    o.require(hessian_rank(h).rank == 1, "rank " + std::to_string(hessian_rank(h).rank));

    const ConstraintReport r = run_constraint_algorithm(sys);
    std::vector<LinExpr> primary;
    for (const auto& c : r.primary()) {
        primary.push_back(c.expr);
    }
    const LinExpr p2 = LinExpr(Atom::momentum(2, "x2"));
    const LinExpr x3 = LinExpr(sys.spec.coordinate(3));
    const LinExpr p3 = LinExpr(Atom::momentum(3, "x3"));
    const bool plus = same_span(primary, {p2 + x3, p3});
    const bool minus = same_span(primary, {p2 - x3, p3});
    o.require(primary.size() == 2 && (plus || minus),
              "primary span{p0_2 " + std::string(plus ? "+" : "-") + " x3, p0_3}");

    // The multiplier standing for DL x2.
    const Atom dx2 = sys.spec.coordinate(2, {Op::L});
    std::optional<Atom> lambda;
    for (const auto& a : sys.undetermined) {
        if (a.velocity == dx2) {
            lambda = a.multiplier;
        }
    }
    const auto value = lambda ? r.value_of(*lambda) : std::nullopt;
    o.require(value && value->is_zero(),
              (lambda ? render(*lambda) : std::string("lambda")) + " = " + (value ? render(*value) : "undetermined"));

    bool found = false;
    for (const auto& c : r.secondary()) {
        found = found || same_equation(c.expr, LinExpr(dx2));
    }
    o.require(found, "secondary DL x2 = 0 (" + std::to_string(r.secondary().size()) + " secondary in all)");
    o.require(r.closed && r.passes == 2, "closed after " + std::to_string(r.passes) + " passes");
    return o;
}

// Max interior error of the left GL derivative of f against its RL value.
double gl_error(double alpha, std::size_t m, const std::function<double(double)>& f,
                const std::function<double(double)>& exact)
{
    const UniformGrid g(0.0, 1.0, m);
    const FracOrder order(parse_rational(std::to_string(alpha)));
    const auto d = left_rl_apply(SampledFunction::sample(g, f), order);
    double worst = 0.0;
    for (std::size_t k = 1; k < m; ++k) {
        worst = std::max(worst, std::abs(d.values[k] - exact(g.node(k))));
    }
    return worst;
}

Verdict ac4()
{
    Verdict o;
    for (double a : {0.25, 0.5, 0.75}) {
        auto linear_exact = [a](double t) { return std::tgamma(2.0) / std::tgamma(2.0 - a) * std::pow(t, 1.0 - a); };
        auto square_exact = [a](double t) { return 2.0 / std::tgamma(3.0 - a) * std::pow(t, 2.0 - a); };
        const struct {
            const char* name;
            std::function<double(double)> f;
            std::function<double(double)> exact;
        } cases[] = {{"t", [](double t) { return t; }, linear_exact},
                     {"t^2", [](double t) { return t * t; }, square_exact}};
        for (const auto& c : cases) {
            const double e1 = gl_error(a, 1024, c.f, c.exact);
            const double e2 = gl_error(a, 2048, c.f, c.exact);
            const double ratio = e1 / e2;
            o.require(e1 <= 0.02 && ratio >= 1.6 && ratio <= 2.4, std::string(c.name) + " a=" + num(a) + " err " +
                                                                     num(e1) + " ratio " + num(ratio));
        }
    }
    return o;
}

// Closed form of the order-one problem: x1' = -x1 + l, l' = x1 + l,
// x1(0) = 1, l(1) = 0. With A^2 = 2I, exp(At) = cosh(rt) I + sinh(rt)/r A.
struct ClassicalSolution {
    double l0;

    ClassicalSolution()
    {
        const double r = std::sqrt(2.0);
        const double s = std::sinh(r);
        const double c = std::cosh(r);
        l0 = -(s / r) / (c + s / r);
    }

    double x1(double t) const
    {
        const double r = std::sqrt(2.0);
        const double ch = std::cosh(r * t);
        const double sh = std::sinh(r * t) / r;
        return ch * 1.0 + sh * (-1.0 + l0);
    }
};

// Direct minimization of 1/2 int (x1^2 + x2^2) with x2 = x1' + x1 and
// x1(0) = 1, discretized with midpoint values on N cells. Returns x1 at the
// nodes. The normal equations are tridiagonal.
std::vector<double> fd_minimizer(std::size_t n)
{
    const double h = 1.0 / static_cast<double>(n);
    // Per cell: a.x = (x_k + x_{k+1})/2 and b.x = (x_{k+1} - x_k)/h + (x_k + x_{k+1})/2.
    const double ak = 0.5, ak1 = 0.5;
    const double bk = -1.0 / h + 0.5, bk1 = 1.0 / h + 0.5;
    std::vector<double> diag(n + 1, 0.0), off(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        diag[k] += h * (ak * ak + bk * bk);
        diag[k + 1] += h * (ak1 * ak1 + bk1 * bk1);
        off[k] += h * (ak * ak1 + bk * bk1);
    }
    // Unknowns x_1..x_N; x_0 = 1 moves to the right-hand side.
    const std::size_t m = n;
    std::vector<double> d(m), lo(m, 0.0), up(m, 0.0), rhs(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        d[i] = diag[i + 1];
        if (i > 0) {
            lo[i] = off[i];
        }
        if (i + 1 < m) {
            up[i] = off[i + 1];
        }
    }
    rhs[0] = -off[0] * 1.0;
    for (std::size_t i = 1; i < m; ++i) {
        const double w = lo[i] / d[i - 1];
        d[i] -= w * up[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> x(n + 1);
    x[0] = 1.0;
    x[m] = rhs[m - 1] / d[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) {
        x[i + 1] = (rhs[i] - up[i] * x[i + 2]) / d[i];
    }
    return x;
}

Verdict ac5()
{
    Verdict o;
    const ClassicalSolution exact;

    const std::size_t fine = 20000;
    const auto fd = fd_minimizer(fine);
    double oracle_err = 0.0;
    for (std::size_t k = 0; k <= fine; ++k) {
        oracle_err = std::max(oracle_err, std::abs(fd[k] - exact.x1(static_cast<double>(k) / fine)));
    }
    o.require(oracle_err <= 1e-3, "closed form vs minimizer " + num(oracle_err));

    ProblemSpec spec = parse_problem(problem("example1.json"));
    spec.alpha = FracOrder(Rational(1));
    spec.beta = FracOrder(Rational(1));
    const Trajectory t = solve_problem(derive_canonical(spec), 512);
    const auto& x1 = t.at(spec.coordinate(1));
    double err = 0.0;
    for (std::size_t k = 0; k < x1.size(); ++k) {
        err = std::max(err, std::abs(x1[k] - exact.x1(t.grid.node(k))));
    }
    o.require(err <= 1e-2, "solve vs closed form " + num(err));
    return o;
}

Verdict ac6()
{
    Verdict o;
    // Phase space of two variables with left level 0..1 and right level 1 pairs.
    std::vector<std::pair<Atom, Atom>> pairs;
    for (int r = 1; r <= 2; ++r) {
        const std::string v = "x" + std::to_string(r);
        pairs.emplace_back(Atom::coordinate(r, v), Atom::momentum(r, v, 0));
        pairs.emplace_back(Atom::coordinate(r, v, {Op::L}), Atom::momentum(r, v, 1));
        pairs.emplace_back(Atom::coordinate(r, v, {Op::R}), Atom::momentum_right(r, v, 1));
    }
    std::mt19937 rng(1000);
    std::uniform_int_distribution<int> numr(-9, 9);
    std::uniform_int_distribution<int> den(1, 7);
    auto random_linear = [&] {
        LinExpr e = LinExpr::constant(Rational(numr(rng), den(rng)));
        for (const auto& [q, p] : pairs) {
            e.add(q, Rational(numr(rng), den(rng)));
            e.add(p, Rational(numr(rng), den(rng)));
        }
        return e;
    };
    // Symplectic form from the coefficients, independent of the bracket code.
    auto omega = [&](const LinExpr& f, const LinExpr& g) {
        Rational s = 0;
        for (const auto& [q, p] : pairs) {
            s += f.coefficient(q) * g.coefficient(p) - f.coefficient(p) * g.coefficient(q);
        }
        return s;
    };

    int anti = 0, bilinear = 0, jacobi = 0, value = 0;
    const int trials = 1000;
    for (int i = 0; i < trials; ++i) {
        const LinExpr f = random_linear();
        const LinExpr g = random_linear();
        const LinExpr h = random_linear();
        const Rational a(numr(rng), den(rng));
        const Rational b(numr(rng), den(rng));
        const QuadForm F(f), G(g), H(h);
        const QuadForm fg = poisson_bracket(F, G);
        anti += fg == -poisson_bracket(G, F) ? 0 : 1;
        bilinear += poisson_bracket(F * a + G * b, H) == poisson_bracket(F, H) * a + poisson_bracket(G, H) * b ? 0 : 1;
        bilinear += poisson_bracket(H, F * a + G * b) == poisson_bracket(H, F) * a + poisson_bracket(H, G) * b ? 0 : 1;
        const QuadForm jac = poisson_bracket(F, poisson_bracket(G, H)) + poisson_bracket(G, poisson_bracket(H, F)) +
                             poisson_bracket(H, poisson_bracket(F, G));
        jacobi += jac.is_zero() ? 0 : 1;
        value += fg == QuadForm(LinExpr::constant(omega(f, g))) ? 0 : 1;
    }
    int canonical = 0;
    for (const auto& [q, p] : pairs) {
        for (const auto& [q2, p2] : pairs) {
            const Rational want = q == q2 ? Rational(1) : Rational(0);
            canonical += poisson_bracket(QuadForm(LinExpr(q)), QuadForm(LinExpr(p2))) ==
                                 QuadForm(LinExpr::constant(want))
                             ? 0
                             : 1;
        }
    }
    o.require(anti == 0, "antisymmetry " + std::to_string(trials - anti) + "/" + std::to_string(trials));
    o.require(bilinear == 0, "bilinearity failures " + std::to_string(bilinear));
    o.require(jacobi == 0, "Jacobi failures " + std::to_string(jacobi));
    o.require(value == 0, "symplectic value failures " + std::to_string(value));
    o.require(canonical == 0, "{q,p} table over " + std::to_string(pairs.size()) + " pairs");
    return o;
}

Verdict ac7()
{
    Verdict o;
    {
        const CanonicalSystem sys = load("example2.json");
        const Trajectory t = solve_problem(sys, 256);
        const auto& p1 = t.at(Atom::momentum(1, "x1"));
        const auto& p2 = t.at(Atom::momentum(2, "x2"));
        double worst = 0.0;
        for (std::size_t k = 0; k < p1.size(); ++k) {
            worst = std::max(worst, std::abs(p2[k] - p1[k]));
        }
        const double start = std::max(std::abs(t.at(sys.spec.coordinate(1)).front() - 1.0),
                                      std::abs(t.at(sys.spec.coordinate(2)).front()));
        o.require(start <= 1e-12, "example2 initial data x1(0)=1, x2(0)=0 off by " + num(start));
        o.require(worst <= 1e-10, "example2 max |p0_2 - p0_1| " + num(worst));
    }
    {
        const CanonicalSystem sys = load("example3.json");
        const Trajectory t = solve_problem(sys, 256);
        // DL x2 at the nodes where the discrete operator is defined.
        const auto d = evaluate(t, LinExpr(sys.spec.coordinate(2, {Op::L})));
        double worst = 0.0;
        for (std::size_t k = 1; k < d.size(); ++k) {
            worst = std::max(worst, std::abs(d[k]));
        }
        o.require(worst <= 1e-10, "example3 max |DL x2| " + num(worst));
    }
    return o;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Verdict ac8()
{
    Verdict o;
    const fs::path root = fs::temp_directory_path() / ("fracmech_ac8_" + std::to_string(::getpid()));
    fs::remove_all(root);
    const std::vector<std::string> commands{"derive", "constraints", "solve", "check", "limit-study"};
    int differing = 0;
    int failed_runs = 0;
    int files = 0;
    for (const char* ex : {"example1", "example2", "example3"}) {
        for (const auto& cmd : commands) {
            std::string first;
            for (int run = 0; run < 2; ++run) {
                const fs::path dir = root / (std::string(ex) + "_" + cmd + "_" + std::to_string(run));
                const std::string line = std::string("\"") + FRACMECH_CLI + "\" " + cmd + " \"" +
                                         problem(std::string(ex) + ".json") + "\" --m 64 --format json --out \"" +
                                         dir.string() + "\" > \"" + (dir.string() + ".stdout") + "\" 2>&1";
                fs::create_directories(dir);
                if (std::system(line.c_str()) != 0) {
                    ++failed_runs;
                }
                std::string all = slurp(dir.string() + ".stdout");
                std::vector<fs::path> outputs;
                for (const auto& e : fs::directory_iterator(dir)) {
                    outputs.push_back(e.path());
                }
                std::sort(outputs.begin(), outputs.end());
                for (const auto& p : outputs) {
                    all += "\n--" + p.filename().string() + "\n" + slurp(p);
                    files += run == 0 ? 1 : 0;
                }
                if (run == 0) {
                    first = all;
                } else if (all != first) {
                    ++differing;
                }
            }
        }
    }
    fs::remove_all(root);
    o.require(failed_runs == 0, std::to_string(failed_runs) + " failed CLI runs");
    o.require(differing == 0, std::to_string(files) + " output files, " + std::to_string(differing) +
                                  " command(s) not byte-identical");

    int mismatched = 0;
    for (const char* ex : {"example1.json", "example2.json", "example3.json"}) {
        const ProblemSpec s = parse_problem(problem(ex));
        const std::string text = serialize_problem(s);
        const ProblemSpec back = parse_problem_text(text);
        mismatched += back == s && serialize_problem(back) == text ? 0 : 1;
    }
    o.require(mismatched == 0, "parse/serialize round trip");
    return o;
}

struct Criterion {
    const char* id;
    const char* title;
    double time_limit;
    Verdict (*run)();
};

const Criterion criteria[] = {
    {"AC1", "Example 1 derivation", 1.0, ac1},
    {"AC2", "Example 2 analysis", 1.0, ac2},
    {"AC3", "Example 3 analysis", 1.0, ac3},
    {"AC4", "operator correctness (tol 0.02, ratio 1.6..2.4)", 5.0, ac4},
    {"AC5", "classical limit (tol 1e-2, oracle 1e-3)", 10.0, ac5},
    {"AC6", "bracket algebra (exact)", 5.0, ac6},
    {"AC7", "constraint preservation (tol 1e-10)", 5.0, ac7},
    {"AC8", "determinism and round trip (byte-identical)", 60.0, ac8},
};

} // namespace

int main(int argc, char** argv)
{
    const std::string only = argc > 1 ? argv[1] : "";
    bool all_pass = true;
    bool ran = false;
    for (const auto& c : criteria) {
        if (!only.empty() && only != c.id) {
            continue;
        }
        ran = true;
        const auto start = std::chrono::steady_clock::now();
        Verdict o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < c.time_limit;
        const bool pass = o.pass && in_time;
        all_pass = all_pass && pass;
        std::cout << c.id << " " << (pass ? "PASS" : "FAIL") << "  " << c.title << ": " << o.detail << " ("
                  << num(secs) << " s, limit " << num(c.time_limit) << " s" << (in_time ? "" : ", too slow") << ")\n";
    }
    if (!ran) {
        std::cerr << "unknown criterion '" << only << "'\n";
        return 2;
    }
    return all_pass ? 0 : 1;
}
