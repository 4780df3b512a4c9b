#pragma once

// Machine- and human-readable reports. Key order is fixed and every
// expression is rendered in canonical text form, so reports diff cleanly.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fracmech/constraints.hpp"
#include "fracmech/fracsolve.hpp"
#include "fracmech/problem_io.hpp"

namespace fracmech {

inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v); // no "-0"
    return buf;
}

// ---------------------------------------------------------------------------
// derive

inline OrderedJson derive_json(const CanonicalSystem& sys)
{
    const FracHessian h = fractional_hessian(sys.lbar, sys.spec);
    const HessianRank hr = hessian_rank(h);

    OrderedJson j;
    j["command"] = "derive";
    j["problem"] = sys.spec.name;
    j["alpha"] = sys.spec.alpha.to_string();
    j["beta"] = sys.spec.beta.to_string();
    j["modified_lagrangian"] = "L = " + render(sys.lbar);

    OrderedJson basis = OrderedJson::array();
    for (const auto& v : h.basis) {
        basis.push_back(render(v));
    }
    OrderedJson matrix = OrderedJson::array();
    for (const auto& row : h.matrix) {
        OrderedJson r = OrderedJson::array();
        for (const auto& x : row) {
            r.push_back(to_string(x));
        }
        matrix.push_back(r);
    }
    j["hessian"] = {{"velocities", basis}, {"matrix", matrix}, {"rank", hr.rank}};

    OrderedJson momenta = OrderedJson::array();
    for (const auto& m : sys.momenta) {
        momenta.push_back({{"momentum", render(m.momentum)}, {"definition", render(m.definition)}});
    }
    j["momenta"] = momenta;

    OrderedJson solved = OrderedJson::array();
    for (const auto& [v, e] : sys.velocity_solutions) {
        solved.push_back({{"velocity", render(v)}, {"value", render(e)}});
    }
    j["velocity_solutions"] = solved;

    OrderedJson undetermined = OrderedJson::array();
    for (const auto& a : sys.undetermined) {
        undetermined.push_back({{"multiplier", render(a.multiplier)}, {"velocity", render(a.velocity)}});
    }
    j["undetermined_velocities"] = undetermined;

    OrderedJson primary = OrderedJson::array();
    for (const auto& r : sys.primary_rows) {
        primary.push_back({{"expression", render(r.expr)}, {"origin", r.origin}});
    }
    j["primary_rows"] = primary;
    j["hamiltonian"] = "H = " + render(sys.hamiltonian);

    OrderedJson eqs = OrderedJson::array();
    for (const auto& e : sys.equations) {
        eqs.push_back({{"equation", render(e)}, {"origin", e.origin}});
    }
    j["equations"] = eqs;

    OrderedJson reduced = OrderedJson::array();
    for (const auto& e : reduced_equations(sys)) {
        reduced.push_back(render(e) + " = 0");
    }
    j["reduced_equations"] = reduced;
    return j;
}

inline std::string derive_text(const CanonicalSystem& sys)
{
    const OrderedJson j = derive_json(sys);
    std::ostringstream out;
    out << "problem " << sys.spec.name << " (alpha " << j["alpha"].get<std::string>() << ", beta "
        << j["beta"].get<std::string>() << ")\n";
    out << j["modified_lagrangian"].get<std::string>() << "\n";
    out << "hessian rank " << j["hessian"]["rank"].get<std::size_t>() << " over";
    for (const auto& v : j["hessian"]["velocities"]) {
        out << " [" << v.get<std::string>() << "]";
    }
    out << "\n";
    for (const auto& row : j["hessian"]["matrix"]) {
        out << " ";
        for (const auto& x : row) {
            out << " " << x.get<std::string>();
        }
        out << "\n";
    }
    out << "momenta:\n";
    for (const auto& m : sys.momenta) {
        out << "  " << render(m.momentum) << " = " << render(m.definition) << "\n";
    }
    for (const auto& a : sys.undetermined) {
        out << "velocity " << render(a.velocity) << " renamed to " << render(a.multiplier) << "\n";
    }
    out << j["hamiltonian"].get<std::string>() << "\n";
    out << "equations:\n";
    for (const auto& e : sys.equations) {
        out << "  " << render(e) << "\n";
    }
    out << "reduced equations:\n";
    for (const auto& e : j["reduced_equations"]) {
        out << "  " << e.get<std::string>() << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// constraints

inline OrderedJson constraints_json(const CanonicalSystem& sys, const ConstraintReport& r, bool verbose)
{
    OrderedJson j;
    j["command"] = "constraints";
    j["problem"] = sys.spec.name;
    OrderedJson cs = OrderedJson::array();
    for (const auto& c : r.constraints) {
        cs.push_back({{"generation", c.generation}, {"origin", c.origin}, {"expression", render(c.expr) + " = 0"}});
    }
    j["constraints"] = cs;
    j["primary_count"] = r.primary().size();
    j["secondary_count"] = r.secondary().size();
    OrderedJson ds = OrderedJson::array();
    for (const auto& d : r.determinations) {
        ds.push_back({{"multiplier", render(d.multiplier)}, {"value", render(d.value)}, {"origin", d.origin},
                      {"text", render(d.multiplier) + " = " + render(d.value)}});
    }
    j["determinations"] = ds;
    OrderedJson free = OrderedJson::array();
    for (const auto& a : sys.undetermined) {
        if (!r.is_determined(a.multiplier)) {
            free.push_back(render(a.multiplier));
        }
    }
    for (const auto& m : sys.dynamical_multipliers()) {
        if (!r.is_determined(m)) {
            free.push_back(render(m));
        }
    }
    j["undetermined_multipliers"] = free;
    j["passes"] = r.passes;
    j["closed"] = r.closed;
    if (verbose) {
        OrderedJson steps = OrderedJson::array();
        for (const auto& s : r.steps) {
            steps.push_back({{"pass", s.pass},
                             {"constraint", render(s.constraint)},
                             {"evolution", render(s.evolution)},
                             {"outcome", to_string(s.outcome)},
                             {"note", s.note}});
        }
        j["steps"] = steps;
    }
    return j;
}

inline std::string constraints_text(const CanonicalSystem& sys, const ConstraintReport& r, bool verbose)
{
    std::ostringstream out;
    out << "problem " << sys.spec.name << "\n";
    out << r.primary().size() << " primary, " << r.secondary().size() << " secondary\n";
    for (const auto& c : r.constraints) {
        out << "  [" << c.generation << "] " << render(c.expr) << " = 0   (" << c.origin << ")\n";
    }
    for (const auto& d : r.determinations) {
        out << "  " << render(d.multiplier) << " = " << render(d.value) << "   (" << d.origin << ")\n";
    }
    if (verbose) {
        for (const auto& s : r.steps) {
            out << "  pass " << s.pass << ": " << render(s.constraint) << " -> " << render(s.evolution) << " : "
                << to_string(s.outcome) << (s.note.empty() ? "" : " (" + s.note + ")") << "\n";
        }
    }
    out << (r.closed ? "closed" : "not closed") << " after " << r.passes << (r.passes == 1 ? " pass" : " passes")
        << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// solve

inline std::vector<std::string> series_names(const Trajectory& t)
{
    std::vector<std::string> names;
    for (const auto& [a, v] : t.series) {
        names.push_back(render(a));
    }
    return names;
}

inline std::string trajectory_csv(const Trajectory& t)
{
    std::ostringstream out;
    out << "t";
    for (const auto& name : series_names(t)) {
        out << "," << name;
    }
    out << ",residual\n";
    for (std::size_t k = 0; k < t.grid.nodes(); ++k) {
        out << format_double(t.grid.node(k));
        for (const auto& [a, v] : t.series) {
            out << "," << format_double(v[k]);
        }
        out << "," << format_double(t.node_residual[k]) << "\n";
    }
    return out.str();
}

inline OrderedJson solve_json(const NumericModel& model, const Trajectory& t, double violation,
                              const std::string& csv_name)
{
    OrderedJson j;
    j["command"] = "solve";
    j["problem"] = model.spec.name;
    j["alpha"] = model.spec.alpha.to_string();
    j["beta"] = model.spec.beta.to_string();
    j["m"] = t.grid.intervals();
    OrderedJson eqs = OrderedJson::array();
    for (const auto& e : model.equations) {
        eqs.push_back(render(e) + " = 0");
    }
    j["equations"] = eqs;
    OrderedJson unknowns = OrderedJson::array();
    for (const auto& u : model.unknowns) {
        unknowns.push_back(render(u));
    }
    j["unknowns"] = unknowns;
    OrderedJson rec = OrderedJson::array();
    for (const auto& r : model.recoveries) {
        rec.push_back(render(r.atom) + " = " + render(r.value));
    }
    j["recovered"] = rec;
    OrderedJson gauge = OrderedJson::array();
    for (const auto& g : model.gauge_fixed) {
        gauge.push_back(render(g));
    }
    j["gauge_fixed"] = gauge;
    OrderedJson pins = OrderedJson::array();
    for (const auto& p : model.pins) {
        pins.push_back({{"datum", p.source}, {"equation", render(model.equations[p.equation]) + " = 0"}});
    }
    j["boundary"] = pins;
    j["max_residual"] = format_double(t.residual);
    j["constraint_violation"] = format_double(violation);
    OrderedJson fin;
    for (const auto& [a, v] : t.series) {
        fin[render(a)] = format_double(v.back());
    }
    j["final_values"] = fin;
    j["trajectory"] = csv_name;
    return j;
}

inline std::string solve_text(const OrderedJson& j)
{
    std::ostringstream out;
    out << "problem " << j["problem"].get<std::string>() << ", alpha " << j["alpha"].get<std::string>() << ", m "
        << j["m"].get<std::size_t>() << "\n";
    out << "solved system:\n";
    for (const auto& e : j["equations"]) {
        out << "  " << e.get<std::string>() << "\n";
    }
    for (const auto& r : j["recovered"]) {
        out << "  recovered " << r.get<std::string>() << "\n";
    }
    for (const auto& p : j["boundary"]) {
        out << "  boundary " << p["datum"].get<std::string>() << "\n";
    }
    out << "max residual " << j["max_residual"].get<std::string>() << "\n";
    out << "constraint violation " << j["constraint_violation"].get<std::string>() << "\n";
    out << "trajectory written to " << j["trajectory"].get<std::string>() << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// check and limit-study

struct CheckResult {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

inline OrderedJson check_json(const std::string& problem, const std::vector<CheckResult>& results)
{
    OrderedJson j;
    j["command"] = "check";
    j["problem"] = problem;
    OrderedJson rs = OrderedJson::array();
    bool all = true;
    for (const auto& r : results) {
        rs.push_back({{"name", r.name},
                      {"value", format_double(r.value)},
                      {"tolerance", format_double(r.tolerance)},
                      {"pass", r.pass},
                      {"detail", r.detail}});
        all = all && r.pass;
    }
    j["checks"] = rs;
    j["all_passed"] = all;
    return j;
}

inline std::string check_text(const std::vector<CheckResult>& results)
{
    std::ostringstream out;
    for (const auto& r : results) {
        out << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << format_double(r.value) << " (tolerance "
            << format_double(r.tolerance) << ")" << (r.detail.empty() ? "" : " " + r.detail) << "\n";
    }
    return out.str();
}

// Orders come from short decimals, so six digits reproduce them exactly.
inline std::string format_order(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string limit_csv(const std::vector<LimitRow>& rows)
{
    std::ostringstream out;
    out << "alpha,max_deviation\n";
    for (const auto& r : rows) {
        out << format_order(r.alpha) << "," << format_double(r.max_deviation) << "\n";
    }
    return out.str();
}

inline bool monotone_decreasing(const std::vector<LimitRow>& rows)
{
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (!(rows[i].max_deviation < rows[i - 1].max_deviation)) {
            return false;
        }
    }
    return true;
}

inline OrderedJson limit_json(const std::string& problem, std::size_t m, const std::vector<LimitRow>& rows,
                              const std::string& csv_name)
{
    OrderedJson j;
    j["command"] = "limit-study";
    j["problem"] = problem;
    j["m"] = m;
    OrderedJson rs = OrderedJson::array();
    for (const auto& r : rows) {
        rs.push_back({{"alpha", format_order(r.alpha)}, {"max_deviation", format_double(r.max_deviation)}});
    }
    j["rows"] = rs;
    j["monotone"] = monotone_decreasing(rows);
    j["table"] = csv_name;
    return j;
}

// ---------------------------------------------------------------------------
// Output files

/// Writes through a temporary file in the same directory, then renames.
inline void write_atomically(const std::filesystem::path& path, const std::string& content)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write '" + tmp.string() + "'");
        }
        out << content;
        out.flush();
        if (!out) {
            throw Error("write to '" + tmp.string() + "' failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error("cannot rename onto '" + path.string() + "'");
    }
}

} // namespace fracmech
