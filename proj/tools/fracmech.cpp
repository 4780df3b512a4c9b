// Command-line front end: derive, constraints, solve, check, limit-study.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "fracmech/fracmech.hpp"

namespace fs = std::filesystem;
using namespace fracmech;

namespace {

struct RunConfig {
    std::string command;
    std::string problem_path;
    std::size_t grid_m = 256;
    std::optional<std::string> alpha_override;
    std::string output_dir = ".";
    std::string format = "text";
    bool verbose = false;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ProblemSpec load(const RunConfig& cfg)
{
    ProblemSpec spec = parse_problem(cfg.problem_path);
    if (cfg.alpha_override) {
        Rational a;
        try {
            a = parse_rational(*cfg.alpha_override);
        } catch (const ParseError& e) {
            throw UsageError(std::string("--alpha: ") + e.what());
        }
        if (!(a > 0 && a <= 1)) {
            throw UsageError("--alpha: must lie in (0, 1]");
        }
        // One order for both operators, as in the classical-limit studies.
        spec.alpha = FracOrder(a);
        spec.beta = FracOrder(a);
    }
    return spec;
}

void emit(const RunConfig& cfg, const std::string& name, const OrderedJson& json, const std::string& text)
{
    write_atomically(fs::path(cfg.output_dir) / (name + ".report.json"), json.dump(2) + "\n");
    if (cfg.format == "json") {
        std::cout << json.dump(2) << "\n";
    } else {
        std::cout << text;
    }
}

int run(const RunConfig& cfg)
{
    const ProblemSpec spec = load(cfg);
    fs::create_directories(cfg.output_dir);

    if (cfg.command == "derive") {
        const CanonicalSystem sys = derive_canonical(spec);
        emit(cfg, spec.name, derive_json(sys), derive_text(sys));
        return 0;
    }
    if (cfg.command == "constraints") {
        const CanonicalSystem sys = derive_canonical(spec);
        const ConstraintReport report = run_constraint_algorithm(sys);
        emit(cfg, spec.name, constraints_json(sys, report, cfg.verbose), constraints_text(sys, report, cfg.verbose));
        return 0;
    }
    if (cfg.command == "solve") {
        const CanonicalSystem sys = derive_canonical(spec);
        const ConstraintReport report = run_constraint_algorithm(sys);
        const NumericModel model = reduce_for_numerics(sys);
        const Trajectory t = solve(assemble(model, detail::grid_for(spec, cfg.grid_m)), model);
        const double violation = check_constraint_preservation(t, report);
        const std::string csv = spec.name + ".trajectory.csv";
        write_atomically(fs::path(cfg.output_dir) / csv, trajectory_csv(t));
        const OrderedJson j = solve_json(model, t, violation, csv);
        emit(cfg, spec.name, j, solve_text(j));
        return 0;
    }
    if (cfg.command == "check") {
        const CanonicalSystem sys = derive_canonical(spec);
        const auto results = run_checks(sys, cfg.grid_m);
        const OrderedJson j = check_json(spec.name, results);
        emit(cfg, spec.name, j, check_text(results));
        return j["all_passed"].get<bool>() ? 0 : 1;
    }
    if (cfg.command == "limit-study") {
        const std::vector<Rational> orders{Rational(7, 10), Rational(8, 10), Rational(9, 10), Rational(99, 100)};
        const auto rows = limit_study(spec, cfg.grid_m, orders, [](const ProblemSpec& s) { return derive_canonical(s); });
        const std::string csv = spec.name + ".limit.csv";
        write_atomically(fs::path(cfg.output_dir) / csv, limit_csv(rows));
        const OrderedJson j = limit_json(spec.name, cfg.grid_m, rows, csv);
        std::string text = "alpha  max deviation from alpha = 1\n";
        for (const auto& r : rows) {
            text += format_order(r.alpha) + "  " + format_double(r.max_deviation) + "\n";
        }
        text += std::string(monotone_decreasing(rows) ? "monotone" : "not monotone") + " as alpha -> 1\n";
        emit(cfg, spec.name, j, text);
        return 0;
    }
    throw UsageError("unknown command '" + cfg.command + "'");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Fractional constrained mechanics: derivation, constraint analysis and numeric solution"};
    RunConfig cfg;
    app.add_option("command", cfg.command, "derive | constraints | solve | check | limit-study")
        ->required()
        ->check(CLI::IsMember({"derive", "constraints", "solve", "check", "limit-study"}));
    app.add_option("problem", cfg.problem_path, "problem file (JSON)")->required();
    app.add_option("--m", cfg.grid_m, "grid intervals")->check(CLI::Range(std::size_t{2}, std::size_t{65536}));
    app.add_option("--alpha", cfg.alpha_override, "override both operator orders, in (0, 1]");
    app.add_option("--out", cfg.output_dir, "output directory");
    app.add_option("--format", cfg.format, "text | json")->check(CLI::IsMember({"text", "json"}));
    app.add_flag("--verbose", cfg.verbose, "include the consistency steps");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        return run(cfg);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const fracmech::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
