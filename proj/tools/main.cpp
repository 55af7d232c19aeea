#include "dockopt/csv_io.hpp"
#include "dockopt/nlp.hpp"
#include "dockopt/propagate.hpp"
#include "dockopt/run.hpp"
#include "dockopt/scenario.hpp"
#include "dockopt/trajectory.hpp"
#include "dockopt/transcription.hpp"
#include "dockopt/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNoConvergence = 2;
constexpr int kExitConfigError = 3;
constexpr int kExitIoError = 4;

struct SolveArgs {
    std::string scenario_path;
    std::string out_dir = "out";
    int steps = -1; ///< -1: take the scenario's value
    bool no_collision = false;
    std::string thrust_bound_mode;
    double kkt_tol = 1e-6;
    // Trapezoidal quaternion chains have a small structural feasibility
    // floor when the spin magnitude changes, so the CLI default is looser
    // than the library default.
    double feas_tol = 1e-6;
    unsigned seed = 0;
    double tf_guess = 400.0;
    int max_iters = 3000;
    bool verbose = false;
    bool no_continuation = false;
};

void apply_overrides(dockopt::ScenarioConfig& cfg, const SolveArgs& args) {
    if (args.steps > 0) cfg.steps = args.steps;
    if (args.no_collision) cfg.collision_constraint_enabled = false;
    if (!args.thrust_bound_mode.empty()) {
        if (args.thrust_bound_mode == "literal") {
            cfg.bounds.thrust_mode = dockopt::ThrustBoundMode::literal;
        } else if (args.thrust_bound_mode == "squared") {
            cfg.bounds.thrust_mode = dockopt::ThrustBoundMode::squared;
        } else {
            throw dockopt::ScenarioError("--thrust-bound-mode must be literal or squared");
        }
    }
    cfg.validate();
}

int cmd_solve(const SolveArgs& args) {
    dockopt::ScenarioConfig cfg = dockopt::load_scenario(args.scenario_path);
    apply_overrides(cfg, args);

    dockopt::RunOptions opts;
    opts.t_f_guess = args.tf_guess;
    opts.kkt_tol = args.kkt_tol;
    opts.feasibility_tol = args.feas_tol;
    opts.max_iterations = args.max_iters;
    opts.seed = args.seed;
    opts.verbose = args.verbose;
    opts.grid_continuation = !args.no_continuation;

    const dockopt::SolutionTrajectory traj = dockopt::run_solve(cfg, opts);
    const dockopt::SolveReport& report = traj.report;

    dockopt::export_trajectory(traj, args.out_dir + "/trajectory.csv");
    dockopt::export_report(traj, args.out_dir + "/report.txt");
    dockopt::export_plot_data(traj, args.out_dir + "/plots");

    std::cout << dockopt::format_report(traj);
    return report.converged() ? kExitOk : kExitNoConvergence;
}

int cmd_propagate(const std::string& scenario_path, double t_end, int steps,
                  const std::string& mode_name, const std::string& out_dir) {
    const dockopt::ScenarioConfig cfg = dockopt::load_scenario(scenario_path);
    const int n = steps > 0 ? steps : cfg.steps;
    const dockopt::SolutionTrajectory traj = dockopt::run_propagate(
        cfg, t_end, n, dockopt::propagate_mode_from_string(mode_name));
    dockopt::export_trajectory(traj, out_dir + "/trajectory.csv");
    dockopt::export_report(traj, out_dir + "/report.txt");
    std::cout << "propagated " << n << " steps to t=" << t_end << " s (" << mode_name << ")\n";
    return kExitOk;
}

int cmd_verify(const std::string& scenario_path, unsigned seed, int samples) {
    const dockopt::ScenarioConfig cfg = dockopt::load_scenario(scenario_path);
    const auto checks = dockopt::run_oracle_suite(cfg, seed, samples);
    int failures = 0;
    for (const auto& c : checks) {
        std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << " -- " << c.detail << "\n";
        failures += c.passed ? 0 : 1;
    }
    std::cout << (failures == 0 ? "all checks passed\n"
                                : std::to_string(failures) + " check(s) failed\n");
    return failures == 0 ? kExitOk : 1;
}

int cmd_report(const std::string& scenario_path, const std::string& traj_path,
               const std::string& out_path) {
    const dockopt::ScenarioConfig cfg = dockopt::load_scenario(scenario_path);
    dockopt::SolutionTrajectory traj = dockopt::import_trajectory(traj_path);
    traj.cost = dockopt::total_cost(traj, cfg.weights);
    traj.scenario_hash = cfg.hash();
    if (!out_path.empty()) {
        dockopt::export_report(traj, out_path);
    }
    std::cout << dockopt::format_report(traj);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal docking maneuvers with an uncontrolled spinning target"};
    app.require_subcommand(1);

    SolveArgs sargs;
    CLI::App* solve = app.add_subcommand("solve", "transcribe and solve a docking scenario");
    solve->add_option("--scenario", sargs.scenario_path, "scenario file")->required();
    solve->add_option("--steps", sargs.steps, "grid interval count N (overrides the scenario)");
    solve->add_option("--out", sargs.out_dir, "output directory");
    solve->add_flag("--no-collision-constraint", sargs.no_collision,
                    "drop the keep-out sphere constraint");
    solve->add_option("--thrust-bound-mode", sargs.thrust_bound_mode,
                      "thrust bound interpretation: literal|squared");
    solve->add_option("--kkt-tol", sargs.kkt_tol, "KKT tolerance");
    solve->add_option("--feas-tol", sargs.feas_tol, "feasibility tolerance");
    solve->add_option("--seed", sargs.seed, "random seed");
    solve->add_option("--tf-guess", sargs.tf_guess, "terminal-time starting guess [s]");
    solve->add_option("--max-iters", sargs.max_iters, "iteration limit");
    solve->add_flag("--verbose", sargs.verbose, "per-iteration output");
    solve->add_flag("--no-grid-continuation", sargs.no_continuation,
                    "cold start directly at the target grid");

    std::string prop_scenario, prop_mode = "reference-rk", prop_out = "out";
    double prop_t_end = 400.0;
    int prop_steps = -1;
    CLI::App* prop = app.add_subcommand("propagate", "open-loop zero-control propagation");
    prop->add_option("--scenario", prop_scenario, "scenario file")->required();
    prop->add_option("--t-end", prop_t_end, "propagation horizon [s]");
    prop->add_option("--steps", prop_steps, "output grid interval count");
    prop->add_option("--mode", prop_mode, "analytic-cw|reference-rk|trapezoidal");
    prop->add_option("--out", prop_out, "output directory");

    std::string ver_scenario;
    unsigned ver_seed = 42;
    int ver_samples = 100;
    CLI::App* ver = app.add_subcommand("verify", "run the oracle/invariant suite");
    ver->add_option("--scenario", ver_scenario, "scenario file")->required();
    ver->add_option("--seed", ver_seed, "random seed");
    ver->add_option("--samples", ver_samples, "random-state sample count");

    std::string rep_scenario, rep_traj, rep_out;
    CLI::App* rep = app.add_subcommand("report", "recompute the report for an exported trajectory");
    rep->add_option("--scenario", rep_scenario, "scenario file")->required();
    rep->add_option("--traj", rep_traj, "trajectory CSV")->required();
    rep->add_option("--out", rep_out, "also write the report to this path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(sargs);
        if (prop->parsed()) return cmd_propagate(prop_scenario, prop_t_end, prop_steps,
                                                 prop_mode, prop_out);
        if (ver->parsed()) return cmd_verify(ver_scenario, ver_seed, ver_samples);
        if (rep->parsed()) return cmd_report(rep_scenario, rep_traj, rep_out);
    } catch (const dockopt::ScenarioError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const dockopt::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIoError;
    } catch (const std::domain_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
