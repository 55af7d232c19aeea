#include "dockopt/run.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <vector>

namespace dockopt {

Eigen::VectorXd interpolate_decision(const DecisionLayout& coarse, const Eigen::VectorXd& z,
                                     const DecisionLayout& fine) {
    const UnpackedDecision dec = unpack(coarse, z);
    const int nc = coarse.n_intervals;
    const int nf = fine.n_intervals;

    std::vector<State20> states(static_cast<size_t>(nf) + 1);
    std::vector<Control6> controls(static_cast<size_t>(nf) + 1);
    for (int j = 0; j <= nf; ++j) {
        const double p = static_cast<double>(j) * nc / nf;
        const int k = std::min(static_cast<int>(p), nc - 1);
        const double a = p - k;
        State20 x = (1.0 - a) * dec.states[static_cast<size_t>(k)] +
                    a * dec.states[static_cast<size_t>(k) + 1];
        for (int q0 : {idx::quat_s, idx::quat_t}) {
            x.segment<4>(q0).normalize();
        }
        states[static_cast<size_t>(j)] = x;
        controls[static_cast<size_t>(j)] = (1.0 - a) * dec.controls[static_cast<size_t>(k)] +
                                           a * dec.controls[static_cast<size_t>(k) + 1];
    }
    return pack(fine, states, controls, dec.t_f);
}

SolutionTrajectory run_solve(const ScenarioConfig& scenario, const RunOptions& options) {
    ScenarioConfig cfg = scenario;
    if (options.steps > 0) {
        cfg.steps = options.steps;
    }
    cfg.validate();
    const int n_target = cfg.steps;

    // Refinement ladder: repeated halvings of the target grid down to a
    // coarse startup size. The coarse stage finds the maneuver; each
    // refinement is a cheap warm-started polish.
    std::vector<int> ladder{n_target};
    if (options.grid_continuation) {
        int n = n_target;
        while (n / 2 >= 40 && ladder.size() < 4) {
            n /= 2;
            ladder.push_back(n);
        }
        std::reverse(ladder.begin(), ladder.end());
    }

    SolverOptions base;
    base.kkt_tol = options.kkt_tol;
    base.feasibility_tol = options.feasibility_tol;
    base.max_iterations = options.max_iterations;
    base.seed = options.seed;
    base.verbose = options.verbose;

    // Stage plan: (grid size, keep-out active). With the keep-out enabled
    // the coarse stage is solved without it first; pushing an otherwise
    // consistent trajectory off the sphere is a far easier subproblem than
    // untangling both at once from the interpolated start.
    struct Stage {
        int n = 0;
        bool collision = false;
        bool cold = false;
    };
    std::vector<Stage> plan;
    if (cfg.collision_constraint_enabled && options.grid_continuation) {
        plan.push_back({ladder.front(), false, true});
        for (int n : ladder) {
            plan.push_back({n, true, false});
        }
    } else {
        for (size_t i = 0; i < ladder.size(); ++i) {
            plan.push_back({ladder[i], cfg.collision_constraint_enabled, i == 0});
        }
    }

    Eigen::VectorXd z = initial_guess(cfg, plan.front().n, options.t_f_guess);
    SolveReport report;
    ScenarioConfig stage_cfg = cfg;
    stage_cfg.collision_constraint_enabled = plan.front().collision;
    TranscribedNlp nlp = transcribe(stage_cfg, plan.front().n);
    for (size_t stage = 0; stage < plan.size(); ++stage) {
        const Stage& st = plan[stage];
        const bool last = stage + 1 == plan.size();
        if (stage > 0) {
            stage_cfg.collision_constraint_enabled = st.collision;
            TranscribedNlp fine = transcribe(stage_cfg, st.n);
            z = (st.n == nlp.n_intervals())
                    ? z
                    : interpolate_decision(nlp.layout(), z, fine.layout());
            nlp = std::move(fine);
        }

        SolverOptions opts = base;
        if (!last) {
            // Intermediate stages only need to land in the right basin.
            opts.kkt_tol = std::max(1e-4, options.kkt_tol);
            opts.feasibility_tol = std::max(1e-4, options.feasibility_tol);
            opts.max_iterations = std::min(600, options.max_iterations);
        }
        if (!st.cold) {
            // Warm starts sit near the central path already.
            opts.initial_barrier = st.collision && !plan[stage - 1].collision ? 1e-2 : 1e-3;
        }
        report = solve(nlp.problem(), z, opts);
        z = report.solution;
        if (options.verbose) {
            std::printf("stage N=%d collision=%d: %s f=%.6f viol=%.2e iters=%d\n", st.n,
                        st.collision ? 1 : 0, to_string(report.status).c_str(), report.objective,
                        report.max_eq_violation, report.iterations);
        }
    }

    return build_trajectory(nlp, cfg, report);
}

} // namespace dockopt
