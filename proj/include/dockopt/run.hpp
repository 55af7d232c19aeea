#pragma once

#include "dockopt/nlp.hpp"
#include "dockopt/scenario.hpp"
#include "dockopt/trajectory.hpp"
#include "dockopt/transcription.hpp"

namespace dockopt {

/// Orchestration options for a full solve run.
struct RunOptions {
    int steps = -1;          ///< grid override; -1 takes the scenario value
    double t_f_guess = 400.0;
    double kkt_tol = 1e-6;
    double feasibility_tol = 1e-6;
    int max_iterations = 3000;
    unsigned seed = 0;
    bool verbose = false;

    /// Solve a coarsened-grid ladder first and warm-start each refinement;
    /// direct cold start at the target grid when disabled.
    bool grid_continuation = true;
};

/// Prolong a coarse-grid solution onto a finer uniform grid (componentwise
/// linear interpolation with quaternion renormalization).
Eigen::VectorXd interpolate_decision(const DecisionLayout& coarse, const Eigen::VectorXd& z,
                                     const DecisionLayout& fine);

/// Transcribe, solve and post-process one scenario end to end.
SolutionTrajectory run_solve(const ScenarioConfig& scenario, const RunOptions& options = {});

} // namespace dockopt
