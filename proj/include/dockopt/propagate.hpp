#pragma once

#include "dockopt/scenario.hpp"
#include "dockopt/trajectory.hpp"

namespace dockopt {

/// Propagation back-ends for open-loop runs: the closed-form relative-motion
/// solution (translational block only; attitude columns hold their initial
/// values), the adaptive reference integrator, or the fixed-step implicit
/// trapezoidal rule.
enum class PropagateMode { analytic_cw, reference_rk, trapezoidal };

PropagateMode propagate_mode_from_string(const std::string& name);

/// Propagate the scenario's initial state to t_end on a uniform grid of
/// n_intervals steps under a constant control (zero by default).
/// @throws std::domain_error for analytic_cw with a nonzero control.
SolutionTrajectory run_propagate(const ScenarioConfig& scenario, double t_end, int n_intervals,
                                 PropagateMode mode,
                                 const ControlVector6& constant_control = {});

} // namespace dockopt
