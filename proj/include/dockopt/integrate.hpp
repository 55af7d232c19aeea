#pragma once

#include "dockopt/types.hpp"

#include <functional>
#include <vector>

namespace dockopt {

/// Right-hand side signature for the 20-state system, f(t, x).
using OdeRhs20 = std::function<State20(double, const State20&)>;

struct IntegratorOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double initial_step = 1.0;
    double max_step = 1e6;
    long max_steps = 10'000'000;
};

/// Adaptive embedded Dormand–Prince 5(4) propagation of x from t0 to t1.
State20 integrate_rk45(const OdeRhs20& rhs, const State20& x0, double t0, double t1,
                       const IntegratorOptions& opts = {});

/// Dense sampling on a uniform grid of num_nodes points over [t0, t1]
/// (each node is reached by continuing the adaptive integration).
std::vector<State20> integrate_rk45_grid(const OdeRhs20& rhs, const State20& x0, double t0,
                                         double t1, int num_nodes,
                                         const IntegratorOptions& opts = {});

/// Fixed-step implicit trapezoidal propagation with num_steps intervals;
/// each step is solved by Newton iteration on the 20-dimensional residual.
/// Returns all num_steps+1 nodes.
std::vector<State20> integrate_trapezoidal(
    const State20& x0, double t0, double t1, int num_steps,
    const std::function<State20(double, const State20&)>& rhs,
    const std::function<Eigen::Matrix<double, 20, 20>(double, const State20&)>& rhs_jacobian,
    double newton_tol = 1e-13, int max_newton_iters = 50);

} // namespace dockopt
