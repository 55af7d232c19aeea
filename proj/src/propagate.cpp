#include "dockopt/propagate.hpp"

#include "dockopt/dynamics.hpp"
#include "dockopt/integrate.hpp"

#include <stdexcept>

namespace dockopt {

PropagateMode propagate_mode_from_string(const std::string& name) {
    if (name == "analytic-cw") return PropagateMode::analytic_cw;
    if (name == "reference-rk") return PropagateMode::reference_rk;
    if (name == "trapezoidal") return PropagateMode::trapezoidal;
    throw std::domain_error("unknown propagation mode: " + name);
}

SolutionTrajectory run_propagate(const ScenarioConfig& scenario, double t_end, int n_intervals,
                                 PropagateMode mode, const ControlVector6& constant_control) {
    scenario.validate();
    if (t_end <= 0.0 || n_intervals < 1) {
        throw std::domain_error("run_propagate: need t_end > 0 and at least one interval");
    }
    const BodyParams params = scenario.body_params();
    const State20 x0 = scenario.initial_state().vec();
    const Control6 u = constant_control.vec();

    std::vector<State20> states;
    switch (mode) {
    case PropagateMode::analytic_cw: {
        if (u.lpNorm<Eigen::Infinity>() != 0.0) {
            throw std::domain_error(
                "run_propagate: the analytic mode only covers the uncontrolled case");
        }
        states.reserve(static_cast<size_t>(n_intervals) + 1);
        for (int k = 0; k <= n_intervals; ++k) {
            const double t = t_end * k / n_intervals;
            State20 x = x0;
            const TranslationalState ts =
                cw_analytic(scenario.initial_relative, params.n, t);
            x.segment<6>(0) << ts.x, ts.y, ts.z, ts.vx, ts.vy, ts.vz;
            states.push_back(x);
        }
        break;
    }
    case PropagateMode::reference_rk: {
        const auto rhs = [&](double, const State20& x) {
            return full_derivative_raw(x, u, params);
        };
        states = integrate_rk45_grid(rhs, x0, 0.0, t_end, n_intervals + 1);
        break;
    }
    case PropagateMode::trapezoidal: {
        const auto rhs = [&](double, const State20& x) {
            return full_derivative_raw(x, u, params);
        };
        const auto jac = [&](double, const State20& x) {
            return full_derivative_state_jacobian(x, params);
        };
        states = integrate_trapezoidal(x0, 0.0, t_end, n_intervals, rhs, jac);
        break;
    }
    }

    std::vector<Control6> controls(states.size(), u);
    return build_trajectory(scenario, states, controls, t_end);
}

} // namespace dockopt
