#include "dockopt/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dockopt {

namespace {

// Dormand–Prince 5(4) tableau (the ode45 pair), FSAL property.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;

constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// 4th-order embedded weights.
constexpr double e1 = 5179.0 / 57600.0, e3 = 7571.0 / 16695.0, e4 = 393.0 / 640.0,
                 e5 = -92097.0 / 339200.0, e6 = 187.0 / 2100.0, e7 = 1.0 / 40.0;

struct StepResult {
    State20 x;
    State20 k_last; // FSAL stage, the derivative at the new point
    double error_norm;
};

StepResult dp45_step(const OdeRhs20& rhs, double t, const State20& x, const State20& k1,
                     double h, double rel_tol, double abs_tol) {
    const State20 k2 = rhs(t + c2 * h, x + h * (a21 * k1));
    const State20 k3 = rhs(t + c3 * h, x + h * (a31 * k1 + a32 * k2));
    const State20 k4 = rhs(t + c4 * h, x + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const State20 k5 = rhs(t + c5 * h, x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const State20 k6 = rhs(t + h, x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));

    StepResult r;
    r.x = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    r.k_last = rhs(t + h, r.x);

    const State20 x4 =
        x + h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * r.k_last);

    double err = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double scale = abs_tol + rel_tol * std::max(std::abs(x[i]), std::abs(r.x[i]));
        const double e = (r.x[i] - x4[i]) / scale;
        err += e * e;
    }
    r.error_norm = std::sqrt(err / 20.0);
    return r;
}

} // namespace

State20 integrate_rk45(const OdeRhs20& rhs, const State20& x0, double t0, double t1,
                       const IntegratorOptions& opts) {
    if (t1 < t0) {
        throw std::domain_error("integrate_rk45: backward integration not supported");
    }
    if (t1 == t0) {
        return x0;
    }

    State20 x = x0;
    State20 k1 = rhs(t0, x);
    double t = t0;
    double h = std::min({opts.initial_step, opts.max_step, t1 - t0});
    long steps = 0;

    while (t < t1) {
        if (++steps > opts.max_steps) {
            throw std::runtime_error("integrate_rk45: step limit exceeded");
        }
        h = std::min(h, t1 - t);
        const StepResult r = dp45_step(rhs, t, x, k1, h, opts.rel_tol, opts.abs_tol);
        if (!r.x.allFinite()) {
            throw std::runtime_error("integrate_rk45: non-finite state encountered");
        }

        if (r.error_norm <= 1.0) {
            t += h;
            x = r.x;
            k1 = r.k_last;
        }
        // PI-free standard controller with safety factor.
        const double factor =
            (r.error_norm > 0.0) ? 0.9 * std::pow(r.error_norm, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
        h = std::min(h, opts.max_step);
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
            throw std::runtime_error("integrate_rk45: step size underflow");
        }
    }
    return x;
}

std::vector<State20> integrate_rk45_grid(const OdeRhs20& rhs, const State20& x0, double t0,
                                         double t1, int num_nodes,
                                         const IntegratorOptions& opts) {
    if (num_nodes < 2) {
        throw std::domain_error("integrate_rk45_grid: need at least two nodes");
    }
    std::vector<State20> nodes;
    nodes.reserve(static_cast<size_t>(num_nodes));
    nodes.push_back(x0);
    const double dt = (t1 - t0) / (num_nodes - 1);
    for (int k = 1; k < num_nodes; ++k) {
        nodes.push_back(integrate_rk45(rhs, nodes.back(), t0 + (k - 1) * dt, t0 + k * dt, opts));
    }
    return nodes;
}

std::vector<State20> integrate_trapezoidal(
    const State20& x0, double t0, double t1, int num_steps,
    const std::function<State20(double, const State20&)>& rhs,
    const std::function<Eigen::Matrix<double, 20, 20>(double, const State20&)>& rhs_jacobian,
    double newton_tol, int max_newton_iters) {
    if (num_steps < 1) {
        throw std::domain_error("integrate_trapezoidal: need at least one step");
    }
    const double dt = (t1 - t0) / num_steps;
    std::vector<State20> nodes;
    nodes.reserve(static_cast<size_t>(num_steps) + 1);
    nodes.push_back(x0);

    for (int k = 0; k < num_steps; ++k) {
        const double tk = t0 + k * dt;
        const State20& xk = nodes.back();
        const State20 fk = rhs(tk, xk);

        // Solve x⁺ − xk − dt/2 (f(xk) + f(x⁺)) = 0 by Newton iteration,
        // warm-started with the explicit Euler predictor.
        State20 xn = xk + dt * fk;
        bool converged = false;
        for (int it = 0; it < max_newton_iters; ++it) {
            const State20 res = xn - xk - 0.5 * dt * (fk + rhs(tk + dt, xn));
            if (res.lpNorm<Eigen::Infinity>() <= newton_tol) {
                converged = true;
                break;
            }
            Eigen::Matrix<double, 20, 20> jac =
                Eigen::Matrix<double, 20, 20>::Identity() - 0.5 * dt * rhs_jacobian(tk + dt, xn);
            xn -= jac.partialPivLu().solve(res);
        }
        if (!converged) {
            throw std::runtime_error("integrate_trapezoidal: Newton iteration failed to converge");
        }
        nodes.push_back(xn);
    }
    return nodes;
}

} // namespace dockopt
