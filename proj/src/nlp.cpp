#include "dockopt/nlp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dockopt {

std::string to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::converged: return "Converged";
    case SolveStatus::max_iterations: return "MaxIterations";
    case SolveStatus::infeasible: return "Infeasible";
    case SolveStatus::numerical_failure: return "NumericalFailure";
    }
    return "Unknown";
}

double Multipliers::max_abs() const {
    double m = 0.0;
    for (const Eigen::VectorXd* v : {&eq, &ineq, &bound_lower, &bound_upper}) {
        if (v->size() > 0) {
            m = std::max(m, v->lpNorm<Eigen::Infinity>());
        }
    }
    return m;
}

std::string DerivativeCheckResult::location() const {
    std::ostringstream os;
    if (worst_row < 0) {
        os << "objective gradient";
    } else {
        os << "constraint row " << worst_row;
    }
    os << ", variable " << worst_col;
    return os.str();
}

KktResidual kkt_residual(const NlpProblem& p, const Eigen::VectorXd& z, const Multipliers& m) {
    KktResidual r;

    const Eigen::VectorXd grad = p.objective_gradient(z);
    Eigen::VectorXd stat = grad;
    if (p.num_eq > 0) {
        stat -= p.equality_jacobian(z).transpose() * m.eq;
    }
    if (p.num_ineq > 0) {
        stat -= p.inequality_jacobian(z).transpose() * m.ineq;
    }
    if (m.bound_lower.size() == z.size()) {
        stat -= m.bound_lower;
    }
    if (m.bound_upper.size() == z.size()) {
        stat += m.bound_upper;
    }

    const double scale = 1.0 + m.max_abs();
    r.stationarity = stat.lpNorm<Eigen::Infinity>() / scale;

    if (p.num_eq > 0) {
        r.feasibility_eq = p.equality(z).lpNorm<Eigen::Infinity>();
    }

    double compl_max = 0.0;
    if (p.num_ineq > 0) {
        const Eigen::VectorXd ci = p.inequality(z);
        r.feasibility_ineq = std::max(0.0, -ci.minCoeff());
        for (int i = 0; i < p.num_ineq; ++i) {
            compl_max = std::max(compl_max, std::abs(m.ineq[i] * ci[i]));
            // Negative inequality multipliers count against complementarity.
            compl_max = std::max(compl_max, std::max(0.0, -m.ineq[i]));
        }
    }
    if (m.bound_lower.size() == z.size()) {
        for (int i = 0; i < z.size(); ++i) {
            if (std::isfinite(p.lower_bounds[i])) {
                compl_max =
                    std::max(compl_max, std::abs(m.bound_lower[i] * (z[i] - p.lower_bounds[i])));
            }
        }
    }
    if (m.bound_upper.size() == z.size()) {
        for (int i = 0; i < z.size(); ++i) {
            if (std::isfinite(p.upper_bounds[i])) {
                compl_max =
                    std::max(compl_max, std::abs(m.bound_upper[i] * (p.upper_bounds[i] - z[i])));
            }
        }
    }
    r.complementarity = compl_max / scale;
    return r;
}

DerivativeCheckResult derivative_check(const NlpProblem& p, const Eigen::VectorXd& z, double h) {
    DerivativeCheckResult out;

    const Eigen::VectorXd grad = p.objective_gradient(z);
    Eigen::MatrixXd eq_jac, ineq_jac;
    if (p.num_eq > 0) {
        eq_jac = Eigen::MatrixXd(p.equality_jacobian(z));
    }
    if (p.num_ineq > 0) {
        ineq_jac = Eigen::MatrixXd(p.inequality_jacobian(z));
    }

    auto update = [&out](double analytic, double fd, int row, int col) {
        const double denom = std::max({1.0, std::abs(analytic), std::abs(fd)});
        const double err = std::abs(analytic - fd) / denom;
        if (err > out.max_relative_error) {
            out.max_relative_error = err;
            out.worst_row = row;
            out.worst_col = col;
        }
    };

    Eigen::VectorXd zp = z;
    for (int i = 0; i < p.num_vars; ++i) {
        const double step = h * std::max(1.0, std::abs(z[i]));
        zp[i] = z[i] + step;
        const double f_plus = p.objective(zp);
        const Eigen::VectorXd eq_plus = p.num_eq > 0 ? p.equality(zp) : Eigen::VectorXd();
        const Eigen::VectorXd ineq_plus = p.num_ineq > 0 ? p.inequality(zp) : Eigen::VectorXd();
        zp[i] = z[i] - step;
        const double f_minus = p.objective(zp);
        const Eigen::VectorXd eq_minus = p.num_eq > 0 ? p.equality(zp) : Eigen::VectorXd();
        const Eigen::VectorXd ineq_minus = p.num_ineq > 0 ? p.inequality(zp) : Eigen::VectorXd();
        zp[i] = z[i];

        const double inv = 1.0 / (2.0 * step);
        update(grad[i], (f_plus - f_minus) * inv, -1, i);
        for (int r = 0; r < p.num_eq; ++r) {
            update(eq_jac(r, i), (eq_plus[r] - eq_minus[r]) * inv, r, i);
        }
        for (int r = 0; r < p.num_ineq; ++r) {
            update(ineq_jac(r, i), (ineq_plus[r] - ineq_minus[r]) * inv, p.num_eq + r, i);
        }
    }
    return out;
}

SolveReport InteriorPointSolver::solve(const NlpProblem& p, const Eigen::VectorXd& z0,
                                       const SolverOptions& opt) {
    return dockopt::solve(p, z0, opt);
}

} // namespace dockopt
