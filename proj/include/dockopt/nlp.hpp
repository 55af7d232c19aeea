#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace dockopt {

using SparseMat = Eigen::SparseMatrix<double>;

/// Generic sparse nonlinear program
///   minimize f(z)  s.t.  c_E(z) = 0,  c_I(z) ≥ 0,  lb ≤ z ≤ ub.
/// Jacobian callables fill a matrix whose pattern never changes between
/// evaluations (a superset of the true nonzero set).
struct NlpProblem {
    int num_vars = 0;
    int num_eq = 0;
    int num_ineq = 0;

    Eigen::VectorXd lower_bounds; ///< -inf for free components
    Eigen::VectorXd upper_bounds; ///< +inf for free components

    std::function<double(const Eigen::VectorXd&)> objective;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> objective_gradient;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> equality;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> inequality;
    std::function<SparseMat(const Eigen::VectorXd&)> equality_jacobian;
    std::function<SparseMat(const Eigen::VectorXd&)> inequality_jacobian;

    /// Lower triangle of σ∇²f + Σ λE_i·∇²cE_i + Σ λI_i·∇²cI_i (plain
    /// weighted sum; callers pass multiplier signs per their convention).
    /// Optional; when absent the built-in solver treats the curvature as
    /// zero and relies on its regularization (adequate only for
    /// nearly-linear problems).
    std::function<SparseMat(const Eigen::VectorXd&, double, const Eigen::VectorXd&,
                            const Eigen::VectorXd&)>
        lagrangian_hessian;

    /// Structural nonzeros (row, col) of the two Jacobians.
    std::vector<std::pair<int, int>> eq_jacobian_pattern;
    std::vector<std::pair<int, int>> ineq_jacobian_pattern;

    static double infinity() { return std::numeric_limits<double>::infinity(); }
};

struct SolverOptions {
    double kkt_tol = 1e-6;
    double feasibility_tol = 1e-8;
    int max_iterations = 3000;
    bool derivative_check = false; ///< run derivative_check at z0 and abort on failure
    double initial_barrier = 0.1;  ///< μ₀; reduced ×0.2 on inner convergence
    unsigned seed = 0;             ///< reserved for perturbation strategies
    bool verbose = false;
};

enum class SolveStatus { converged, max_iterations, infeasible, numerical_failure };

std::string to_string(SolveStatus s);

/// Multipliers of the KKT system: equalities (free sign), inequalities
/// (nonnegative) and the two bound sets.
struct Multipliers {
    Eigen::VectorXd eq;
    Eigen::VectorXd ineq;
    Eigen::VectorXd bound_lower;
    Eigen::VectorXd bound_upper;

    double max_abs() const;
};

/// The four ∞-norm residuals of approximate first-order optimality.
/// `stationarity` and `complementarity` are scaled by 1 + ‖multipliers‖∞.
struct KktResidual {
    double stationarity = 0.0;
    double feasibility_eq = 0.0;
    double feasibility_ineq = 0.0;
    double complementarity = 0.0;

    bool within(double kkt_tol, double feasibility_tol) const {
        return stationarity <= kkt_tol && feasibility_eq <= feasibility_tol &&
               feasibility_ineq <= feasibility_tol && complementarity <= kkt_tol;
    }
};

/// One accepted iteration of the solver trace: merit values are measured
/// with the penalty weight in effect for that step.
struct TraceEntry {
    int iteration = 0;
    double mu = 0.0;
    double merit_before = 0.0;
    double merit_after = 0.0;
    double objective = 0.0;
    double eq_violation = 0.0;
    double step_length = 0.0;
};

struct SolveReport {
    SolveStatus status = SolveStatus::numerical_failure;
    Eigen::VectorXd solution;
    Multipliers multipliers;
    double objective = 0.0;
    double max_eq_violation = 0.0;
    double min_ineq_margin = 0.0;
    KktResidual kkt;
    int iterations = 0;
    double wall_time_seconds = 0.0;
    double mu_final = 0.0;
    bool initial_point_clipped = false;
    int failing_constraint = -1; ///< index of the first non-finite constraint, if any
    std::string message;
    std::vector<TraceEntry> trace;

    bool converged() const { return status == SolveStatus::converged; }
};

/// Recompute the four KKT residual components of (z, multipliers) for the
/// problem from its callables alone.
KktResidual kkt_residual(const NlpProblem& p, const Eigen::VectorXd& z, const Multipliers& m);

struct DerivativeCheckResult {
    double max_relative_error = 0.0;
    int worst_row = -1; ///< -1 for the objective gradient
    int worst_col = -1;

    std::string location() const;
};

/// Compare the analytic first derivatives of the objective and all
/// constraints against central finite differences with per-component step
/// h·max(1, |z_i|). Returns the worst relative discrepancy and its location.
DerivativeCheckResult derivative_check(const NlpProblem& p, const Eigen::VectorXd& z,
                                       double h = 1e-6);

/// Solve the NLP with the built-in primal-dual interior-point method.
SolveReport solve(const NlpProblem& p, const Eigen::VectorXd& z0, const SolverOptions& opt = {});

/// Adapter seam: any NLP solver honoring the SolveReport contract can stand
/// in for the built-in method.
class NlpSolver {
public:
    virtual ~NlpSolver() = default;
    virtual SolveReport solve(const NlpProblem& p, const Eigen::VectorXd& z0,
                              const SolverOptions& opt) = 0;
};

/// The built-in interior-point solver behind the NlpSolver interface.
class InteriorPointSolver final : public NlpSolver {
public:
    SolveReport solve(const NlpProblem& p, const Eigen::VectorXd& z0,
                      const SolverOptions& opt) override;
};

} // namespace dockopt
