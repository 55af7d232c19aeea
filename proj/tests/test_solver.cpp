#include "dockopt/nlp.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace dockopt;

namespace {

SparseMat dense_to_sparse(const Eigen::MatrixXd& m) {
    SparseMat s(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            trips.emplace_back(i, j, m(i, j));
        }
    }
    s.setFromTriplets(trips.begin(), trips.end());
    return s;
}

/// min z^2 s.t. z >= 1 as a general inequality.
NlpProblem bound_toy() {
    NlpProblem p;
    p.num_vars = 1;
    p.num_eq = 0;
    p.num_ineq = 1;
    p.lower_bounds = Eigen::VectorXd::Constant(1, -NlpProblem::infinity());
    p.upper_bounds = Eigen::VectorXd::Constant(1, NlpProblem::infinity());
    p.objective = [](const Eigen::VectorXd& z) { return z[0] * z[0]; };
    p.objective_gradient = [](const Eigen::VectorXd& z) {
        return Eigen::VectorXd::Constant(1, 2.0 * z[0]);
    };
    p.equality = [](const Eigen::VectorXd&) { return Eigen::VectorXd(); };
    p.inequality = [](const Eigen::VectorXd& z) {
        return Eigen::VectorXd::Constant(1, z[0] - 1.0);
    };
    p.equality_jacobian = [](const Eigen::VectorXd&) { return SparseMat(0, 1); };
    p.inequality_jacobian = [](const Eigen::VectorXd&) {
        return dense_to_sparse(Eigen::MatrixXd::Constant(1, 1, 1.0));
    };
    p.lagrangian_hessian = [](const Eigen::VectorXd&, double sigma, const Eigen::VectorXd&,
                              const Eigen::VectorXd&) {
        return dense_to_sparse(Eigen::MatrixXd::Constant(1, 1, 2.0 * sigma));
    };
    p.ineq_jacobian_pattern = {{0, 0}};
    return p;
}

/// min (z1-1)^2 + (z2-2)^2 s.t. z1 + z2 = 1; optimum (0, 1).
NlpProblem equality_toy() {
    NlpProblem p;
    p.num_vars = 2;
    p.num_eq = 1;
    p.num_ineq = 0;
    p.lower_bounds = Eigen::VectorXd::Constant(2, -NlpProblem::infinity());
    p.upper_bounds = Eigen::VectorXd::Constant(2, NlpProblem::infinity());
    p.objective = [](const Eigen::VectorXd& z) {
        return (z[0] - 1.0) * (z[0] - 1.0) + (z[1] - 2.0) * (z[1] - 2.0);
    };
    p.objective_gradient = [](const Eigen::VectorXd& z) {
        Eigen::VectorXd g(2);
        g << 2.0 * (z[0] - 1.0), 2.0 * (z[1] - 2.0);
        return g;
    };
    p.equality = [](const Eigen::VectorXd& z) {
        return Eigen::VectorXd::Constant(1, z[0] + z[1] - 1.0);
    };
    p.inequality = [](const Eigen::VectorXd&) { return Eigen::VectorXd(); };
    p.equality_jacobian = [](const Eigen::VectorXd&) {
        return dense_to_sparse(Eigen::MatrixXd::Constant(1, 2, 1.0));
    };
    p.inequality_jacobian = [](const Eigen::VectorXd&) { return SparseMat(0, 2); };
    p.lagrangian_hessian = [](const Eigen::VectorXd&, double sigma, const Eigen::VectorXd&,
                              const Eigen::VectorXd&) {
        return dense_to_sparse(2.0 * sigma * Eigen::MatrixXd::Identity(2, 2));
    };
    p.eq_jacobian_pattern = {{0, 0}, {0, 1}};
    return p;
}

/// min (z-3)^2 with z <= 2 as a variable bound.
NlpProblem upper_bound_toy() {
    NlpProblem p;
    p.num_vars = 1;
    p.num_eq = 0;
    p.num_ineq = 0;
    p.lower_bounds = Eigen::VectorXd::Constant(1, -NlpProblem::infinity());
    p.upper_bounds = Eigen::VectorXd::Constant(1, 2.0);
    p.objective = [](const Eigen::VectorXd& z) { return (z[0] - 3.0) * (z[0] - 3.0); };
    p.objective_gradient = [](const Eigen::VectorXd& z) {
        return Eigen::VectorXd::Constant(1, 2.0 * (z[0] - 3.0));
    };
    p.equality = [](const Eigen::VectorXd&) { return Eigen::VectorXd(); };
    p.inequality = [](const Eigen::VectorXd&) { return Eigen::VectorXd(); };
    p.equality_jacobian = [](const Eigen::VectorXd&) { return SparseMat(0, 1); };
    p.inequality_jacobian = [](const Eigen::VectorXd&) { return SparseMat(0, 1); };
    p.lagrangian_hessian = [](const Eigen::VectorXd&, double sigma, const Eigen::VectorXd&,
                              const Eigen::VectorXd&) {
        return dense_to_sparse(Eigen::MatrixXd::Constant(1, 1, 2.0 * sigma));
    };
    return p;
}

NlpProblem rosenbrock() {
    NlpProblem p;
    p.num_vars = 2;
    p.num_eq = 0;
    p.num_ineq = 0;
    p.lower_bounds = Eigen::VectorXd::Constant(2, -NlpProblem::infinity());
    p.upper_bounds = Eigen::VectorXd::Constant(2, NlpProblem::infinity());
    p.objective = [](const Eigen::VectorXd& z) {
        const double a = 1.0 - z[0];
        const double b = z[1] - z[0] * z[0];
        return a * a + 100.0 * b * b;
    };
    p.objective_gradient = [](const Eigen::VectorXd& z) {
        const double b = z[1] - z[0] * z[0];
        Eigen::VectorXd g(2);
        g << -2.0 * (1.0 - z[0]) - 400.0 * z[0] * b, 200.0 * b;
        return g;
    };
    p.equality = [](const Eigen::VectorXd&) { return Eigen::VectorXd(); };
    p.inequality = [](const Eigen::VectorXd&) { return Eigen::VectorXd(); };
    p.equality_jacobian = [](const Eigen::VectorXd&) { return SparseMat(0, 2); };
    p.inequality_jacobian = [](const Eigen::VectorXd&) { return SparseMat(0, 2); };
    p.lagrangian_hessian = [](const Eigen::VectorXd& z, double sigma, const Eigen::VectorXd&,
                              const Eigen::VectorXd&) {
        Eigen::MatrixXd h(2, 2);
        h(0, 0) = sigma * (2.0 - 400.0 * (z[1] - 3.0 * z[0] * z[0]));
        h(1, 0) = sigma * (-400.0 * z[0]);
        h(0, 1) = 0.0; // lower triangle only
        h(1, 1) = sigma * 200.0;
        return dense_to_sparse(h);
    };
    return p;
}

} // namespace

TEST_CASE("toy: active inequality") {
    const NlpProblem p = bound_toy();
    SolverOptions opts;
    opts.kkt_tol = 1e-10;
    opts.feasibility_tol = 1e-10;
    const SolveReport rep = solve(p, Eigen::VectorXd::Constant(1, 5.0), opts);

    REQUIRE(rep.converged());
    CHECK(std::abs(rep.solution[0] - 1.0) <= 1e-8);
    CHECK(std::abs(rep.objective - 1.0) <= 1e-8);
    CHECK(rep.multipliers.ineq[0] == doctest::Approx(2.0).epsilon(1e-6));

    // Replay through the independent residual evaluation.
    const KktResidual replay = kkt_residual(p, rep.solution, rep.multipliers);
    CHECK(replay.within(opts.kkt_tol, opts.feasibility_tol));
}

TEST_CASE("toy: equality-constrained quadratic") {
    const NlpProblem p = equality_toy();
    SolverOptions opts;
    opts.kkt_tol = 1e-10;
    opts.feasibility_tol = 1e-12;
    Eigen::VectorXd z0(2);
    z0 << 4.0, -3.0;
    const SolveReport rep = solve(p, z0, opts);

    REQUIRE(rep.converged());
    CHECK(std::abs(rep.solution[0] - 0.0) <= 1e-8);
    CHECK(std::abs(rep.solution[1] - 1.0) <= 1e-8);
    CHECK(std::abs(rep.objective - 2.0) <= 1e-8);
    CHECK(rep.max_eq_violation <= 1e-10);

    SUBCASE("merit trace is monotone over accepted steps") {
        for (const TraceEntry& t : rep.trace) {
            CHECK(t.merit_after <= t.merit_before + 1e-12 * std::abs(t.merit_before));
        }
    }
}

TEST_CASE("toy: active upper bound") {
    const NlpProblem p = upper_bound_toy();
    SolverOptions opts;
    opts.kkt_tol = 1e-10;
    const SolveReport rep = solve(p, Eigen::VectorXd::Constant(1, 0.0), opts);
    REQUIRE(rep.converged());
    CHECK(std::abs(rep.solution[0] - 2.0) <= 1e-8);
    CHECK(rep.multipliers.bound_upper[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(rep.solution[0] <= 2.0);
}

TEST_CASE("rosenbrock valley") {
    const NlpProblem p = rosenbrock();
    SolverOptions opts;
    opts.kkt_tol = 1e-10;
    Eigen::VectorXd z0(2);
    z0 << -1.2, 1.0;
    const SolveReport rep = solve(p, z0, opts);
    REQUIRE(rep.converged());
    CHECK(std::abs(rep.solution[0] - 1.0) <= 1e-6);
    CHECK(std::abs(rep.solution[1] - 1.0) <= 1e-6);
}

TEST_CASE("initial point outside the bounds is clipped with a warning") {
    const NlpProblem p = upper_bound_toy();
    const SolveReport rep = solve(p, Eigen::VectorXd::Constant(1, 10.0), SolverOptions{});
    CHECK(rep.initial_point_clipped);
    CHECK(rep.converged());
}

TEST_CASE("inconsistent equalities are reported as infeasible or stalled") {
    NlpProblem p;
    p.num_vars = 1;
    p.num_eq = 2;
    p.num_ineq = 0;
    p.lower_bounds = Eigen::VectorXd::Constant(1, -NlpProblem::infinity());
    p.upper_bounds = Eigen::VectorXd::Constant(1, NlpProblem::infinity());
    p.objective = [](const Eigen::VectorXd& z) { return z[0] * z[0]; };
    p.objective_gradient = [](const Eigen::VectorXd& z) {
        return Eigen::VectorXd::Constant(1, 2.0 * z[0]);
    };
    p.equality = [](const Eigen::VectorXd& z) {
        Eigen::VectorXd c(2);
        c << z[0] - 1.0, z[0] - 2.0;
        return c;
    };
    p.inequality = [](const Eigen::VectorXd&) { return Eigen::VectorXd(); };
    p.equality_jacobian = [](const Eigen::VectorXd&) {
        return dense_to_sparse(Eigen::MatrixXd::Constant(2, 1, 1.0));
    };
    p.inequality_jacobian = [](const Eigen::VectorXd&) { return SparseMat(0, 1); };
    p.lagrangian_hessian = [](const Eigen::VectorXd&, double sigma, const Eigen::VectorXd&,
                              const Eigen::VectorXd&) {
        return dense_to_sparse(Eigen::MatrixXd::Constant(1, 1, 2.0 * sigma));
    };

    SolverOptions opts;
    opts.max_iterations = 300;
    const SolveReport rep = solve(p, Eigen::VectorXd::Zero(1), opts);
    CHECK_FALSE(rep.converged());
    CHECK(rep.max_eq_violation >= 0.4);
}

TEST_CASE("non-finite evaluation yields NumericalFailure") {
    NlpProblem p = equality_toy();
    p.equality = [](const Eigen::VectorXd&) {
        return Eigen::VectorXd::Constant(1, std::numeric_limits<double>::quiet_NaN());
    };
    const SolveReport rep = solve(p, Eigen::VectorXd::Zero(2), SolverOptions{});
    CHECK(rep.status == SolveStatus::numerical_failure);
    CHECK(rep.failing_constraint == 0);
}

TEST_CASE("kkt residual components") {
    SUBCASE("unconstrained quadratic at its minimizer") {
        NlpProblem p = upper_bound_toy();
        p.upper_bounds[0] = NlpProblem::infinity();
        Multipliers m;
        m.eq = Eigen::VectorXd();
        m.ineq = Eigen::VectorXd();
        m.bound_lower = Eigen::VectorXd::Zero(1);
        m.bound_upper = Eigen::VectorXd::Zero(1);
        const KktResidual r = kkt_residual(p, Eigen::VectorXd::Constant(1, 3.0), m);
        CHECK(r.stationarity == 0.0);
        CHECK(r.feasibility_eq == 0.0);
        CHECK(r.feasibility_ineq == 0.0);
        CHECK(r.complementarity == 0.0);
    }
    SUBCASE("hand-solved active inequality") {
        const NlpProblem p = bound_toy();
        Multipliers m;
        m.ineq = Eigen::VectorXd::Constant(1, 2.0);
        m.bound_lower = Eigen::VectorXd::Zero(1);
        m.bound_upper = Eigen::VectorXd::Zero(1);
        const KktResidual r = kkt_residual(p, Eigen::VectorXd::Constant(1, 1.0), m);
        CHECK(r.stationarity <= 1e-15);
        CHECK(r.complementarity <= 1e-15);
    }
    SUBCASE("equality violation is returned verbatim") {
        const NlpProblem p = equality_toy();
        Multipliers m;
        m.eq = Eigen::VectorXd::Zero(1);
        m.bound_lower = Eigen::VectorXd::Zero(2);
        m.bound_upper = Eigen::VectorXd::Zero(2);
        Eigen::VectorXd z(2);
        z << 2.0, 1.5; // violation 2.5
        const KktResidual r = kkt_residual(p, z, m);
        CHECK(r.feasibility_eq == doctest::Approx(2.5).epsilon(1e-15));
    }
}

TEST_CASE("derivative check") {
    SUBCASE("clean quadratic") {
        const NlpProblem p = equality_toy();
        Eigen::VectorXd z(2);
        z << 0.3, -0.7;
        const DerivativeCheckResult r = derivative_check(p, z);
        CHECK(r.max_relative_error <= 1e-9);
    }
    SUBCASE("sign corruption is localized") {
        NlpProblem p = equality_toy();
        p.objective_gradient = [](const Eigen::VectorXd& z) {
            Eigen::VectorXd g(2);
            g << 2.0 * (z[0] - 1.0), -2.0 * (z[1] - 2.0); // flipped second entry
            return g;
        };
        Eigen::VectorXd z(2);
        z << 0.0, 0.0;
        const DerivativeCheckResult r = derivative_check(p, z);
        CHECK(r.max_relative_error == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(r.worst_row == -1);
        CHECK(r.worst_col == 1);
    }
}

TEST_CASE("solver interface adapter") {
    InteriorPointSolver ip;
    SolverOptions opts;
    opts.kkt_tol = 1e-10;
    NlpSolver& generic = ip;
    const SolveReport rep = generic.solve(equality_toy(), Eigen::VectorXd::Zero(2), opts);
    CHECK(rep.converged());
    CHECK(std::abs(rep.solution[1] - 1.0) <= 1e-8);
}
