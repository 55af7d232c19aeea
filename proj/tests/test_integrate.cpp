#include "dockopt/dynamics.hpp"
#include "dockopt/integrate.hpp"

#include "support/test_helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace dockopt;

namespace {

OdeRhs20 zero_control_rhs(const BodyParams& params) {
    return [params](double, const State20& x) {
        return full_derivative_raw(x, Control6::Zero(), params);
    };
}

} // namespace

TEST_CASE("adaptive integrator reproduces the out-of-plane oscillator") {
    const BodyParams params = testing::benchmark_scenario().body_params();
    State20 x0 = State20::Zero();
    x0[2] = 1.0; // z
    x0[15] = 1.0;
    x0[19] = 1.0;

    const double t_end = M_PI / (2.0 * params.n);
    const State20 x = integrate_rk45(zero_control_rhs(params), x0, 0.0, t_end);
    CHECK(x[2] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(x[5] == doctest::Approx(-params.n).epsilon(1e-9));
}

TEST_CASE("adaptive integrator keeps a stable spin constant") {
    const ScenarioConfig cfg = testing::benchmark_scenario();
    const BodyParams params = cfg.body_params();
    const State20 x0 = cfg.initial_state().vec();
    const State20 x = integrate_rk45(zero_control_rhs(params), x0, 0.0, 400.0);
    CHECK(x[9] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(x[10] == doctest::Approx(3.0 * deg_per_s_to_rad).epsilon(1e-12));
    CHECK(x[11] == doctest::Approx(0.0).epsilon(1e-12));
    // The spun quaternion keeps unit norm.
    CHECK(x.segment<4>(idx::quat_t).norm() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("grid sampling matches single-shot integration") {
    const BodyParams params = testing::benchmark_scenario().body_params();
    State20 x0 = State20::Zero();
    x0[0] = 1.0;
    x0[4] = 0.01;
    x0[15] = 1.0;
    x0[19] = 1.0;
    const auto nodes = integrate_rk45_grid(zero_control_rhs(params), x0, 0.0, 200.0, 11);
    REQUIRE(nodes.size() == 11);
    const State20 direct = integrate_rk45(zero_control_rhs(params), x0, 0.0, 200.0);
    CHECK((nodes.back() - direct).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("trapezoidal propagator converges at second order") {
    const ScenarioConfig cfg = testing::benchmark_scenario();
    const BodyParams params = cfg.body_params();
    const State20 x0 = cfg.initial_state().vec();
    const auto rhs = zero_control_rhs(params);
    const auto jac = [params](double, const State20& x) {
        return full_derivative_state_jacobian(x, params);
    };

    IntegratorOptions opts;
    opts.rel_tol = 1e-12;
    opts.abs_tol = 1e-14;
    const State20 ref = integrate_rk45(rhs, x0, 0.0, 100.0, opts);

    const State20 coarse = integrate_trapezoidal(x0, 0.0, 100.0, 100, rhs, jac).back();
    const State20 fine = integrate_trapezoidal(x0, 0.0, 100.0, 200, rhs, jac).back();
    const double e_coarse = (coarse - ref).lpNorm<Eigen::Infinity>();
    const double e_fine = (fine - ref).lpNorm<Eigen::Infinity>();
    CHECK(e_coarse / e_fine == doctest::Approx(4.0).epsilon(0.125));
}

TEST_CASE("trapezoidal propagator against the reference integrator") {
    const ScenarioConfig cfg = testing::benchmark_scenario();
    const BodyParams params = cfg.body_params();
    State20 x0 = cfg.initial_state().vec();
    x0[3] = 0.01; // make the translational motion nontrivial
    const auto rhs = zero_control_rhs(params);
    const auto jac = [params](double, const State20& x) {
        return full_derivative_state_jacobian(x, params);
    };
    const State20 ref = integrate_rk45(rhs, x0, 0.0, 200.0);
    const State20 trap = integrate_trapezoidal(x0, 0.0, 200.0, 200, rhs, jac).back();
    // Second-order global error at dt = 1 s stays small on this horizon.
    CHECK((trap - ref).lpNorm<Eigen::Infinity>() <= 1e-3);
}

TEST_CASE("integrator argument validation") {
    const BodyParams params = testing::benchmark_scenario().body_params();
    const State20 x0 = State20::Zero();
    CHECK_THROWS_AS(integrate_rk45(zero_control_rhs(params), x0, 1.0, 0.0),
                    std::domain_error);
    CHECK_THROWS_AS(integrate_rk45_grid(zero_control_rhs(params), x0, 0.0, 1.0, 1),
                    std::domain_error);
}
