#include "dockopt/constraints.hpp"
#include "dockopt/dynamics.hpp"

#include "support/test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dockopt;

namespace {

DockingGeometry benchmark_geometry() {
    return {{0.0, 1.0, 0.0}, {0.0, -1.0, 0.0}, 1.0, 1.0};
}

} // namespace

TEST_CASE("docking position residual") {
    const DockingGeometry g = benchmark_geometry();

    SUBCASE("aligned attitudes at the docking offset") {
        StateVector20 s;
        s.trans = {0.0, -2.0, 0.0, 0, 0, 0};
        CHECK(docking_position_residual(s, g).norm() == doctest::Approx(0.0));
    }
    SUBCASE("zero relative position leaves the full offset") {
        StateVector20 s;
        const Vec3 r = docking_position_residual(s, g);
        CHECK(r[0] == doctest::Approx(0.0));
        CHECK(r[1] == doctest::Approx(-2.0).epsilon(1e-15));
        CHECK(r[2] == doctest::Approx(0.0));
    }
    SUBCASE("180-degree attitude flips the offset") {
        StateVector20 s;
        s.q_s = {0, 0, 1, 0};
        s.q_t = {0, 0, 1, 0};
        s.trans = {0.0, 2.0, 0.0, 0, 0, 0};
        CHECK(docking_position_residual(s, g).norm() <= 1e-14);
    }
    SUBCASE("non-unit quaternion rejected") {
        StateVector20 s;
        s.q_s = {0.3, 0, 0, 1.0};
        CHECK_THROWS_AS(docking_position_residual(s, g), std::domain_error);
    }
}

TEST_CASE("docking velocity residual") {
    const DockingGeometry g = benchmark_geometry();
    const double n = mean_motion(398e12, 7'071'000.0);

    SUBCASE("orbit-rate sweep at matched docking ports") {
        StateVector20 s;
        s.trans = {0.0, -2.0, 0.0, -2.0 * n, 0.0, 0.0};
        CHECK(docking_velocity_residual(s, g, n).norm() <= 1e-15);
    }
    SUBCASE("zero inertial rate, zero velocity") {
        StateVector20 s;
        s.w_s = {0.0, 0.0, n};
        s.trans = {0.0, -2.0, 0.0, 0.0, 0.0, 0.0};
        CHECK(docking_velocity_residual(s, g, n).norm() <= 1e-15);
    }
    SUBCASE("coincident docking points have no lever arm") {
        DockingGeometry g0 = g;
        g0.d_s = g0.d_t = Vec3{0.0, 0.5, 0.0};
        StateVector20 s;
        s.w_s = {0.01, -0.02, 0.005};
        CHECK(docking_velocity_residual(s, g0, n).norm() <= 1e-15);
    }
}

TEST_CASE("attitude match residual") {
    SUBCASE("matched state") {
        StateVector20 s;
        s.q_s = s.q_t = {0.1, 0.2, 0.3, std::sqrt(1.0 - 0.14)};
        s.w_s = s.w_t = {0.01, 0.02, 0.03};
        CHECK(attitude_match_residual(s).norm() == 0.0);
    }
    SUBCASE("componentwise subtraction") {
        StateVector20 s;
        s.q_s = {0, 0, 1, 0};
        s.q_t = {0, 0, 0, 1};
        const auto r = attitude_match_residual(s);
        CHECK(r[0] == 0.0);
        CHECK(r[1] == 0.0);
        CHECK(r[2] == -1.0);
        CHECK(r[3] == 1.0);
        CHECK(r.tail<3>().norm() == 0.0);
    }
    SUBCASE("target spin mismatch") {
        StateVector20 s;
        s.w_t = {0.0, 0.052359, 0.0};
        const auto r = attitude_match_residual(s);
        CHECK(r.head<4>().norm() == 0.0);
        CHECK(r[5] == doctest::Approx(0.052359).epsilon(1e-15));
    }
}

TEST_CASE("collision margin") {
    const DockingGeometry g = benchmark_geometry();
    StateVector20 s;

    s.trans = {0, 3, 0, 0, 0, 0};
    CHECK(collision_margin(s, g) == doctest::Approx(5.0).epsilon(1e-15));
    s.trans = {0, 2, 0, 0, 0, 0};
    CHECK(collision_margin(s, g) == doctest::Approx(0.0));
    s.trans = {1, 1, 1, 0, 0, 0};
    CHECK(collision_margin(s, g) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("thrust margin") {
    ControlBounds b;
    b.u_max = 0.15;

    CHECK(thrust_margin({}, b) == doctest::Approx(0.15).epsilon(1e-15));

    ControlVector6 c;
    c.ux = std::sqrt(0.15);
    CHECK(thrust_margin(c, b) == doctest::Approx(0.0).epsilon(1e-12));

    c.ux = 0.3;
    CHECK(thrust_margin(c, b) == doctest::Approx(0.06).epsilon(1e-15));

    b.thrust_mode = ThrustBoundMode::squared;
    CHECK(thrust_margin(c, b) == doctest::Approx(0.15 * 0.15 - 0.09).epsilon(1e-12));
}

TEST_CASE("running cost") {
    const CostWeights w{1.0, 1.0, 1.0};
    CHECK(running_cost({}, w) == 0.0);

    ControlVector6 c;
    c.ux = c.uy = c.uz = 1.0;
    CHECK(running_cost(c, w) == doctest::Approx(3.0).epsilon(1e-15));

    SUBCASE("frame invariance of the thrust norm") {
        std::mt19937_64 rng(31);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            ControlVector6 cc{dist(rng), dist(rng), dist(rng),
                              dist(rng), dist(rng), dist(rng)};
            const Vec3 u_body =
                rotation_matrix(testing::random_unit_quaternion(rng), 1e-9) * cc.thrust();
            ControlVector6 rotated = cc;
            rotated.ux = u_body[0];
            rotated.uy = u_body[1];
            rotated.uz = u_body[2];
            CHECK(running_cost(rotated, w) == doctest::Approx(running_cost(cc, w)).epsilon(1e-12));
        }
    }
}

TEST_CASE("total cost") {
    const CostWeights w{1.0, 1.0, 1.0};

    SUBCASE("coasting") {
        std::vector<double> t{0.0, 50.0, 100.0};
        std::vector<Control6> u(3, Control6::Zero());
        const CostBreakdown c = total_cost(t, u, w);
        CHECK(c.j == doctest::Approx(100.0).epsilon(1e-15));
        CHECK(c.u_total == 0.0);
        CHECK(c.m_total == 0.0);
    }
    SUBCASE("unit thrust Riemann sum") {
        const int n = 25;
        const double t_f = 180.0;
        std::vector<double> t;
        std::vector<Control6> u;
        for (int k = 0; k <= n; ++k) {
            t.push_back(t_f * k / n);
            Control6 c = Control6::Zero();
            c[0] = 1.0;
            u.push_back(c);
        }
        const CostBreakdown c = total_cost(t, u, w);
        CHECK(c.u_total == doctest::Approx(t_f).epsilon(1e-12));
        CHECK(c.m_total == 0.0);
        CHECK(c.j == doctest::Approx(t_f + t_f).epsilon(1e-12));
    }
    SUBCASE("non-uniform grid rejected") {
        std::vector<double> t{0.0, 1.0, 3.0};
        std::vector<Control6> u(3, Control6::Zero());
        CHECK_THROWS_AS(total_cost(t, u, w), std::domain_error);
    }
    SUBCASE("monotone in each weight") {
        std::mt19937_64 rng(37);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        std::vector<double> t;
        std::vector<Control6> u;
        for (int k = 0; k <= 10; ++k) {
            t.push_back(10.0 * k);
            Control6 c;
            for (int i = 0; i < 6; ++i) c[i] = dist(rng);
            u.push_back(c);
        }
        const double base = total_cost(t, u, {1, 1, 1}).j;
        CHECK(total_cost(t, u, {2, 1, 1}).j >= base);
        CHECK(total_cost(t, u, {1, 2, 1}).j >= base);
        CHECK(total_cost(t, u, {1, 1, 2}).j >= base);
    }
}

TEST_CASE("terminal consistency: matched docking touches the safety spheres") {
    const DockingGeometry g = benchmark_geometry();
    std::mt19937_64 rng(41);

    const Quaternion q = testing::random_unit_quaternion(rng);
    StateVector20 s;
    s.q_s = s.q_t = q;
    const Vec3 p = rotation_matrix(q, 1e-9).transpose() * (g.d_t - g.d_s);
    s.trans.x = p[0];
    s.trans.y = p[1];
    s.trans.z = p[2];

    CHECK(docking_position_residual(s, g).norm() <= 1e-12);
    CHECK(attitude_match_residual(s).norm() == 0.0);
    CHECK(s.trans.position().norm() == doctest::Approx((g.d_t - g.d_s).norm()).epsilon(1e-12));
    CHECK(collision_margin(s, g) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("docking residual derivatives match finite differences") {
    const DockingGeometry g = benchmark_geometry();
    const double n = mean_motion(398e12, 7'071'000.0);
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);

    State20 x;
    for (int i = 0; i < 20; ++i) x[i] = dist(rng);
    // Keep the quaternion away from zero so the residuals stay generic.
    x.segment<4>(idx::quat_s) += Vec4{0, 0, 0, 1.0};

    const auto jac_pos = docking_position_state_jacobian(x, g);
    const auto jac_vel = docking_velocity_state_jacobian(x, g, n);
    for (int j = 0; j < 20; ++j) {
        for (int i = 0; i < 3; ++i) {
            const double fd_pos = testing::central_diff(
                [&](double v) {
                    State20 xx = x;
                    xx[j] = v;
                    return docking_position_residual_raw(xx, g)[i];
                },
                x[j]);
            CHECK(jac_pos(i, j) == doctest::Approx(fd_pos).epsilon(1e-6));
            const double fd_vel = testing::central_diff(
                [&](double v) {
                    State20 xx = x;
                    xx[j] = v;
                    return docking_velocity_residual_raw(xx, g, n)[i];
                },
                x[j]);
            CHECK(jac_vel(i, j) == doctest::Approx(fd_vel).epsilon(1e-6));
        }
    }

    // Hessian contractions against finite differences of the analytic
    // jacobians.
    const Vec3 lam{dist(rng), dist(rng), dist(rng)};
    const auto h_pos = docking_position_hessian_contraction(lam, g);
    const auto h_vel = docking_velocity_hessian_contraction(x, lam, g, n);
    for (int j = 0; j < 20; ++j) {
        const double hstep = 1e-6;
        State20 xp = x, xm = x;
        xp[j] += hstep;
        xm[j] -= hstep;
        const Eigen::Matrix<double, 1, 20> fd_pos =
            (lam.transpose() * (docking_position_state_jacobian(xp, g) -
                                docking_position_state_jacobian(xm, g))) /
            (2.0 * hstep);
        const Eigen::Matrix<double, 1, 20> fd_vel =
            (lam.transpose() * (docking_velocity_state_jacobian(xp, g, n) -
                                docking_velocity_state_jacobian(xm, g, n))) /
            (2.0 * hstep);
        for (int i = 0; i < 20; ++i) {
            CHECK(h_pos(i, j) == doctest::Approx(fd_pos[i]).epsilon(1e-5));
            CHECK(h_vel(i, j) == doctest::Approx(fd_vel[i]).epsilon(1e-5));
        }
    }
}

TEST_CASE("docking geometry feasibility") {
    CHECK(benchmark_geometry().valid());
    CHECK(DockingGeometry{{0, 1, 0}, {0, -1, 0}, 0.5, 0.5}.valid());
    CHECK_FALSE(DockingGeometry{{0, 0, 0}, {0, 0, 0}, 1.0, 1.0}.valid());
    CHECK_FALSE(DockingGeometry{{0, 1, 0}, {0, -1, 0}, 1.5, 1.0}.valid());
}
