#include "dockopt/csv_io.hpp"
#include "dockopt/propagate.hpp"
#include "dockopt/scenario.hpp"
#include "dockopt/trajectory.hpp"

#include "support/test_helpers.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace dockopt;

namespace {

const std::string kScenarioPath = std::string(DOCKOPT_SCENARIO_DIR) + "/flyaround.scenario";

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

SolutionTrajectory random_trajectory(unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const ScenarioConfig cfg = testing::benchmark_scenario();

    std::vector<State20> states;
    std::vector<Control6> controls;
    for (int k = 0; k <= 20; ++k) {
        State20 x;
        for (int i = 0; i < 20; ++i) x[i] = dist(rng);
        x.segment<4>(idx::quat_s).normalize();
        x.segment<4>(idx::quat_t).normalize();
        states.push_back(x);
        Control6 c;
        for (int i = 0; i < 6; ++i) c[i] = dist(rng);
        controls.push_back(c);
    }
    return build_trajectory(cfg, states, controls, 123.456789);
}

} // namespace

TEST_CASE("shipped flyaround scenario carries the benchmark constants") {
    const ScenarioConfig cfg = load_scenario(kScenarioPath);
    CHECK(cfg.gm == 398e12);
    CHECK(cfg.orbit_radius == 7'071'000.0);
    CHECK(cfg.servicer_mass == 200.0);
    CHECK(cfg.bounds.u_max == 0.15);
    CHECK(cfg.bounds.m_max == 1.0);
    CHECK(cfg.servicer.inertia.jxx == 2000.0);
    CHECK(cfg.servicer.inertia.jyy == 5000.0);
    CHECK(cfg.servicer.inertia.jzz == 2000.0);
    CHECK(cfg.target.inertia.jxx == 1000.0);
    CHECK(cfg.target.inertia.jyy == 2000.0);
    CHECK(cfg.target.inertia.jzz == 1000.0);
    CHECK(cfg.servicer.docking_point == Vec3{0.0, 1.0, 0.0});
    CHECK(cfg.target.docking_point == Vec3{0.0, -1.0, 0.0});
    CHECK(cfg.servicer.safety_radius == 1.0);
    CHECK(cfg.target.safety_radius == 1.0);
    CHECK(cfg.steps == 370);
    CHECK(cfg.servicer.q0.q3 == 1.0);
    CHECK(cfg.target.q0.q4 == 1.0);
    CHECK(cfg.target.omega0.wy == doctest::Approx(0.052359).epsilon(1e-12));
    CHECK(cfg.initial_relative.y == 3.0);
    CHECK(cfg.weights.l_tf == 1.0);
    CHECK(cfg.mean_motion_value() == doctest::Approx(1.0610e-3).epsilon(1e-4));
}

TEST_CASE("scenario validation") {
    ScenarioConfig cfg = testing::benchmark_scenario();
    CHECK_NOTHROW(cfg.validate());

    SUBCASE("smaller safety radii stay feasible") {
        cfg.servicer.safety_radius = 0.5;
        cfg.target.safety_radius = 0.5;
        CHECK_NOTHROW(cfg.validate());
    }
    SUBCASE("coincident docking points are rejected") {
        cfg.servicer.docking_point = Vec3::Zero();
        cfg.target.docking_point = Vec3::Zero();
        CHECK_THROWS_AS(cfg.validate(), ScenarioError);
    }
    SUBCASE("nonpositive mass is rejected") {
        cfg.servicer_mass = 0.0;
        CHECK_THROWS_AS(cfg.validate(), ScenarioError);
    }
    SUBCASE("nonpositive inertia is rejected") {
        cfg.target.inertia = {1.0, -1.0, 5.0};
        CHECK_THROWS_AS(cfg.validate(), ScenarioError);
    }
    SUBCASE("idealized benchmark inertia is accepted despite the triangle check") {
        CHECK_FALSE(cfg.servicer.inertia.satisfies_triangle_inequalities());
        CHECK(cfg.target.inertia.satisfies_triangle_inequalities());
        CHECK_NOTHROW(cfg.validate());
    }
    SUBCASE("all-zero weights are rejected") {
        cfg.weights = {0.0, 0.0, 0.0};
        CHECK_THROWS_AS(cfg.validate(), ScenarioError);
    }
}

TEST_CASE("scenario parse errors name the field") {
    CHECK_THROWS_WITH_AS(parse_scenario("{}"), doctest::Contains("orbit"), ScenarioError);
    CHECK_THROWS_WITH_AS(parse_scenario("{ not json"), doctest::Contains("parse error"),
                         ScenarioError);

    std::string text = R"({"orbit": {"gm_m3_per_s2": 1.0}})";
    CHECK_THROWS_WITH_AS(parse_scenario(text), doctest::Contains("radius_m"), ScenarioError);
}

TEST_CASE("scenario hash is stable and sensitive") {
    const ScenarioConfig a = testing::benchmark_scenario();
    ScenarioConfig b = a;
    CHECK(a.hash() == b.hash());
    b.servicer_mass = 201.0;
    CHECK(a.hash() != b.hash());
}

TEST_CASE("trajectory CSV round trip is exact") {
    const SolutionTrajectory traj = random_trajectory(55);
    const auto path = temp_file("dockopt_roundtrip.csv");
    export_trajectory(traj, path.string());
    const SolutionTrajectory back = import_trajectory(path.string());

    REQUIRE(back.states.size() == traj.states.size());
    for (size_t k = 0; k < traj.states.size(); ++k) {
        CHECK(back.time[k] == traj.time[k]);
        CHECK(back.states[k].vec() == traj.states[k].vec());
        CHECK(back.controls[k].vec() == traj.controls[k].vec());
        CHECK(back.thrust_body[k] == traj.thrust_body[k]);
        CHECK(back.collision_margins[k] == traj.collision_margins[k]);
        CHECK(back.euler_s[k].phi == traj.euler_s[k].phi);
        CHECK(back.euler_t[k].psi == traj.euler_t[k].psi);
    }
    CHECK(back.t_f == traj.t_f);
    std::filesystem::remove(path);
}

TEST_CASE("export is deterministic and atomic") {
    const SolutionTrajectory traj = random_trajectory(77);
    const auto p1 = temp_file("dockopt_det1.csv");
    const auto p2 = temp_file("dockopt_det2.csv");
    export_trajectory(traj, p1.string());
    export_trajectory(traj, p2.string());

    std::ifstream f1(p1), f2(p2);
    const std::string s1((std::istreambuf_iterator<char>(f1)), {});
    const std::string s2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(s1 == s2);
    CHECK_FALSE(std::filesystem::exists(p1.string() + ".tmp"));
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}

TEST_CASE("report recomputes the cost identity") {
    const SolutionTrajectory traj = random_trajectory(99);
    const CostWeights w{1.0, 1.0, 1.0};
    const CostBreakdown c = total_cost(traj, w);
    CHECK(traj.cost.j ==
          doctest::Approx(w.l_tf * traj.t_f + w.l_u * c.u_total + w.l_m * c.m_total)
              .epsilon(1e-12));
    const std::string report = format_report(traj);
    CHECK(report.find("t_f") != std::string::npos);
    CHECK(report.find("u_total") != std::string::npos);
}

TEST_CASE("euler yxz round trip") {
    std::mt19937_64 rng(111);
    for (int trial = 0; trial < 200; ++trial) {
        const Quaternion q = testing::random_unit_quaternion(rng);
        const EulerYxz e = euler_yxz_from_quaternion(q);
        const Quaternion back = quaternion_from_euler_yxz(e.phi, e.theta, e.psi);
        const double direct = (back.vec() - q.vec()).norm();
        const double flipped = (back.vec() + q.vec()).norm();
        CHECK(std::min(direct, flipped) <= 1e-9);
    }
}

TEST_CASE("euler yxz on the pure target spin") {
    const double angle = 0.7;
    const Quaternion q{0.0, std::sin(angle / 2.0), 0.0, std::cos(angle / 2.0)};
    const EulerYxz e = euler_yxz_from_quaternion(q);
    CHECK(e.phi == doctest::Approx(angle).epsilon(1e-12));
    CHECK(e.theta == doctest::Approx(0.0));
    CHECK(e.psi == doctest::Approx(0.0));
    CHECK_FALSE(e.gimbal_degenerate);
}

TEST_CASE("euler yxz gimbal degeneracy flag") {
    // theta = 90 degrees about x.
    const Quaternion q{std::sin(M_PI / 4.0), 0.0, 0.0, std::cos(M_PI / 4.0)};
    const EulerYxz e = euler_yxz_from_quaternion(q);
    CHECK(e.gimbal_degenerate);
    CHECK(e.psi == 0.0);
    const Quaternion back = quaternion_from_euler_yxz(e.phi, e.theta, e.psi);
    const double direct = (back.vec() - q.vec()).norm();
    const double flipped = (back.vec() + q.vec()).norm();
    CHECK(std::min(direct, flipped) <= 1e-9);
}

TEST_CASE("propagation modes agree on the translational block") {
    const ScenarioConfig cfg = load_scenario(kScenarioPath);

    const SolutionTrajectory analytic =
        run_propagate(cfg, 400.0, 40, PropagateMode::analytic_cw);
    const SolutionTrajectory reference =
        run_propagate(cfg, 400.0, 40, PropagateMode::reference_rk);

    REQUIRE(analytic.states.size() == reference.states.size());
    for (size_t k = 0; k < analytic.states.size(); ++k) {
        const auto& a = analytic.states[k].trans;
        const auto& b = reference.states[k].trans;
        for (auto [x, y] : {std::pair{a.x, b.x}, {a.y, b.y}, {a.z, b.z},
                            {a.vx, b.vx}, {a.vy, b.vy}, {a.vz, b.vz}}) {
            CHECK(std::abs(x - y) <= 1e-8 * std::max(1.0, std::abs(y)));
        }
    }

    // The spinning target's rates stay on the stable axis in the RK run.
    const auto& w_t = reference.states.back().w_t;
    CHECK(w_t.wx == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(w_t.wy == doctest::Approx(0.052359).epsilon(1e-10));
    CHECK(w_t.wz == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("analytic propagation rejects nonzero controls") {
    const ScenarioConfig cfg = testing::benchmark_scenario();
    ControlVector6 c;
    c.ux = 0.1;
    CHECK_THROWS_AS(run_propagate(cfg, 100.0, 10, PropagateMode::analytic_cw, c),
                    std::domain_error);
}

TEST_CASE("trapezoidal propagation error halves quadratically against the reference") {
    const ScenarioConfig cfg = load_scenario(kScenarioPath);
    const SolutionTrajectory ref = run_propagate(cfg, 100.0, 100, PropagateMode::reference_rk);
    const SolutionTrajectory coarse = run_propagate(cfg, 100.0, 100, PropagateMode::trapezoidal);
    const SolutionTrajectory fine = run_propagate(cfg, 100.0, 200, PropagateMode::trapezoidal);

    const double e_coarse =
        (coarse.states.back().vec() - ref.states.back().vec()).lpNorm<Eigen::Infinity>();
    const SolutionTrajectory ref2 = run_propagate(cfg, 100.0, 200, PropagateMode::reference_rk);
    const double e_fine =
        (fine.states.back().vec() - ref2.states.back().vec()).lpNorm<Eigen::Infinity>();
    CHECK(e_coarse / e_fine == doctest::Approx(4.0).epsilon(0.125));
}
