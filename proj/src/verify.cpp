#include "dockopt/verify.hpp"

#include "dockopt/dynamics.hpp"
#include "dockopt/integrate.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace dockopt {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

double rotational_energy(const Vec3& w, const InertiaTensor& j) {
    return 0.5 * (j.jxx * w[0] * w[0] + j.jyy * w[1] * w[1] + j.jzz * w[2] * w[2]);
}

double momentum_norm(const Vec3& w, const InertiaTensor& j) {
    return Vec3{j.jxx * w[0], j.jyy * w[1], j.jzz * w[2]}.norm();
}

} // namespace

std::vector<VerifyCheck> run_oracle_suite(const ScenarioConfig& scenario, unsigned seed,
                                          int num_random_states) {
    std::vector<VerifyCheck> checks;
    const BodyParams params = scenario.body_params();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    const auto rhs_free = [&params](double, const State20& x) {
        return full_derivative_raw(x, Control6::Zero(), params);
    };

    // (a) Zero-control propagation against the closed-form solution over
    // 400 s, random translational states in [-10, 10].
    {
        double worst = 0.0;
        for (int trial = 0; trial < num_random_states; ++trial) {
            State20 x0 = State20::Zero();
            for (int i = 0; i < 6; ++i) x0[i] = 10.0 * unit(rng);
            x0[15] = 1.0;
            x0[19] = 1.0;

            IntegratorOptions opts;
            opts.rel_tol = 1e-12;
            opts.abs_tol = 1e-12;
            const State20 x_end = integrate_rk45(rhs_free, x0, 0.0, 400.0, opts);
            const TranslationalState ref = cw_analytic(
                {x0[0], x0[1], x0[2], x0[3], x0[4], x0[5]}, params.n, 400.0);
            const double refs[6] = {ref.x, ref.y, ref.z, ref.vx, ref.vy, ref.vz};
            for (int i = 0; i < 6; ++i) {
                worst = std::max(worst,
                                 std::abs(x_end[i] - refs[i]) / std::max(1.0, std::abs(refs[i])));
            }
        }
        checks.push_back({"cw analytic oracle vs integrated dynamics (400 s, " +
                              std::to_string(num_random_states) + " states)",
                          worst <= 1e-8, "max relative error " + num(worst)});
    }

    // (b) Torque-free conservation of rotational energy and momentum
    // magnitude for a tumbling target over 400 s.
    {
        State20 x0 = State20::Zero();
        x0[15] = 1.0;
        x0[19] = 1.0;
        x0[9] = 0.05;
        x0[10] = 0.03;
        x0[11] = -0.04;
        const Vec3 w0 = x0.segment<3>(idx::omega_t);
        const double e0 = rotational_energy(w0, params.inertia_t);
        const double l0 = momentum_norm(w0, params.inertia_t);

        const State20 x_end = integrate_rk45(rhs_free, x0, 0.0, 400.0);
        const Vec3 w_end = x_end.segment<3>(idx::omega_t);
        const double de = std::abs(rotational_energy(w_end, params.inertia_t) - e0) / e0;
        const double dl = std::abs(momentum_norm(w_end, params.inertia_t) - l0) / l0;
        checks.push_back({"torque-free energy and momentum conservation (400 s)",
                          de <= 1e-8 && dl <= 1e-8,
                          "relative drift energy " + num(de) + ", momentum " + num(dl)});
    }

    // Stable principal-axis spin stays constant.
    {
        const State20 x0 = scenario.initial_state().vec();
        const State20 x_end = integrate_rk45(rhs_free, x0, 0.0, 400.0);
        const double err =
            (x_end.segment<3>(idx::omega_t) - x0.segment<3>(idx::omega_t)).norm();
        checks.push_back({"stable target spin invariance", err <= 1e-10,
                          "|omega drift| " + num(err) + " rad/s"});
    }

    // Out-of-plane decoupling: z and vz stay identically zero.
    {
        State20 x0 = State20::Zero();
        x0[0] = 1.0;
        x0[1] = 2.0;
        x0[3] = 0.01;
        x0[4] = -0.02;
        x0[15] = 1.0;
        x0[19] = 1.0;
        const State20 x_end = integrate_rk45(rhs_free, x0, 0.0, 400.0);
        const double err = std::max(std::abs(x_end[2]), std::abs(x_end[5]));
        checks.push_back(
            {"out-of-plane decoupling", err <= 1e-12, "max |z|,|vz| " + num(err)});
    }

    // Rotation round trip and quaternion-rate orthogonality on random data.
    {
        double worst_rt = 0.0, worst_dot = 0.0;
        for (int trial = 0; trial < 200; ++trial) {
            Vec4 qv{unit(rng), unit(rng), unit(rng), unit(rng)};
            if (qv.norm() < 1e-3) qv[3] = 1.0;
            const Quaternion q = Quaternion::from_vec(qv.normalized());
            const Vec3 v{unit(rng), unit(rng), unit(rng)};
            const Mat3 r = rotation_matrix(q, 1e-9);
            worst_rt = std::max(worst_rt, (r.transpose() * (r * v) - v).norm());

            const AngularVelocity w{0.1 * unit(rng), 0.1 * unit(rng), 0.1 * unit(rng)};
            worst_dot = std::max(worst_dot, std::abs(quaternion_derivative(q, w).dot(q.vec())));
        }
        checks.push_back({"rotation round trip", worst_rt <= 1e-12, "max error " + num(worst_rt)});
        checks.push_back({"quaternion norm conservation (dq/dt orthogonal to q)",
                          worst_dot <= 1e-14, "max |q . dq/dt| " + num(worst_dot)});
    }

    // Second-order global convergence of the trapezoidal propagator.
    {
        const State20 x0 = scenario.initial_state().vec();
        const auto jac = [&params](double, const State20& x) {
            return full_derivative_state_jacobian(x, params);
        };
        const double t_end = 100.0;
        IntegratorOptions opts;
        opts.rel_tol = 1e-12;
        opts.abs_tol = 1e-14;
        const State20 ref = integrate_rk45(rhs_free, x0, 0.0, t_end, opts);
        const State20 coarse =
            integrate_trapezoidal(x0, 0.0, t_end, 100, rhs_free, jac).back();
        const State20 fine = integrate_trapezoidal(x0, 0.0, t_end, 200, rhs_free, jac).back();
        const double e_coarse = (coarse - ref).lpNorm<Eigen::Infinity>();
        const double e_fine = (fine - ref).lpNorm<Eigen::Infinity>();
        const double ratio = e_coarse / e_fine;
        checks.push_back({"trapezoidal second-order convergence",
                          ratio >= 3.5 && ratio <= 4.5,
                          "error ratio under step halving " + num(ratio)});
    }

    return checks;
}

} // namespace dockopt
