#include "dockopt/trajectory.hpp"

#include "dockopt/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace dockopt {

EulerYxz euler_yxz_from_quaternion(const Quaternion& q) {
    const Mat3 m = rotation_matrix_unchecked(q).transpose();
    EulerYxz e;
    const double s_theta = -m(1, 2);
    if (std::abs(s_theta) >= 1.0 - 1e-9) {
        e.gimbal_degenerate = true;
        const double sign = s_theta > 0.0 ? 1.0 : -1.0;
        e.theta = sign * M_PI / 2.0;
        e.psi = 0.0;
        e.phi = std::atan2(sign * m(0, 1), m(0, 0));
    } else {
        e.theta = std::asin(s_theta);
        e.phi = std::atan2(m(0, 2), m(2, 2));
        e.psi = std::atan2(m(1, 0), m(1, 1));
    }
    return e;
}

Quaternion quaternion_from_rotation_matrix(const Mat3& r) {
    const double trace = r.trace();
    Vec4 q; // (q1, q2, q3, q4)
    if (trace >= r(0, 0) && trace >= r(1, 1) && trace >= r(2, 2)) {
        const double q4 = 0.5 * std::sqrt(1.0 + trace);
        q << (r(1, 2) - r(2, 1)) / (4.0 * q4), (r(2, 0) - r(0, 2)) / (4.0 * q4),
            (r(0, 1) - r(1, 0)) / (4.0 * q4), q4;
    } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
        const double q1 = 0.5 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
        q << q1, (r(0, 1) + r(1, 0)) / (4.0 * q1), (r(0, 2) + r(2, 0)) / (4.0 * q1),
            (r(1, 2) - r(2, 1)) / (4.0 * q1);
    } else if (r(1, 1) >= r(2, 2)) {
        const double q2 = 0.5 * std::sqrt(1.0 - r(0, 0) + r(1, 1) - r(2, 2));
        q << (r(0, 1) + r(1, 0)) / (4.0 * q2), q2, (r(1, 2) + r(2, 1)) / (4.0 * q2),
            (r(2, 0) - r(0, 2)) / (4.0 * q2);
    } else {
        const double q3 = 0.5 * std::sqrt(1.0 - r(0, 0) - r(1, 1) + r(2, 2));
        q << (r(0, 2) + r(2, 0)) / (4.0 * q3), (r(1, 2) + r(2, 1)) / (4.0 * q3), q3,
            (r(0, 1) - r(1, 0)) / (4.0 * q3);
    }
    if (q[3] < 0.0) {
        q = -q;
    }
    return Quaternion::from_vec(q.normalized());
}

Quaternion quaternion_from_euler_yxz(double phi, double theta, double psi) {
    const double cf = std::cos(phi), sf = std::sin(phi);
    const double ct = std::cos(theta), st = std::sin(theta);
    const double cp = std::cos(psi), sp = std::sin(psi);
    Mat3 ry, rx, rz;
    // clang-format off
    ry <<  cf, 0.0,  sf,
          0.0, 1.0, 0.0,
          -sf, 0.0,  cf;
    rx << 1.0, 0.0, 0.0,
          0.0,  ct, -st,
          0.0,  st,  ct;
    rz <<  cp, -sp, 0.0,
           sp,  cp, 0.0,
          0.0, 0.0, 1.0;
    // clang-format on
    const Mat3 attitude = ry * rx * rz; // body-to-reference
    return quaternion_from_rotation_matrix(attitude.transpose());
}

CostBreakdown total_cost(const SolutionTrajectory& traj, const CostWeights& w) {
    std::vector<Control6> controls;
    controls.reserve(traj.controls.size());
    for (const ControlVector6& c : traj.controls) {
        controls.push_back(c.vec());
    }
    return total_cost(traj.time, controls, w);
}

namespace {

void fill_derived(SolutionTrajectory& traj, const ScenarioConfig& scenario) {
    const DockingGeometry geom = scenario.docking_geometry();
    const size_t nodes = traj.states.size();
    traj.thrust_body.resize(nodes);
    traj.euler_s.resize(nodes);
    traj.euler_t.resize(nodes);
    traj.collision_margins.resize(nodes);
    for (size_t k = 0; k < nodes; ++k) {
        const StateVector20& s = traj.states[k];
        traj.thrust_body[k] =
            rotation_matrix_unchecked(s.q_s) * traj.controls[k].thrust();
        traj.euler_s[k] = euler_yxz_from_quaternion(s.q_s);
        traj.euler_t[k] = euler_yxz_from_quaternion(s.q_t);
        traj.collision_margins[k] = collision_margin(s, geom);
    }
    traj.cost = total_cost(traj, scenario.weights);
    traj.scenario_hash = scenario.hash();
}

} // namespace

SolutionTrajectory build_trajectory(const TranscribedNlp& nlp, const ScenarioConfig& scenario,
                                    const SolveReport& report) {
    SolutionTrajectory traj;
    traj.solved = true;
    traj.report = report;
    traj.raw_quaternion_drift = nlp.quaternion_drift(report.solution);

    UnpackedDecision dec = unpack(nlp.layout(), report.solution);
    traj.t_f = dec.t_f;

    // Quaternion nodes are renormalized for export; node norms are already
    // within the solver's feasibility floor so the defects move only at the
    // same order.
    std::vector<State20> states = dec.states;
    for (State20& s : states) {
        for (int q0 : {idx::quat_s, idx::quat_t}) {
            s.segment<4>(q0) /= s.segment<4>(q0).norm();
        }
    }

    const int n = nlp.n_intervals();
    traj.time.resize(static_cast<size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        traj.time[static_cast<size_t>(k)] = dec.t_f * k / n;
    }
    traj.states.reserve(states.size());
    traj.controls.reserve(states.size());
    for (size_t k = 0; k < states.size(); ++k) {
        traj.states.push_back(StateVector20::from_vec(states[k]));
        traj.controls.push_back(ControlVector6::from_vec(dec.controls[k]));
    }
    fill_derived(traj, scenario);

    // Post-normalization constraint audit.
    const Eigen::VectorXd z_norm = pack(nlp.layout(), states, dec.controls, dec.t_f);
    traj.export_eq_violation =
        nlp.problem().equality(z_norm).lpNorm<Eigen::Infinity>();
    traj.export_ineq_margin = nlp.problem().inequality(z_norm).minCoeff();
    return traj;
}

SolutionTrajectory build_trajectory(const ScenarioConfig& scenario,
                                    const std::vector<State20>& states,
                                    const std::vector<Control6>& controls, double t_f) {
    if (states.size() < 2 || states.size() != controls.size()) {
        throw std::domain_error("build_trajectory: need >= 2 nodes with matching controls");
    }
    SolutionTrajectory traj;
    traj.t_f = t_f;
    const size_t nodes = states.size();
    traj.time.resize(nodes);
    for (size_t k = 0; k < nodes; ++k) {
        traj.time[k] = t_f * static_cast<double>(k) / static_cast<double>(nodes - 1);
        traj.states.push_back(StateVector20::from_vec(states[k]));
        traj.controls.push_back(ControlVector6::from_vec(controls[k]));
    }
    fill_derived(traj, scenario);
    return traj;
}

} // namespace dockopt
