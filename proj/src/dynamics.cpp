#include "dockopt/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace dockopt {

double mean_motion(double gm, double a) {
    if (gm <= 0.0 || a <= 0.0) {
        throw std::domain_error("mean_motion: GM and orbit radius must be positive");
    }
    return std::sqrt(gm / (a * a * a));
}

TranslationalState cw_derivative(const TranslationalState& s, const Vec3& thrust,
                                 double n, double mass) {
    if (mass <= 0.0) {
        throw std::domain_error("cw_derivative: mass must be positive");
    }
    TranslationalState d;
    d.x = s.vx;
    d.y = s.vy;
    d.z = s.vz;
    d.vx = 2.0 * n * s.vy + 3.0 * n * n * s.x + thrust[0] / mass;
    d.vy = -2.0 * n * s.vx + thrust[1] / mass;
    d.vz = -n * n * s.z + thrust[2] / mass;
    return d;
}

TranslationalState cw_analytic(const TranslationalState& s0, double n, double t) {
    if (n <= 0.0) {
        throw std::domain_error("cw_analytic: mean motion must be positive");
    }
    if (t < 0.0) {
        throw std::domain_error("cw_analytic: time must be nonnegative");
    }
    const double snt = std::sin(n * t);
    const double cnt = std::cos(n * t);

    TranslationalState s;
    s.x = (4.0 - 3.0 * cnt) * s0.x + snt / n * s0.vx + 2.0 / n * (1.0 - cnt) * s0.vy;
    s.y = 6.0 * (snt - n * t) * s0.x + s0.y - 2.0 / n * (1.0 - cnt) * s0.vx +
          (4.0 * snt - 3.0 * n * t) / n * s0.vy;
    s.z = cnt * s0.z + snt / n * s0.vz;
    s.vx = 3.0 * n * snt * s0.x + cnt * s0.vx + 2.0 * snt * s0.vy;
    s.vy = 6.0 * n * (cnt - 1.0) * s0.x - 2.0 * snt * s0.vx + (4.0 * cnt - 3.0) * s0.vy;
    s.vz = -n * snt * s0.z + cnt * s0.vz;
    return s;
}

Eigen::Matrix4d omega_matrix(const AngularVelocity& w) {
    Eigen::Matrix4d o;
    // clang-format off
    o <<   0.0,  w.wz, -w.wy,  w.wx,
         -w.wz,   0.0,  w.wx,  w.wy,
          w.wy, -w.wx,   0.0,  w.wz,
         -w.wx, -w.wy, -w.wz,   0.0;
    // clang-format on
    return o;
}

Eigen::Matrix<double, 4, 3> xi_matrix(const Quaternion& q) {
    Eigen::Matrix<double, 4, 3> xi;
    // clang-format off
    xi <<  q.q4, -q.q3,  q.q2,
           q.q3,  q.q4, -q.q1,
          -q.q2,  q.q1,  q.q4,
          -q.q1, -q.q2, -q.q3;
    // clang-format on
    return xi;
}

Vec4 quaternion_derivative(const Quaternion& q, const AngularVelocity& w) {
    return 0.5 * omega_matrix(w) * q.vec();
}

AngularVelocity gyro_derivative(const AngularVelocity& w, const InertiaTensor& inertia,
                                const Vec3& torque) {
    AngularVelocity d;
    d.wx = (w.wy * w.wz * (inertia.jyy - inertia.jzz) + torque[0]) / inertia.jxx;
    d.wy = (w.wx * w.wz * (inertia.jzz - inertia.jxx) + torque[1]) / inertia.jyy;
    d.wz = (w.wx * w.wy * (inertia.jxx - inertia.jyy) + torque[2]) / inertia.jzz;
    return d;
}

Mat3 rotation_matrix_unchecked(const Quaternion& q) {
    const double q1 = q.q1, q2 = q.q2, q3 = q.q3, q4 = q.q4;
    Mat3 r;
    // clang-format off
    r << q1*q1 - q2*q2 - q3*q3 + q4*q4,  2.0*(q1*q2 + q3*q4),            2.0*(q1*q3 - q2*q4),
         2.0*(q1*q2 - q3*q4),           -q1*q1 + q2*q2 - q3*q3 + q4*q4,  2.0*(q2*q3 + q1*q4),
         2.0*(q1*q3 + q2*q4),            2.0*(q2*q3 - q1*q4),           -q1*q1 - q2*q2 + q3*q3 + q4*q4;
    // clang-format on
    return r;
}

Mat3 rotation_matrix(const Quaternion& q, double norm_tol) {
    if (!q.is_unit(norm_tol)) {
        throw std::domain_error("rotation_matrix: quaternion is not unit-norm within tolerance");
    }
    return rotation_matrix_unchecked(q);
}

Mat3 rotation_matrix_derivative(const Quaternion& q, int a) {
    const double q1 = q.q1, q2 = q.q2, q3 = q.q3, q4 = q.q4;
    Mat3 d;
    switch (a) {
    case 0:
        // clang-format off
        d <<  q1,  q2,  q3,
              q2, -q1,  q4,
              q3, -q4, -q1;
        // clang-format on
        break;
    case 1:
        // clang-format off
        d << -q2,  q1, -q4,
              q1,  q2,  q3,
              q4,  q3, -q2;
        // clang-format on
        break;
    case 2:
        // clang-format off
        d << -q3,  q4,  q1,
             -q4, -q3,  q2,
              q1,  q2,  q3;
        // clang-format on
        break;
    case 3:
        // clang-format off
        d <<  q4,  q3, -q2,
             -q3,  q4,  q1,
              q2, -q1,  q4;
        // clang-format on
        break;
    default:
        throw std::invalid_argument("rotation_matrix_derivative: component index out of range");
    }
    return 2.0 * d;
}

Mat3 rotation_matrix_second_derivative(int a, int b) {
    // ∂R/∂q_a is linear in q, so ∂²R/∂q_a∂q_b is ∂R/∂q_a evaluated at the
    // b-th unit quaternion.
    Quaternion e{0.0, 0.0, 0.0, 0.0};
    switch (b) {
    case 0: e.q1 = 1.0; break;
    case 1: e.q2 = 1.0; break;
    case 2: e.q3 = 1.0; break;
    case 3: e.q4 = 1.0; break;
    default:
        throw std::invalid_argument("rotation_matrix_second_derivative: index out of range");
    }
    return rotation_matrix_derivative(e, a);
}

Vec3 inertial_angular_velocity(const Quaternion& q, const AngularVelocity& w, double n,
                               double norm_tol) {
    const Mat3 r = rotation_matrix(q, norm_tol);
    return r.transpose() * w.vec() - Vec3{0.0, 0.0, n};
}

Vec3 thrust_to_body(const Quaternion& q, const Vec3& u_ref, double norm_tol) {
    return rotation_matrix(q, norm_tol) * u_ref;
}

State20 full_derivative_raw(const State20& s, const Control6& c, const BodyParams& p) {
    State20 d;

    // Translational block.
    d[0] = s[3];
    d[1] = s[4];
    d[2] = s[5];
    d[3] = 2.0 * p.n * s[4] + 3.0 * p.n * p.n * s[0] + c[0] / p.mass;
    d[4] = -2.0 * p.n * s[3] + c[1] / p.mass;
    d[5] = -p.n * p.n * s[2] + c[2] / p.mass;

    // Servicer gyroscopic block (torque-driven).
    const InertiaTensor& js = p.inertia_s;
    d[6] = (s[7] * s[8] * (js.jyy - js.jzz) + c[3]) / js.jxx;
    d[7] = (s[6] * s[8] * (js.jzz - js.jxx) + c[4]) / js.jyy;
    d[8] = (s[6] * s[7] * (js.jxx - js.jyy) + c[5]) / js.jzz;

    // Target gyroscopic block (uncontrolled).
    const InertiaTensor& jt = p.inertia_t;
    d[9] = s[10] * s[11] * (jt.jyy - jt.jzz) / jt.jxx;
    d[10] = s[9] * s[11] * (jt.jzz - jt.jxx) / jt.jyy;
    d[11] = s[9] * s[10] * (jt.jxx - jt.jyy) / jt.jzz;

    // Quaternion kinematics, servicer then target.
    const double wsx = s[6], wsy = s[7], wsz = s[8];
    d[12] = 0.5 * (wsz * s[13] - wsy * s[14] + wsx * s[15]);
    d[13] = 0.5 * (-wsz * s[12] + wsx * s[14] + wsy * s[15]);
    d[14] = 0.5 * (wsy * s[12] - wsx * s[13] + wsz * s[15]);
    d[15] = 0.5 * (-wsx * s[12] - wsy * s[13] - wsz * s[14]);

    const double wtx = s[9], wty = s[10], wtz = s[11];
    d[16] = 0.5 * (wtz * s[17] - wty * s[18] + wtx * s[19]);
    d[17] = 0.5 * (-wtz * s[16] + wtx * s[18] + wty * s[19]);
    d[18] = 0.5 * (wty * s[16] - wtx * s[17] + wtz * s[19]);
    d[19] = 0.5 * (-wtx * s[16] - wty * s[17] - wtz * s[18]);

    return d;
}

State20 full_derivative(const StateVector20& s, const ControlVector6& c, const BodyParams& p) {
    if (!p.valid()) {
        throw std::domain_error("full_derivative: invalid body parameters");
    }
    return full_derivative_raw(s.vec(), c.vec(), p);
}

Eigen::Matrix<double, 20, 20> full_derivative_state_jacobian(const State20& s,
                                                             const BodyParams& p) {
    Eigen::Matrix<double, 20, 20> a = Eigen::Matrix<double, 20, 20>::Zero();

    a(0, 3) = 1.0;
    a(1, 4) = 1.0;
    a(2, 5) = 1.0;
    a(3, 0) = 3.0 * p.n * p.n;
    a(3, 4) = 2.0 * p.n;
    a(4, 3) = -2.0 * p.n;
    a(5, 2) = -p.n * p.n;

    const InertiaTensor& js = p.inertia_s;
    a(6, 7) = s[8] * (js.jyy - js.jzz) / js.jxx;
    a(6, 8) = s[7] * (js.jyy - js.jzz) / js.jxx;
    a(7, 6) = s[8] * (js.jzz - js.jxx) / js.jyy;
    a(7, 8) = s[6] * (js.jzz - js.jxx) / js.jyy;
    a(8, 6) = s[7] * (js.jxx - js.jyy) / js.jzz;
    a(8, 7) = s[6] * (js.jxx - js.jyy) / js.jzz;

    const InertiaTensor& jt = p.inertia_t;
    a(9, 10) = s[11] * (jt.jyy - jt.jzz) / jt.jxx;
    a(9, 11) = s[10] * (jt.jyy - jt.jzz) / jt.jxx;
    a(10, 9) = s[11] * (jt.jzz - jt.jxx) / jt.jyy;
    a(10, 11) = s[9] * (jt.jzz - jt.jxx) / jt.jyy;
    a(11, 9) = s[10] * (jt.jxx - jt.jyy) / jt.jzz;
    a(11, 10) = s[9] * (jt.jxx - jt.jyy) / jt.jzz;

    const AngularVelocity ws{s[6], s[7], s[8]};
    const AngularVelocity wt{s[9], s[10], s[11]};
    const Quaternion qs{s[12], s[13], s[14], s[15]};
    const Quaternion qt{s[16], s[17], s[18], s[19]};

    a.block<4, 4>(12, 12) = 0.5 * omega_matrix(ws);
    a.block<4, 3>(12, 6) = 0.5 * xi_matrix(qs);
    a.block<4, 4>(16, 16) = 0.5 * omega_matrix(wt);
    a.block<4, 3>(16, 9) = 0.5 * xi_matrix(qt);

    return a;
}

Eigen::Matrix<double, 20, 6> full_derivative_control_jacobian(const BodyParams& p) {
    Eigen::Matrix<double, 20, 6> b = Eigen::Matrix<double, 20, 6>::Zero();
    b(3, 0) = 1.0 / p.mass;
    b(4, 1) = 1.0 / p.mass;
    b(5, 2) = 1.0 / p.mass;
    b(6, 3) = 1.0 / p.inertia_s.jxx;
    b(7, 4) = 1.0 / p.inertia_s.jyy;
    b(8, 5) = 1.0 / p.inertia_s.jzz;
    return b;
}

Eigen::Matrix<double, 20, 20> full_derivative_hessian_contraction(const State20& lambda,
                                                                  const BodyParams& p) {
    Eigen::Matrix<double, 20, 20> h = Eigen::Matrix<double, 20, 20>::Zero();
    auto add_sym = [&h](int i, int j, double v) {
        h(i, j) += v;
        h(j, i) += v;
    };

    // Gyroscopic bilinear terms f6..f11.
    const InertiaTensor& js = p.inertia_s;
    add_sym(7, 8, lambda[6] * (js.jyy - js.jzz) / js.jxx);
    add_sym(6, 8, lambda[7] * (js.jzz - js.jxx) / js.jyy);
    add_sym(6, 7, lambda[8] * (js.jxx - js.jyy) / js.jzz);

    const InertiaTensor& jt = p.inertia_t;
    add_sym(10, 11, lambda[9] * (jt.jyy - jt.jzz) / jt.jxx);
    add_sym(9, 11, lambda[10] * (jt.jzz - jt.jxx) / jt.jyy);
    add_sym(9, 10, lambda[11] * (jt.jxx - jt.jyy) / jt.jzz);

    // Quaternion kinematics ω–q cross terms: f(12+i) = ½ Σ_j Ω(ω)_{ij} q_j,
    // second derivatives follow the Ω / Ξ structure.
    // servicer: ω indices 6..8, q indices 12..15
    add_sym(8, 13, 0.5 * lambda[12]);
    add_sym(7, 14, -0.5 * lambda[12]);
    add_sym(6, 15, 0.5 * lambda[12]);
    add_sym(8, 12, -0.5 * lambda[13]);
    add_sym(6, 14, 0.5 * lambda[13]);
    add_sym(7, 15, 0.5 * lambda[13]);
    add_sym(7, 12, 0.5 * lambda[14]);
    add_sym(6, 13, -0.5 * lambda[14]);
    add_sym(8, 15, 0.5 * lambda[14]);
    add_sym(6, 12, -0.5 * lambda[15]);
    add_sym(7, 13, -0.5 * lambda[15]);
    add_sym(8, 14, -0.5 * lambda[15]);

    // target: ω indices 9..11, q indices 16..19
    add_sym(11, 17, 0.5 * lambda[16]);
    add_sym(10, 18, -0.5 * lambda[16]);
    add_sym(9, 19, 0.5 * lambda[16]);
    add_sym(11, 16, -0.5 * lambda[17]);
    add_sym(9, 18, 0.5 * lambda[17]);
    add_sym(10, 19, 0.5 * lambda[17]);
    add_sym(10, 16, 0.5 * lambda[18]);
    add_sym(9, 17, -0.5 * lambda[18]);
    add_sym(11, 19, 0.5 * lambda[18]);
    add_sym(9, 16, -0.5 * lambda[19]);
    add_sym(10, 17, -0.5 * lambda[19]);
    add_sym(11, 18, -0.5 * lambda[19]);

    return h;
}

} // namespace dockopt
