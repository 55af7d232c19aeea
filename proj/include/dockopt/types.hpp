#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace dockopt {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using State20 = Eigen::Matrix<double, 20, 1>;
using Control6 = Eigen::Matrix<double, 6, 1>;

/// Relative translational state in the rotating reference frame:
/// x radial, y along-track, z out-of-plane.
struct TranslationalState {
    double x = 0.0, y = 0.0, z = 0.0;    ///< position [m]
    double vx = 0.0, vy = 0.0, vz = 0.0; ///< velocity [m/s]

    Vec3 position() const { return {x, y, z}; }
    Vec3 velocity() const { return {vx, vy, vz}; }
};

/// Attitude quaternion, vector part first, scalar part last.
struct Quaternion {
    double q1 = 0.0, q2 = 0.0, q3 = 0.0, q4 = 1.0;

    static Quaternion identity() { return {0.0, 0.0, 0.0, 1.0}; }

    double norm_squared() const { return q1 * q1 + q2 * q2 + q3 * q3 + q4 * q4; }
    double norm() const { return std::sqrt(norm_squared()); }

    /// |‖q‖² − 1| within tol.
    bool is_unit(double tol = 1e-9) const { return std::abs(norm_squared() - 1.0) <= tol; }

    Quaternion normalized() const {
        const double n = norm();
        if (n <= 0.0 || !std::isfinite(n)) {
            throw std::domain_error("Quaternion::normalized: zero or non-finite norm");
        }
        return {q1 / n, q2 / n, q3 / n, q4 / n};
    }

    Vec4 vec() const { return {q1, q2, q3, q4}; }
    static Quaternion from_vec(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
};

/// Body-frame angular rates [rad/s].
struct AngularVelocity {
    double wx = 0.0, wy = 0.0, wz = 0.0;

    Vec3 vec() const { return {wx, wy, wz}; }
    static AngularVelocity from_vec(const Vec3& v) { return {v[0], v[1], v[2]}; }
};

/// Principal moments of inertia [kg·m²]. Off-diagonal terms are zero by
/// assumption (body axes aligned with principal axes).
struct InertiaTensor {
    double jxx = 1.0, jyy = 1.0, jzz = 1.0;

    bool valid() const { return jxx > 0.0 && jyy > 0.0 && jzz > 0.0; }

    /// Rigid-body realizability (sum of any two moments at least the third).
    /// Informational: benchmark inertia data is accepted even when idealized
    /// values break this.
    bool satisfies_triangle_inequalities() const {
        return jxx + jyy >= jzz && jyy + jzz >= jxx && jzz + jxx >= jyy;
    }
};

/// Thrust in the reference/inertial-aligned frame [N] plus servicer body
/// torque [N·m].
struct ControlVector6 {
    double ux = 0.0, uy = 0.0, uz = 0.0;
    double mx = 0.0, my = 0.0, mz = 0.0;

    Vec3 thrust() const { return {ux, uy, uz}; }
    Vec3 torque() const { return {mx, my, mz}; }

    Control6 vec() const {
        Control6 c;
        c << ux, uy, uz, mx, my, mz;
        return c;
    }
    static ControlVector6 from_vec(const Control6& c) {
        return {c[0], c[1], c[2], c[3], c[4], c[5]};
    }
};

/// Index layout of the combined 20-state vector:
/// [x y z vx vy vz | ωS (3) | ωT (3) | qS (4) | qT (4)].
namespace idx {
inline constexpr int pos = 0;
inline constexpr int vel = 3;
inline constexpr int omega_s = 6;
inline constexpr int omega_t = 9;
inline constexpr int quat_s = 12;
inline constexpr int quat_t = 16;
inline constexpr int state_dim = 20;
inline constexpr int control_dim = 6;
} // namespace idx

/// Combined state of the coupled translational/rotational system.
struct StateVector20 {
    TranslationalState trans;
    AngularVelocity w_s; ///< servicer body rates
    AngularVelocity w_t; ///< target body rates
    Quaternion q_s;      ///< servicer attitude
    Quaternion q_t;      ///< target attitude

    State20 vec() const {
        State20 s;
        s << trans.x, trans.y, trans.z, trans.vx, trans.vy, trans.vz,
            w_s.wx, w_s.wy, w_s.wz, w_t.wx, w_t.wy, w_t.wz,
            q_s.q1, q_s.q2, q_s.q3, q_s.q4, q_t.q1, q_t.q2, q_t.q3, q_t.q4;
        return s;
    }

    static StateVector20 from_vec(const State20& s) {
        StateVector20 out;
        out.trans = {s[0], s[1], s[2], s[3], s[4], s[5]};
        out.w_s = {s[6], s[7], s[8]};
        out.w_t = {s[9], s[10], s[11]};
        out.q_s = {s[12], s[13], s[14], s[15]};
        out.q_t = {s[16], s[17], s[18], s[19]};
        return out;
    }
};

/// Physical constants of the coupled system.
struct BodyParams {
    double mass = 1.0;       ///< servicer mass [kg]
    InertiaTensor inertia_s; ///< servicer principal inertia
    InertiaTensor inertia_t; ///< target principal inertia
    double n = 1.0;          ///< mean motion of the reference point [rad/s]

    bool valid() const { return mass > 0.0 && n > 0.0 && inertia_s.valid() && inertia_t.valid(); }
};

/// Degrees-per-second to radians-per-second factor used by scenario files.
inline constexpr double deg_per_s_to_rad = 0.017453;

} // namespace dockopt
