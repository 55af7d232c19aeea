#pragma once

#include "dockopt/types.hpp"

namespace dockopt {

/// Mean motion n = sqrt(GM/a³) of a circular reference orbit.
/// @param gm  gravitational parameter [m³/s²]
/// @param a   orbit radius [m]
double mean_motion(double gm, double a);

/// Right-hand side of the linearized relative-motion equations:
///   ẍ = 2n·ẏ + 3n²·x + ux/m,  ÿ = −2n·ẋ + uy/m,  z̈ = −n²·z + uz/m.
TranslationalState cw_derivative(const TranslationalState& s, const Vec3& thrust,
                                 double n, double mass);

/// Closed-form zero-control solution of the relative-motion equations,
/// evaluated at elapsed time t from the initial state s0. Serves as the
/// propagation oracle for the translational block.
TranslationalState cw_analytic(const TranslationalState& s0, double n, double t);

/// Quaternion kinematics q̇ = ½·Ω(ω)·q (vector-first convention).
Vec4 quaternion_derivative(const Quaternion& q, const AngularVelocity& w);

/// The 4×4 rate matrix Ω(ω) with q̇ = ½·Ω·q.
Eigen::Matrix4d omega_matrix(const AngularVelocity& w);

/// The 4×3 matrix Ξ(q) with ∂q̇/∂ω = ½·Ξ.
Eigen::Matrix<double, 4, 3> xi_matrix(const Quaternion& q);

/// Euler's gyroscopic equations in principal axes,
///   ω̇x = (ωy·ωz·(Jyy−Jzz) + mx)/Jxx  and cyclic.
AngularVelocity gyro_derivative(const AngularVelocity& w, const InertiaTensor& inertia,
                                const Vec3& torque);

/// Rotation matrix built from a unit quaternion; maps unrotated-frame
/// vectors into the rotated (body) frame, Rᵀ maps back.
/// @throws std::domain_error when |‖q‖²−1| > norm_tol.
Mat3 rotation_matrix(const Quaternion& q, double norm_tol = 1e-6);

/// rotation_matrix without the unit-norm check (solver iterates drift).
Mat3 rotation_matrix_unchecked(const Quaternion& q);

/// ∂R/∂q_a for a ∈ {0,1,2,3}; entries are linear in q.
Mat3 rotation_matrix_derivative(const Quaternion& q, int a);

/// Constant second derivative ∂²R/∂q_a∂q_b.
Mat3 rotation_matrix_second_derivative(int a, int b);

/// Angular velocity in the inertial frame: ω_E = Rᵀ·ω − [0,0,n]ᵀ.
Vec3 inertial_angular_velocity(const Quaternion& q, const AngularVelocity& w, double n,
                               double norm_tol = 1e-6);

/// Thrust transformed from the reference frame into body coordinates,
/// u_body = R·u. Norm-preserving.
Vec3 thrust_to_body(const Quaternion& q, const Vec3& u_ref, double norm_tol = 1e-6);

/// Full 20-state right-hand side: CW translation, both gyroscopic blocks
/// (target torque-free), both quaternion kinematics.
State20 full_derivative(const StateVector20& s, const ControlVector6& c, const BodyParams& p);

/// full_derivative on raw packed vectors, no checks; the transcription path.
State20 full_derivative_raw(const State20& s, const Control6& c, const BodyParams& p);

/// Analytic Jacobian ∂f/∂x of full_derivative_raw (20×20).
Eigen::Matrix<double, 20, 20> full_derivative_state_jacobian(const State20& s, const BodyParams& p);

/// Analytic Jacobian ∂f/∂u of full_derivative_raw (20×6); constant in (s,u).
Eigen::Matrix<double, 20, 6> full_derivative_control_jacobian(const BodyParams& p);

/// Contraction λᵀ·∂²f/∂x∂x of the state Hessians (each component of f is at
/// most quadratic in the state, so the result is a constant sparse symmetric
/// 20×20 matrix for fixed λ).
Eigen::Matrix<double, 20, 20> full_derivative_hessian_contraction(const State20& lambda,
                                                                  const BodyParams& p);

} // namespace dockopt
