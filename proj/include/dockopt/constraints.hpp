#pragma once

#include "dockopt/types.hpp"

#include <vector>

namespace dockopt {

/// Body-fixed docking points and spherical safety radii.
struct DockingGeometry {
    Vec3 d_s = Vec3::Zero(); ///< servicer docking point [m]
    Vec3 d_t = Vec3::Zero(); ///< target docking point [m]
    double r_s = 1.0;        ///< servicer safety radius [m]
    double r_t = 1.0;        ///< target safety radius [m]

    /// Radii positive and the matched-attitude docking distance at least
    /// r_s + r_t, otherwise the terminal condition conflicts with the
    /// keep-out constraint.
    bool valid() const {
        return r_s > 0.0 && r_t > 0.0 && (d_t - d_s).norm() >= r_s + r_t;
    }
};

/// Nonnegative weights of the Bolza cost functional.
struct CostWeights {
    double l_tf = 1.0;
    double l_u = 1.0;
    double l_m = 1.0;

    bool valid() const {
        return l_tf >= 0.0 && l_u >= 0.0 && l_m >= 0.0 && (l_tf + l_u + l_m) > 0.0;
    }
};

/// How the printed thrust-norm bound is interpreted: `literal` bounds
/// ‖u‖² by u_max, `squared` bounds it by u_max².
enum class ThrustBoundMode { literal, squared };

struct ControlBounds {
    double u_max = 0.15; ///< thrust-norm bound (see ThrustBoundMode)
    double m_max = 1.0;  ///< per-axis torque bound [N·m]
    ThrustBoundMode thrust_mode = ThrustBoundMode::literal;

    bool valid() const { return u_max > 0.0 && m_max > 0.0; }

    double thrust_rhs() const {
        return thrust_mode == ThrustBoundMode::literal ? u_max : u_max * u_max;
    }
};

struct CostBreakdown {
    double j = 0.0;
    double u_total = 0.0;
    double m_total = 0.0;
};

/// Terminal docking-position residual Rᵀ(d_t − d_s) − r, with R evaluated
/// from the servicer quaternion.
Vec3 docking_position_residual(const StateVector20& s, const DockingGeometry& g,
                               double norm_tol = 1e-6);

/// Terminal docking-velocity residual ω_E × Rᵀ(d_t − d_s) − ṙ, with ω_E the
/// servicer's inertial angular velocity.
Vec3 docking_velocity_residual(const StateVector20& s, const DockingGeometry& g, double n,
                               double norm_tol = 1e-6);

/// Terminal attitude agreement (q_t − q_s, ω_t − ω_s) as a 7-vector.
Eigen::Matrix<double, 7, 1> attitude_match_residual(const StateVector20& s);

/// Keep-out margin x² + y² + z² − (r_s + r_t)²; feasible iff ≥ 0.
double collision_margin(const StateVector20& s, const DockingGeometry& g);

/// Thrust-norm margin rhs − (ux² + uy² + uz²); feasible iff ≥ 0.
double thrust_margin(const ControlVector6& c, const ControlBounds& b);

/// Running cost l_u‖u‖² + l_m‖m‖².
double running_cost(const ControlVector6& c, const CostWeights& w);

/// Discretized Bolza cost over a uniform grid: u_total = Δt Σ_{k<N} ‖u^k‖²,
/// m_total likewise, J = l_tf·t_f + l_u·u_total + l_m·m_total.
/// @throws std::domain_error for fewer than two nodes or a non-uniform grid.
CostBreakdown total_cost(const std::vector<double>& time_grid,
                         const std::vector<Control6>& controls, const CostWeights& w);

// ---- unchecked raw-vector forms used inside the transcription ----

Vec3 docking_position_residual_raw(const State20& s, const DockingGeometry& g);
Vec3 docking_velocity_residual_raw(const State20& s, const DockingGeometry& g, double n);

/// ∂/∂x of the raw position residual (3×20).
Eigen::Matrix<double, 3, 20> docking_position_state_jacobian(const State20& s,
                                                             const DockingGeometry& g);
/// ∂/∂x of the raw velocity residual (3×20).
Eigen::Matrix<double, 3, 20> docking_velocity_state_jacobian(const State20& s,
                                                             const DockingGeometry& g, double n);

/// λᵀ∇²(position residual), 20×20 symmetric.
Eigen::Matrix<double, 20, 20> docking_position_hessian_contraction(const Vec3& lambda,
                                                                   const DockingGeometry& g);
/// λᵀ∇²(velocity residual), 20×20 symmetric.
Eigen::Matrix<double, 20, 20> docking_velocity_hessian_contraction(const State20& s,
                                                                   const Vec3& lambda,
                                                                   const DockingGeometry& g,
                                                                   double n);

} // namespace dockopt
