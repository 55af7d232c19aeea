#include "dockopt/constraints.hpp"

#include "dockopt/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace dockopt {

namespace {

Mat3 skew(const Vec3& v) {
    Mat3 s;
    // clang-format off
    s <<    0.0, -v[2],  v[1],
           v[2],   0.0, -v[0],
          -v[1],  v[0],   0.0;
    // clang-format on
    return s;
}

Quaternion servicer_quat(const State20& s) { return {s[12], s[13], s[14], s[15]}; }

} // namespace

Vec3 docking_position_residual_raw(const State20& s, const DockingGeometry& g) {
    const Mat3 r = rotation_matrix_unchecked(servicer_quat(s));
    return r.transpose() * (g.d_t - g.d_s) - Vec3{s[0], s[1], s[2]};
}

Vec3 docking_velocity_residual_raw(const State20& s, const DockingGeometry& g, double n) {
    const Mat3 r = rotation_matrix_unchecked(servicer_quat(s));
    const Vec3 w{s[6], s[7], s[8]};
    const Vec3 omega_e = r.transpose() * w - Vec3{0.0, 0.0, n};
    const Vec3 p = r.transpose() * (g.d_t - g.d_s);
    return omega_e.cross(p) - Vec3{s[3], s[4], s[5]};
}

Vec3 docking_position_residual(const StateVector20& s, const DockingGeometry& g,
                               double norm_tol) {
    if (!s.q_s.is_unit(norm_tol)) {
        throw std::domain_error("docking_position_residual: servicer quaternion not unit-norm");
    }
    return docking_position_residual_raw(s.vec(), g);
}

Vec3 docking_velocity_residual(const StateVector20& s, const DockingGeometry& g, double n,
                               double norm_tol) {
    if (!s.q_s.is_unit(norm_tol)) {
        throw std::domain_error("docking_velocity_residual: servicer quaternion not unit-norm");
    }
    return docking_velocity_residual_raw(s.vec(), g, n);
}

Eigen::Matrix<double, 7, 1> attitude_match_residual(const StateVector20& s) {
    Eigen::Matrix<double, 7, 1> r;
    r << s.q_t.q1 - s.q_s.q1, s.q_t.q2 - s.q_s.q2, s.q_t.q3 - s.q_s.q3, s.q_t.q4 - s.q_s.q4,
        s.w_t.wx - s.w_s.wx, s.w_t.wy - s.w_s.wy, s.w_t.wz - s.w_s.wz;
    return r;
}

double collision_margin(const StateVector20& s, const DockingGeometry& g) {
    const double rr = g.r_s + g.r_t;
    return s.trans.x * s.trans.x + s.trans.y * s.trans.y + s.trans.z * s.trans.z - rr * rr;
}

double thrust_margin(const ControlVector6& c, const ControlBounds& b) {
    return b.thrust_rhs() - (c.ux * c.ux + c.uy * c.uy + c.uz * c.uz);
}

double running_cost(const ControlVector6& c, const CostWeights& w) {
    return w.l_u * (c.ux * c.ux + c.uy * c.uy + c.uz * c.uz) +
           w.l_m * (c.mx * c.mx + c.my * c.my + c.mz * c.mz);
}

CostBreakdown total_cost(const std::vector<double>& time_grid,
                         const std::vector<Control6>& controls, const CostWeights& w) {
    const size_t nodes = time_grid.size();
    if (nodes < 2 || controls.size() != nodes) {
        throw std::domain_error("total_cost: need >= 2 nodes with matching control count");
    }
    const double t_f = time_grid.back() - time_grid.front();
    const size_t n_intervals = nodes - 1;
    const double dt = t_f / static_cast<double>(n_intervals);
    for (size_t k = 0; k + 1 < nodes; ++k) {
        const double step = time_grid[k + 1] - time_grid[k];
        if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt))) {
            throw std::domain_error("total_cost: non-uniform time grid");
        }
    }

    CostBreakdown out;
    for (size_t k = 0; k < n_intervals; ++k) {
        const Control6& c = controls[k];
        out.u_total += c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
        out.m_total += c[3] * c[3] + c[4] * c[4] + c[5] * c[5];
    }
    out.u_total *= dt;
    out.m_total *= dt;
    out.j = w.l_tf * t_f + w.l_u * out.u_total + w.l_m * out.m_total;
    return out;
}

Eigen::Matrix<double, 3, 20> docking_position_state_jacobian(const State20& s,
                                                             const DockingGeometry& g) {
    Eigen::Matrix<double, 3, 20> jac = Eigen::Matrix<double, 3, 20>::Zero();
    jac.block<3, 3>(0, 0) = -Mat3::Identity();
    const Quaternion q = servicer_quat(s);
    const Vec3 dd = g.d_t - g.d_s;
    for (int a = 0; a < 4; ++a) {
        jac.col(idx::quat_s + a) = rotation_matrix_derivative(q, a).transpose() * dd;
    }
    return jac;
}

Eigen::Matrix<double, 3, 20> docking_velocity_state_jacobian(const State20& s,
                                                             const DockingGeometry& g,
                                                             double n) {
    Eigen::Matrix<double, 3, 20> jac = Eigen::Matrix<double, 3, 20>::Zero();
    const Quaternion q = servicer_quat(s);
    const Mat3 r = rotation_matrix_unchecked(q);
    const Vec3 dd = g.d_t - g.d_s;
    const Vec3 w{s[6], s[7], s[8]};
    const Vec3 p = r.transpose() * dd;
    const Vec3 omega_e = r.transpose() * w - Vec3{0.0, 0.0, n};

    jac.block<3, 3>(0, idx::vel) = -Mat3::Identity();
    jac.block<3, 3>(0, idx::omega_s) = -skew(p) * r.transpose();
    for (int a = 0; a < 4; ++a) {
        const Mat3 dr_t = rotation_matrix_derivative(q, a).transpose();
        jac.col(idx::quat_s + a) = (dr_t * w).cross(p) + omega_e.cross(dr_t * dd);
    }
    return jac;
}

Eigen::Matrix<double, 20, 20> docking_position_hessian_contraction(const Vec3& lambda,
                                                                   const DockingGeometry& g) {
    Eigen::Matrix<double, 20, 20> h = Eigen::Matrix<double, 20, 20>::Zero();
    const Vec3 dd = g.d_t - g.d_s;
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            const Mat3 c_ab = rotation_matrix_second_derivative(a, b);
            h(idx::quat_s + a, idx::quat_s + b) = lambda.dot(c_ab.transpose() * dd);
        }
    }
    return h;
}

Eigen::Matrix<double, 20, 20> docking_velocity_hessian_contraction(const State20& s,
                                                                   const Vec3& lambda,
                                                                   const DockingGeometry& g,
                                                                   double n) {
    Eigen::Matrix<double, 20, 20> h = Eigen::Matrix<double, 20, 20>::Zero();
    const Quaternion q = servicer_quat(s);
    const Mat3 r = rotation_matrix_unchecked(q);
    const Vec3 dd = g.d_t - g.d_s;
    const Vec3 w{s[6], s[7], s[8]};
    const Vec3 p = r.transpose() * dd;
    const Vec3 omega_e = r.transpose() * w - Vec3{0.0, 0.0, n};

    // (ω, q) block: columns are ∂/∂q_a of (∂(λᵀg)/∂ω).
    for (int a = 0; a < 4; ++a) {
        const Mat3 dr = rotation_matrix_derivative(q, a);
        const Vec3 col = dr * (skew(p) * lambda) + r * (skew(dr.transpose() * dd) * lambda);
        h.block<3, 1>(idx::omega_s, idx::quat_s + a) = col;
        h.block<1, 3>(idx::quat_s + a, idx::omega_s) = col.transpose();
    }

    // (q, q) block.
    for (int a = 0; a < 4; ++a) {
        const Mat3 dra_t = rotation_matrix_derivative(q, a).transpose();
        for (int b = 0; b < 4; ++b) {
            const Mat3 drb_t = rotation_matrix_derivative(q, b).transpose();
            const Mat3 c_ab_t = rotation_matrix_second_derivative(a, b).transpose();
            const Vec3 term = (c_ab_t * w).cross(p) + (dra_t * w).cross(drb_t * dd) +
                              (drb_t * w).cross(dra_t * dd) + omega_e.cross(c_ab_t * dd);
            h(idx::quat_s + a, idx::quat_s + b) = lambda.dot(term);
        }
    }
    return h;
}

} // namespace dockopt
