#include "dockopt/transcription.hpp"

#include "dockopt/dynamics.hpp"
#include "dockopt/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace dockopt {

namespace {

/// Structural nonzeros of ∂f/∂x (hollow: the diagonal is always zero).
const std::vector<std::pair<int, int>>& state_jacobian_pattern() {
    static const std::vector<std::pair<int, int>> pattern = [] {
        std::vector<std::pair<int, int>> p = {{0, 3}, {1, 4}, {2, 5}, {3, 0},
                                              {3, 4}, {4, 3}, {5, 2}};
        auto gyro = [&p](int base) {
            p.insert(p.end(), {{base, base + 1},
                               {base, base + 2},
                               {base + 1, base},
                               {base + 1, base + 2},
                               {base + 2, base},
                               {base + 2, base + 1}});
        };
        gyro(idx::omega_s);
        gyro(idx::omega_t);
        auto quat = [&p](int qrow, int wcol) {
            for (int i = 0; i < 4; ++i) {
                for (int j = 0; j < 3; ++j) p.emplace_back(qrow + i, wcol + j);
                for (int j = 0; j < 4; ++j) {
                    if (i != j) p.emplace_back(qrow + i, qrow + j);
                }
            }
        };
        quat(idx::quat_s, idx::omega_s);
        quat(idx::quat_t, idx::omega_t);
        return p;
    }();
    return pattern;
}

/// Lower-triangle structural nonzeros of λᵀ∂²f/∂x∂x.
const std::vector<std::pair<int, int>>& state_hessian_pattern() {
    static const std::vector<std::pair<int, int>> pattern = [] {
        std::vector<std::pair<int, int>> p = {{8, 7}, {8, 6}, {7, 6}, {11, 10}, {11, 9}, {10, 9}};
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 3; ++j) {
                p.emplace_back(idx::quat_s + i, idx::omega_s + j);
                p.emplace_back(idx::quat_t + i, idx::omega_t + j);
            }
        }
        return p;
    }();
    return pattern;
}

} // namespace

Eigen::VectorXd pack(const DecisionLayout& layout, const std::vector<State20>& states,
                     const std::vector<Control6>& controls, double t_f) {
    const size_t nodes = static_cast<size_t>(layout.num_nodes());
    if (states.size() != nodes || controls.size() != nodes) {
        throw std::domain_error("pack: state/control count must equal N+1");
    }
    Eigen::VectorXd z(layout.num_vars());
    for (int k = 0; k < layout.num_nodes(); ++k) {
        z.segment<20>(layout.state_offset(k)) = states[static_cast<size_t>(k)];
        z.segment<6>(layout.control_offset(k)) = controls[static_cast<size_t>(k)];
    }
    z[layout.tf_index()] = t_f / DecisionLayout::tf_scale;
    return z;
}

UnpackedDecision unpack(const DecisionLayout& layout, const Eigen::VectorXd& z) {
    if (z.size() != layout.num_vars()) {
        throw std::domain_error("unpack: decision vector length mismatch");
    }
    UnpackedDecision out;
    out.states.reserve(static_cast<size_t>(layout.num_nodes()));
    out.controls.reserve(static_cast<size_t>(layout.num_nodes()));
    for (int k = 0; k < layout.num_nodes(); ++k) {
        out.states.push_back(z.segment<20>(layout.state_offset(k)));
        out.controls.push_back(z.segment<6>(layout.control_offset(k)));
    }
    out.t_f = z[layout.tf_index()] * DecisionLayout::tf_scale;
    return out;
}

State20 trapezoidal_defect(const StateVector20& x_k, const StateVector20& x_k1,
                           const ControlVector6& u_k, const ControlVector6& u_k1, double dt,
                           const BodyParams& p) {
    if (dt <= 0.0) {
        throw std::domain_error("trapezoidal_defect: step size must be positive");
    }
    const State20 xk = x_k.vec(), xk1 = x_k1.vec();
    return xk1 - xk -
           0.5 * dt *
               (full_derivative_raw(xk, u_k.vec(), p) + full_derivative_raw(xk1, u_k1.vec(), p));
}

struct TranscribedNlp::Data {
    DecisionLayout layout;
    BodyParams params;
    DockingGeometry geom;
    CostWeights weights;
    double thrust_rhs = 0.0;
    double keepout_radius_sq = 0.0; ///< (r_s + r_t + margin)²
    bool collision_enabled = true;
    State20 x0;
    double tf_min = 0.0, tf_max = 0.0;
    double torque_max = 0.0;

    int n() const { return layout.n_intervals; }
    int num_eq() const { return 20 * n() + 33; }
    int num_ineq() const { return (collision_enabled ? layout.num_nodes() : 0) + layout.num_nodes(); }
    int defect_row(int k) const { return 20 + 20 * k; }
    int terminal_row() const { return 20 + 20 * n(); }
    int collision_row(int k) const { return k; }
    int thrust_row(int k) const { return (collision_enabled ? layout.num_nodes() : 0) + k; }

    double terminal_time(const Eigen::VectorXd& z) const {
        return z[layout.tf_index()] * DecisionLayout::tf_scale;
    }
};

namespace {

using Data = TranscribedNlp::Data;

double eval_objective(const Data& d, const Eigen::VectorXd& z) {
    const double t_f = d.terminal_time(z);
    double running = 0.0;
    for (int k = 0; k < d.n(); ++k) {
        const auto u = z.segment<6>(d.layout.control_offset(k));
        running += d.weights.l_u * u.head<3>().squaredNorm() +
                   d.weights.l_m * u.tail<3>().squaredNorm();
    }
    return d.weights.l_tf * t_f + t_f / d.n() * running;
}

Eigen::VectorXd eval_objective_gradient(const Data& d, const Eigen::VectorXd& z) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(d.layout.num_vars());
    const double t_f = d.terminal_time(z);
    const double dt = t_f / d.n();
    double running = 0.0;
    for (int k = 0; k < d.n(); ++k) {
        const int off = d.layout.control_offset(k);
        const auto u = z.segment<6>(off);
        running += d.weights.l_u * u.head<3>().squaredNorm() +
                   d.weights.l_m * u.tail<3>().squaredNorm();
        g.segment<3>(off) = 2.0 * dt * d.weights.l_u * u.head<3>();
        g.segment<3>(off + 3) = 2.0 * dt * d.weights.l_m * u.tail<3>();
    }
    g[d.layout.tf_index()] =
        DecisionLayout::tf_scale * (d.weights.l_tf + running / d.n());
    return g;
}

Eigen::VectorXd eval_equality(const Data& d, const Eigen::VectorXd& z) {
    Eigen::VectorXd c(d.num_eq());
    const double dt = d.terminal_time(z) / d.n();

    c.segment<20>(0) = z.segment<20>(0) - d.x0;

    State20 f_prev = full_derivative_raw(z.segment<20>(d.layout.state_offset(0)),
                                         z.segment<6>(d.layout.control_offset(0)), d.params);
    for (int k = 0; k < d.n(); ++k) {
        const auto xk = z.segment<20>(d.layout.state_offset(k));
        const auto xk1 = z.segment<20>(d.layout.state_offset(k + 1));
        const State20 f_next = full_derivative_raw(
            xk1, z.segment<6>(d.layout.control_offset(k + 1)), d.params);
        c.segment<20>(d.defect_row(k)) = xk1 - xk - 0.5 * dt * (f_prev + f_next);
        f_prev = f_next;
    }

    const State20 xn = z.segment<20>(d.layout.state_offset(d.n()));
    const int rt = d.terminal_row();
    c.segment<4>(rt) = xn.segment<4>(idx::quat_t) - xn.segment<4>(idx::quat_s);
    c.segment<3>(rt + 4) = xn.segment<3>(idx::omega_t) - xn.segment<3>(idx::omega_s);
    c.segment<3>(rt + 7) = docking_position_residual_raw(xn, d.geom);
    c.segment<3>(rt + 10) = docking_velocity_residual_raw(xn, d.geom, d.params.n);
    return c;
}

Eigen::VectorXd eval_inequality(const Data& d, const Eigen::VectorXd& z) {
    Eigen::VectorXd c(d.num_ineq());
    if (d.collision_enabled) {
        for (int k = 0; k <= d.n(); ++k) {
            const auto r = z.segment<3>(d.layout.state_offset(k));
            c[d.collision_row(k)] = r.squaredNorm() - d.keepout_radius_sq;
        }
    }
    for (int k = 0; k <= d.n(); ++k) {
        const auto u = z.segment<3>(d.layout.control_offset(k));
        c[d.thrust_row(k)] = d.thrust_rhs - u.squaredNorm();
    }
    return c;
}

SparseMat eval_eq_jacobian(const Data& d, const Eigen::VectorXd& z) {
    const double t_f = d.terminal_time(z);
    const double dt = t_f / d.n();
    const double scale = DecisionLayout::tf_scale;
    const int tf_col = d.layout.tf_index();

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(200 * static_cast<size_t>(d.n()) + 200);

    for (int i = 0; i < 20; ++i) {
        trips.emplace_back(i, i, 1.0);
    }

    // Per-node derivative and Jacobian caches (each node feeds two
    // intervals).
    std::vector<State20> f(static_cast<size_t>(d.n()) + 1);
    std::vector<Eigen::Matrix<double, 20, 20>> a(static_cast<size_t>(d.n()) + 1);
    for (int k = 0; k <= d.n(); ++k) {
        const auto xk = z.segment<20>(d.layout.state_offset(k));
        const auto uk = z.segment<6>(d.layout.control_offset(k));
        f[static_cast<size_t>(k)] = full_derivative_raw(xk, uk, d.params);
        a[static_cast<size_t>(k)] = full_derivative_state_jacobian(xk, d.params);
    }

    const auto& apat = state_jacobian_pattern();
    const double inv_mass = 1.0 / d.params.mass;
    const double inv_j[3] = {1.0 / d.params.inertia_s.jxx, 1.0 / d.params.inertia_s.jyy,
                             1.0 / d.params.inertia_s.jzz};

    for (int k = 0; k < d.n(); ++k) {
        const int row = d.defect_row(k);
        const int col_xk = d.layout.state_offset(k);
        const int col_xk1 = d.layout.state_offset(k + 1);
        const int col_uk = d.layout.control_offset(k);
        const int col_uk1 = d.layout.control_offset(k + 1);
        const auto& ak = a[static_cast<size_t>(k)];
        const auto& ak1 = a[static_cast<size_t>(k + 1)];

        for (int i = 0; i < 20; ++i) {
            trips.emplace_back(row + i, col_xk + i, -1.0);
            trips.emplace_back(row + i, col_xk1 + i, 1.0);
        }
        for (const auto& [i, j] : apat) {
            trips.emplace_back(row + i, col_xk + j, -0.5 * dt * ak(i, j));
            trips.emplace_back(row + i, col_xk1 + j, -0.5 * dt * ak1(i, j));
        }
        for (int j = 0; j < 3; ++j) {
            trips.emplace_back(row + 3 + j, col_uk + j, -0.5 * dt * inv_mass);
            trips.emplace_back(row + 3 + j, col_uk1 + j, -0.5 * dt * inv_mass);
            trips.emplace_back(row + 6 + j, col_uk + 3 + j, -0.5 * dt * inv_j[j]);
            trips.emplace_back(row + 6 + j, col_uk1 + 3 + j, -0.5 * dt * inv_j[j]);
        }
        const State20 fsum = f[static_cast<size_t>(k)] + f[static_cast<size_t>(k + 1)];
        for (int i = 0; i < 20; ++i) {
            trips.emplace_back(row + i, tf_col, -scale / (2.0 * d.n()) * fsum[i]);
        }
    }

    const int rt = d.terminal_row();
    const int col_xn = d.layout.state_offset(d.n());
    for (int i = 0; i < 4; ++i) {
        trips.emplace_back(rt + i, col_xn + idx::quat_t + i, 1.0);
        trips.emplace_back(rt + i, col_xn + idx::quat_s + i, -1.0);
    }
    for (int i = 0; i < 3; ++i) {
        trips.emplace_back(rt + 4 + i, col_xn + idx::omega_t + i, 1.0);
        trips.emplace_back(rt + 4 + i, col_xn + idx::omega_s + i, -1.0);
    }

    const State20 xn = z.segment<20>(col_xn);
    const auto jac_pos = docking_position_state_jacobian(xn, d.geom);
    const auto jac_vel = docking_velocity_state_jacobian(xn, d.geom, d.params.n);
    for (int i = 0; i < 3; ++i) {
        trips.emplace_back(rt + 7 + i, col_xn + idx::pos + i, jac_pos(i, idx::pos + i));
        for (int j = 0; j < 4; ++j) {
            trips.emplace_back(rt + 7 + i, col_xn + idx::quat_s + j,
                               jac_pos(i, idx::quat_s + j));
        }
        trips.emplace_back(rt + 10 + i, col_xn + idx::vel + i, jac_vel(i, idx::vel + i));
        for (int j = 0; j < 3; ++j) {
            trips.emplace_back(rt + 10 + i, col_xn + idx::omega_s + j,
                               jac_vel(i, idx::omega_s + j));
        }
        for (int j = 0; j < 4; ++j) {
            trips.emplace_back(rt + 10 + i, col_xn + idx::quat_s + j,
                               jac_vel(i, idx::quat_s + j));
        }
    }

    SparseMat jac(d.num_eq(), d.layout.num_vars());
    jac.setFromTriplets(trips.begin(), trips.end());
    return jac;
}

SparseMat eval_ineq_jacobian(const Data& d, const Eigen::VectorXd& z) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(6 * static_cast<size_t>(d.layout.num_nodes()));
    if (d.collision_enabled) {
        for (int k = 0; k <= d.n(); ++k) {
            const int off = d.layout.state_offset(k);
            for (int j = 0; j < 3; ++j) {
                trips.emplace_back(d.collision_row(k), off + j, 2.0 * z[off + j]);
            }
        }
    }
    for (int k = 0; k <= d.n(); ++k) {
        const int off = d.layout.control_offset(k);
        for (int j = 0; j < 3; ++j) {
            trips.emplace_back(d.thrust_row(k), off + j, -2.0 * z[off + j]);
        }
    }
    SparseMat jac(d.num_ineq(), d.layout.num_vars());
    jac.setFromTriplets(trips.begin(), trips.end());
    return jac;
}

SparseMat eval_lagrangian_hessian(const Data& d, const Eigen::VectorXd& z, double sigma,
                                  const Eigen::VectorXd& lam_eq, const Eigen::VectorXd& lam_ineq) {
    const double t_f = d.terminal_time(z);
    const double dt = t_f / d.n();
    const double scale = DecisionLayout::tf_scale;
    const int tf_row = d.layout.tf_index();

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(80 * static_cast<size_t>(d.n()) + 100);

    // Objective curvature: control diagonal and the (t_f, u) coupling.
    const double wdiag[6] = {d.weights.l_u, d.weights.l_u, d.weights.l_u,
                             d.weights.l_m, d.weights.l_m, d.weights.l_m};
    for (int k = 0; k <= d.n(); ++k) {
        const int off = d.layout.control_offset(k);
        const bool in_cost = k < d.n();
        for (int j = 0; j < 6; ++j) {
            trips.emplace_back(off + j, off + j,
                               in_cost ? sigma * 2.0 * dt * wdiag[j] : 0.0);
            trips.emplace_back(tf_row, off + j,
                               in_cost ? sigma * (scale / d.n()) * 2.0 * wdiag[j] * z[off + j]
                                       : 0.0);
        }
    }

    // Defect curvature.
    const auto& hpat = state_hessian_pattern();
    std::vector<Eigen::Matrix<double, 20, 20>> a(static_cast<size_t>(d.n()) + 1);
    for (int k = 0; k <= d.n(); ++k) {
        a[static_cast<size_t>(k)] =
            full_derivative_state_jacobian(z.segment<20>(d.layout.state_offset(k)), d.params);
    }
    for (int k = 0; k < d.n(); ++k) {
        const State20 lam = lam_eq.segment<20>(d.defect_row(k));
        const Eigen::Matrix<double, 20, 20> t_lam =
            full_derivative_hessian_contraction(lam, d.params);
        for (int node : {k, k + 1}) {
            const int off = d.layout.state_offset(node);
            for (const auto& [i, j] : hpat) {
                trips.emplace_back(off + i, off + j, -0.5 * dt * t_lam(i, j));
            }
            const State20 at_lam = a[static_cast<size_t>(node)].transpose() * lam;
            for (int i = 0; i < 20; ++i) {
                trips.emplace_back(tf_row, off + i, -scale / (2.0 * d.n()) * at_lam[i]);
            }
        }
        const double bt_lam[6] = {lam[3] / d.params.mass,          lam[4] / d.params.mass,
                                  lam[5] / d.params.mass,          lam[6] / d.params.inertia_s.jxx,
                                  lam[7] / d.params.inertia_s.jyy, lam[8] / d.params.inertia_s.jzz};
        for (int node : {k, k + 1}) {
            const int off = d.layout.control_offset(node);
            for (int j = 0; j < 6; ++j) {
                trips.emplace_back(tf_row, off + j, -scale / (2.0 * d.n()) * bt_lam[j]);
            }
        }
    }

    // Terminal docking curvature at node N.
    {
        const int rt = d.terminal_row();
        const int off = d.layout.state_offset(d.n());
        const State20 xn = z.segment<20>(off);
        const Vec3 lam_pos = lam_eq.segment<3>(rt + 7);
        const Vec3 lam_vel = lam_eq.segment<3>(rt + 10);
        const Eigen::Matrix<double, 20, 20> h =
            docking_position_hessian_contraction(lam_pos, d.geom) +
            docking_velocity_hessian_contraction(xn, lam_vel, d.geom, d.params.n);
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j <= i; ++j) {
                trips.emplace_back(off + idx::quat_s + i, off + idx::quat_s + j,
                                   h(idx::quat_s + i, idx::quat_s + j));
            }
            for (int j = 0; j < 3; ++j) {
                trips.emplace_back(off + idx::quat_s + i, off + idx::omega_s + j,
                                   h(idx::quat_s + i, idx::omega_s + j));
            }
        }
    }

    // Inequality curvature: keep-out spheres and thrust norms.
    if (d.collision_enabled) {
        for (int k = 0; k <= d.n(); ++k) {
            const int off = d.layout.state_offset(k);
            const double lam = lam_ineq[d.collision_row(k)];
            for (int j = 0; j < 3; ++j) {
                trips.emplace_back(off + j, off + j, 2.0 * lam);
            }
        }
    }
    for (int k = 0; k <= d.n(); ++k) {
        const int off = d.layout.control_offset(k);
        const double lam = lam_ineq[d.thrust_row(k)];
        for (int j = 0; j < 3; ++j) {
            trips.emplace_back(off + j, off + j, -2.0 * lam);
        }
    }

    SparseMat h(d.layout.num_vars(), d.layout.num_vars());
    h.setFromTriplets(trips.begin(), trips.end());
    return h;
}

std::vector<std::pair<int, int>> pattern_of(const SparseMat& m) {
    std::set<std::pair<int, int>> coords;
    for (int k = 0; k < m.outerSize(); ++k) {
        for (SparseMat::InnerIterator it(m, k); it; ++it) {
            coords.emplace(it.row(), it.col());
        }
    }
    return {coords.begin(), coords.end()};
}

} // namespace

TranscribedNlp::TranscribedNlp(const ScenarioConfig& scenario, int n_intervals) {
    if (n_intervals < 2) {
        throw std::domain_error("transcribe: need at least 2 grid intervals");
    }
    scenario.validate();

    auto data = std::make_shared<Data>();
    data->layout.n_intervals = n_intervals;
    data->params = scenario.body_params();
    data->geom = scenario.docking_geometry();
    data->weights = scenario.weights;
    data->thrust_rhs = scenario.bounds.thrust_rhs();
    const double rr = data->geom.r_s + data->geom.r_t + scenario.safety_margin;
    data->keepout_radius_sq = rr * rr;
    data->collision_enabled = scenario.collision_constraint_enabled;
    data->x0 = scenario.initial_state().vec();
    data->tf_min = scenario.tf_min;
    data->tf_max = scenario.tf_max;
    data->torque_max = scenario.bounds.m_max;

    data_ = data;
    layout_ = data->layout;
    scenario_hash_ = scenario.hash();

    problem_.num_vars = layout_.num_vars();
    problem_.num_eq = data->num_eq();
    problem_.num_ineq = data->num_ineq();

    problem_.lower_bounds =
        Eigen::VectorXd::Constant(problem_.num_vars, -NlpProblem::infinity());
    problem_.upper_bounds =
        Eigen::VectorXd::Constant(problem_.num_vars, NlpProblem::infinity());
    for (int k = 0; k <= n_intervals; ++k) {
        const int off = layout_.control_offset(k);
        for (int j = 3; j < 6; ++j) {
            problem_.lower_bounds[off + j] = -data->torque_max;
            problem_.upper_bounds[off + j] = data->torque_max;
        }
    }
    problem_.lower_bounds[layout_.tf_index()] = data->tf_min / DecisionLayout::tf_scale;
    problem_.upper_bounds[layout_.tf_index()] = data->tf_max / DecisionLayout::tf_scale;

    problem_.objective = [data](const Eigen::VectorXd& z) { return eval_objective(*data, z); };
    problem_.objective_gradient = [data](const Eigen::VectorXd& z) {
        return eval_objective_gradient(*data, z);
    };
    problem_.equality = [data](const Eigen::VectorXd& z) { return eval_equality(*data, z); };
    problem_.inequality = [data](const Eigen::VectorXd& z) { return eval_inequality(*data, z); };
    problem_.equality_jacobian = [data](const Eigen::VectorXd& z) {
        return eval_eq_jacobian(*data, z);
    };
    problem_.inequality_jacobian = [data](const Eigen::VectorXd& z) {
        return eval_ineq_jacobian(*data, z);
    };
    problem_.lagrangian_hessian = [data](const Eigen::VectorXd& z, double sigma,
                                         const Eigen::VectorXd& le, const Eigen::VectorXd& li) {
        return eval_lagrangian_hessian(*data, z, sigma, le, li);
    };

    // Structural patterns, extracted once from a reference evaluation
    // (explicit zeros are kept by the assembly, so every structural
    // coordinate is present regardless of the reference point).
    Eigen::VectorXd z_ref = Eigen::VectorXd::Zero(problem_.num_vars);
    z_ref[layout_.tf_index()] = 1.0;
    problem_.eq_jacobian_pattern = pattern_of(eval_eq_jacobian(*data, z_ref));
    problem_.ineq_jacobian_pattern = pattern_of(eval_ineq_jacobian(*data, z_ref));
}

bool TranscribedNlp::collision_enabled() const { return data_->collision_enabled; }

double TranscribedNlp::quaternion_drift(const Eigen::VectorXd& z) const {
    double drift = 0.0;
    for (int k = 0; k <= layout_.n_intervals; ++k) {
        const int off = layout_.state_offset(k);
        drift = std::max(drift, std::abs(z.segment<4>(off + idx::quat_s).squaredNorm() - 1.0));
        drift = std::max(drift, std::abs(z.segment<4>(off + idx::quat_t).squaredNorm() - 1.0));
    }
    return drift;
}

const BodyParams& TranscribedNlp::body_params() const { return data_->params; }
const DockingGeometry& TranscribedNlp::docking_geometry() const { return data_->geom; }
const CostWeights& TranscribedNlp::weights() const { return data_->weights; }

TranscribedNlp transcribe(const ScenarioConfig& scenario, int n_intervals) {
    return TranscribedNlp(scenario, n_intervals);
}

namespace {

/// Geodesic interpolation on the unit-quaternion sphere (shortest arc).
Vec4 slerp(const Vec4& a, Vec4 b, double t) {
    double dot = a.dot(b);
    if (dot < 0.0) {
        b = -b;
        dot = -dot;
    }
    dot = std::min(dot, 1.0);
    const double angle = std::acos(dot);
    if (angle < 1e-9) {
        return ((1.0 - t) * a + t * b).normalized();
    }
    return (std::sin((1.0 - t) * angle) * a + std::sin(t * angle) * b) / std::sin(angle);
}

} // namespace

Eigen::VectorXd initial_guess(const ScenarioConfig& scenario, int n_intervals,
                              double t_f_guess) {
    scenario.validate();
    if (n_intervals < 2) {
        throw std::domain_error("initial_guess: need at least 2 grid intervals");
    }
    DecisionLayout layout{n_intervals};
    const BodyParams params = scenario.body_params();
    const State20 x0 = scenario.initial_state().vec();

    // Torque-free propagation to t_f_guess; the target attitude chain is
    // taken from it node by node (a spinning target sweeps through many
    // revolutions, where componentwise interpolation would collapse the
    // quaternion norm and poison the early defect residuals).
    const auto rhs = [&params](double, const State20& x) {
        return full_derivative_raw(x, Control6::Zero(), params);
    };
    const std::vector<State20> free_path =
        integrate_rk45_grid(rhs, x0, 0.0, t_f_guess, n_intervals + 1);
    const State20& x_free = free_path.back();

    // Docking-consistent terminal node: both attitudes and rates equal the
    // propagated target state, position/velocity on the docking condition.
    State20 xn = State20::Zero();
    const Quaternion q_n =
        Quaternion::from_vec(x_free.segment<4>(idx::quat_t)).normalized();
    xn.segment<4>(idx::quat_s) = q_n.vec();
    xn.segment<4>(idx::quat_t) = q_n.vec();
    xn.segment<3>(idx::omega_s) = x_free.segment<3>(idx::omega_t);
    xn.segment<3>(idx::omega_t) = x_free.segment<3>(idx::omega_t);

    const Mat3 r_n = rotation_matrix_unchecked(q_n);
    const DockingGeometry geom = scenario.docking_geometry();
    const Vec3 p_dock = r_n.transpose() * (geom.d_t - geom.d_s);
    const Vec3 omega_e =
        r_n.transpose() * xn.segment<3>(idx::omega_s) - Vec3{0.0, 0.0, params.n};
    xn.segment<3>(idx::pos) = p_dock;
    xn.segment<3>(idx::vel) = omega_e.cross(p_dock);

    std::vector<State20> states(static_cast<size_t>(layout.num_nodes()));
    for (int k = 0; k <= n_intervals; ++k) {
        const double a = static_cast<double>(k) / n_intervals;
        State20 xk = (1.0 - a) * x0 + a * xn;
        // Servicer attitude along the geodesic, target along its true
        // free-motion path.
        xk.segment<4>(idx::quat_s) =
            slerp(x0.segment<4>(idx::quat_s), xn.segment<4>(idx::quat_s), a);
        xk.segment<4>(idx::quat_t) =
            free_path[static_cast<size_t>(k)].segment<4>(idx::quat_t).normalized();
        states[static_cast<size_t>(k)] = xk;
    }
    states.back() = xn;
    std::vector<Control6> controls(static_cast<size_t>(layout.num_nodes()), Control6::Zero());
    return pack(layout, states, controls, t_f_guess);
}

} // namespace dockopt
