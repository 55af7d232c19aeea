#pragma once

#include "dockopt/constraints.hpp"
#include "dockopt/nlp.hpp"
#include "dockopt/scenario.hpp"
#include "dockopt/transcription.hpp"
#include "dockopt/types.hpp"

#include <string>
#include <vector>

namespace dockopt {

/// Euler angles in y-x-z order (attitude matrix Ry(φ)·Rx(θ)·Rz(ψ)).
struct EulerYxz {
    double phi = 0.0;
    double theta = 0.0;
    double psi = 0.0;
    bool gimbal_degenerate = false; ///< |sin θ| within 1e−9 of 1; ψ forced to 0
};

/// Decompose the attitude (body-to-reference rotation Rᵀ(q)) into y-x-z
/// Euler angles.
EulerYxz euler_yxz_from_quaternion(const Quaternion& q);

/// Inverse conversion; the result reproduces the attitude (and the original
/// quaternion up to overall sign).
Quaternion quaternion_from_euler_yxz(double phi, double theta, double psi);

/// Unit quaternion of a rotation matrix in this project's convention
/// (canonicalized to nonnegative scalar part).
Quaternion quaternion_from_rotation_matrix(const Mat3& r);

/// A solved or propagated trajectory on a uniform grid, with the
/// post-processed quantities the exporters and reports consume.
/// Quaternion states are renormalized to unit length (the raw solver drift
/// is kept in raw_quaternion_drift).
struct SolutionTrajectory {
    double t_f = 0.0;
    std::vector<double> time;
    std::vector<StateVector20> states;
    std::vector<ControlVector6> controls;
    std::vector<Vec3> thrust_body; ///< R(q_s)·u per node
    std::vector<EulerYxz> euler_s;
    std::vector<EulerYxz> euler_t;
    std::vector<double> collision_margins;
    CostBreakdown cost;

    bool solved = false; ///< true when produced by an optimization run
    SolveReport report;
    double raw_quaternion_drift = 0.0;
    double export_eq_violation = 0.0;   ///< max |c_E| after renormalization
    double export_ineq_margin = 0.0;    ///< min inequality margin after renormalization
    std::string scenario_hash;

    int n_intervals() const { return static_cast<int>(time.size()) - 1; }
};

/// Evaluate total_cost on the trajectory's grid and controls.
CostBreakdown total_cost(const SolutionTrajectory& traj, const CostWeights& w);

/// Post-process a solver result into a SolutionTrajectory.
SolutionTrajectory build_trajectory(const TranscribedNlp& nlp, const ScenarioConfig& scenario,
                                    const SolveReport& report);

/// Post-process a plain state/control history (propagation runs).
SolutionTrajectory build_trajectory(const ScenarioConfig& scenario,
                                    const std::vector<State20>& states,
                                    const std::vector<Control6>& controls, double t_f);

} // namespace dockopt
