#pragma once

#include "dockopt/trajectory.hpp"

#include <string>

namespace dockopt {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Write the per-node trajectory CSV. Column order:
///   k, t, x, y, z, vx, vy, vz, wSx..wSz, wTx..wTz, qS1..qS4, qT1..qT4,
///   ux, uy, uz, u1, u2, u3, mx, my, mz, phiS, thetaS, psiS,
///   phiT, thetaT, psiT, collision_margin, gimbalS, gimbalT.
/// Values are encoded with 17 significant digits and round-trip exactly.
/// The write is atomic (temp file + rename).
void export_trajectory(const SolutionTrajectory& traj, const std::string& path);

/// Read a trajectory CSV back. Cost and scenario-derived fields are
/// recomputed when a scenario is supplied to the caller afterwards; the
/// numeric node data round-trips bit-exactly.
SolutionTrajectory import_trajectory(const std::string& path);

/// Write the human-readable run report (t_f, cost breakdown, solver
/// diagnostics, KKT residuals, quaternion drift).
void export_report(const SolutionTrajectory& traj, const std::string& path);

/// Render the report text without touching the filesystem.
std::string format_report(const SolutionTrajectory& traj);

/// Write the plot-ready series (position/thrust, attitude/rates/torques,
/// 3D path with keep-out margin) under dir.
void export_plot_data(const SolutionTrajectory& traj, const std::string& dir);

} // namespace dockopt
