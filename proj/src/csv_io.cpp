#include "dockopt/csv_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace dockopt {

namespace {

namespace fs = std::filesystem;

const char* kHeader =
    "k,t,x,y,z,vx,vy,vz,wSx,wSy,wSz,wTx,wTy,wTz,qS1,qS2,qS3,qS4,qT1,qT2,qT3,qT4,"
    "ux,uy,uz,u1,u2,u3,mx,my,mz,phiS,thetaS,psiS,phiT,thetaT,psiT,collision_margin,"
    "gimbalS,gimbalT";

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Write-then-rename so readers never observe a partial file.
void atomic_write(const std::string& path, const std::string& content) {
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open for writing: " + tmp.string());
        }
        out << content;
        if (!out.good()) {
            throw IoError("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        throw IoError("rename failed for " + target.string() + ": " + ec.message());
    }
}

std::vector<double> split_row(const std::string& line, const std::string& path, size_t lineno) {
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            vals.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw IoError(path + ":" + std::to_string(lineno) + ": non-numeric cell '" + cell +
                          "'");
        }
    }
    return vals;
}

} // namespace

void export_trajectory(const SolutionTrajectory& traj, const std::string& path) {
    std::ostringstream out;
    out << kHeader << '\n';
    const size_t nodes = traj.states.size();
    for (size_t k = 0; k < nodes; ++k) {
        const StateVector20& s = traj.states[k];
        const ControlVector6& c = traj.controls[k];
        const Vec3& ub = traj.thrust_body[k];
        const EulerYxz& es = traj.euler_s[k];
        const EulerYxz& et = traj.euler_t[k];
        out << k << ',' << fmt(traj.time[k]);
        for (double v : {s.trans.x, s.trans.y, s.trans.z, s.trans.vx, s.trans.vy, s.trans.vz,
                         s.w_s.wx, s.w_s.wy, s.w_s.wz, s.w_t.wx, s.w_t.wy, s.w_t.wz,
                         s.q_s.q1, s.q_s.q2, s.q_s.q3, s.q_s.q4,
                         s.q_t.q1, s.q_t.q2, s.q_t.q3, s.q_t.q4,
                         c.ux, c.uy, c.uz, ub[0], ub[1], ub[2], c.mx, c.my, c.mz,
                         es.phi, es.theta, es.psi, et.phi, et.theta, et.psi,
                         traj.collision_margins[k]}) {
            out << ',' << fmt(v);
        }
        out << ',' << (es.gimbal_degenerate ? 1 : 0) << ',' << (et.gimbal_degenerate ? 1 : 0)
            << '\n';
    }
    atomic_write(path, out.str());
}

SolutionTrajectory import_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open trajectory file: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError(path + ": empty file");
    }
    if (line != kHeader) {
        throw IoError(path + ": unexpected header row");
    }

    SolutionTrajectory traj;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::vector<double> v = split_row(line, path, lineno);
        if (v.size() != 40) {
            throw IoError(path + ":" + std::to_string(lineno) + ": expected 40 columns, got " +
                          std::to_string(v.size()));
        }
        traj.time.push_back(v[1]);
        StateVector20 s;
        s.trans = {v[2], v[3], v[4], v[5], v[6], v[7]};
        s.w_s = {v[8], v[9], v[10]};
        s.w_t = {v[11], v[12], v[13]};
        s.q_s = {v[14], v[15], v[16], v[17]};
        s.q_t = {v[18], v[19], v[20], v[21]};
        traj.states.push_back(s);
        traj.controls.push_back({v[22], v[23], v[24], v[28], v[29], v[30]});
        traj.thrust_body.push_back({v[25], v[26], v[27]});
        traj.euler_s.push_back({v[31], v[32], v[33], v[38] != 0.0});
        traj.euler_t.push_back({v[34], v[35], v[36], v[39] != 0.0});
        traj.collision_margins.push_back(v[37]);
    }
    if (traj.time.size() < 2) {
        throw IoError(path + ": fewer than two data rows");
    }
    traj.t_f = traj.time.back();
    return traj;
}

std::string format_report(const SolutionTrajectory& traj) {
    std::ostringstream out;
    out.precision(12);
    out << "docking trajectory report\n";
    out << "=========================\n";
    out << "scenario hash        : " << traj.scenario_hash << "\n";
    out << "grid intervals N     : " << traj.n_intervals() << "\n";
    out << "t_f [s]              : " << traj.t_f << "\n";
    out << "J                    : " << traj.cost.j << "\n";
    out << "u_total              : " << traj.cost.u_total << "\n";
    out << "m_total              : " << traj.cost.m_total << "\n";
    double min_margin = traj.collision_margins.empty() ? 0.0 : traj.collision_margins[0];
    for (double m : traj.collision_margins) min_margin = std::min(min_margin, m);
    out << "min collision margin : " << min_margin << " m^2\n";
    if (traj.solved) {
        const SolveReport& r = traj.report;
        out << "solver status        : " << to_string(r.status) << "\n";
        out << "iterations           : " << r.iterations << "\n";
        out << "wall time [s]        : " << r.wall_time_seconds << "\n";
        out << "objective (solver)   : " << r.objective << "\n";
        out << "kkt stationarity     : " << r.kkt.stationarity << "\n";
        out << "kkt feasibility eq   : " << r.kkt.feasibility_eq << "\n";
        out << "kkt feasibility ineq : " << r.kkt.feasibility_ineq << "\n";
        out << "kkt complementarity  : " << r.kkt.complementarity << "\n";
        out << "mu final             : " << r.mu_final << "\n";
        out << "max quaternion drift : " << traj.raw_quaternion_drift << "\n";
        out << "export eq violation  : " << traj.export_eq_violation << "\n";
        out << "export ineq margin   : " << traj.export_ineq_margin << "\n";
        if (!r.message.empty()) {
            out << "message              : " << r.message << "\n";
        }
    }
    return out.str();
}

void export_report(const SolutionTrajectory& traj, const std::string& path) {
    atomic_write(path, format_report(traj));
}

void export_plot_data(const SolutionTrajectory& traj, const std::string& dir) {
    const size_t nodes = traj.states.size();

    std::ostringstream fig1;
    fig1 << "t,x,y,z,ux,uy,uz,u1,u2,u3\n";
    for (size_t k = 0; k < nodes; ++k) {
        const auto& s = traj.states[k];
        const auto& c = traj.controls[k];
        const auto& ub = traj.thrust_body[k];
        fig1 << fmt(traj.time[k]);
        for (double v : {s.trans.x, s.trans.y, s.trans.z, c.ux, c.uy, c.uz, ub[0], ub[1], ub[2]}) {
            fig1 << ',' << fmt(v);
        }
        fig1 << '\n';
    }
    atomic_write(dir + "/fig1_position_thrust.csv", fig1.str());

    std::ostringstream fig2;
    fig2 << "t,phiS,thetaS,psiS,phiT,thetaT,psiT,wSx,wSy,wSz,wTx,wTy,wTz,mx,my,mz\n";
    for (size_t k = 0; k < nodes; ++k) {
        const auto& s = traj.states[k];
        const auto& c = traj.controls[k];
        fig2 << fmt(traj.time[k]);
        for (double v : {traj.euler_s[k].phi, traj.euler_s[k].theta, traj.euler_s[k].psi,
                         traj.euler_t[k].phi, traj.euler_t[k].theta, traj.euler_t[k].psi,
                         s.w_s.wx, s.w_s.wy, s.w_s.wz, s.w_t.wx, s.w_t.wy, s.w_t.wz,
                         c.mx, c.my, c.mz}) {
            fig2 << ',' << fmt(v);
        }
        fig2 << '\n';
    }
    atomic_write(dir + "/fig2_attitude.csv", fig2.str());

    std::ostringstream fig3;
    fig3 << "x,y,z,collision_margin\n";
    for (size_t k = 0; k < nodes; ++k) {
        const auto& s = traj.states[k];
        fig3 << fmt(s.trans.x) << ',' << fmt(s.trans.y) << ',' << fmt(s.trans.z) << ','
             << fmt(traj.collision_margins[k]) << '\n';
    }
    atomic_write(dir + "/fig3_path.csv", fig3.str());
}

} // namespace dockopt
