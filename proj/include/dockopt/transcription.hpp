#pragma once

#include "dockopt/constraints.hpp"
#include "dockopt/nlp.hpp"
#include "dockopt/scenario.hpp"
#include "dockopt/types.hpp"

#include <memory>
#include <string>
#include <vector>

namespace dockopt {

/// Flat layout of the NLP decision vector:
///   [states node 0..N | controls node 0..N | t_f (scaled)].
/// The terminal time is stored divided by tf_scale; the factor is a power
/// of two so pack/unpack round-trip bit-exactly.
struct DecisionLayout {
    int n_intervals = 0; ///< N

    static constexpr double tf_scale = 128.0;

    int num_nodes() const { return n_intervals + 1; }
    int num_vars() const { return 26 * num_nodes() + 1; }
    int state_offset(int k) const { return 20 * k; }
    int control_offset(int k) const { return 20 * num_nodes() + 6 * k; }
    int tf_index() const { return num_vars() - 1; }
};

struct UnpackedDecision {
    std::vector<State20> states;
    std::vector<Control6> controls;
    double t_f = 0.0;
};

/// Assemble the decision vector. All spans must hold N+1 entries.
Eigen::VectorXd pack(const DecisionLayout& layout, const std::vector<State20>& states,
                     const std::vector<Control6>& controls, double t_f);

/// Split a decision vector back into state/control trajectories and t_f.
UnpackedDecision unpack(const DecisionLayout& layout, const Eigen::VectorXd& z);

/// Implicit-trapezoidal integration residual over one interval,
///   x_{k+1} − x_k − dt/2·(f(x_k,u_k) + f(x_{k+1},u_{k+1})).
State20 trapezoidal_defect(const StateVector20& x_k, const StateVector20& x_k1,
                           const ControlVector6& u_k, const ControlVector6& u_k1, double dt,
                           const BodyParams& p);

/// The full direct transcription of one scenario on a uniform N-interval
/// grid. Equality ordering: initial condition (20), trapezoidal defects
/// (20·N), terminal conditions (13: quaternion match, rate match, docking
/// position, docking velocity). Inequality ordering: collision margin per
/// node (when enabled), then thrust margin per node.
class TranscribedNlp {
public:
    TranscribedNlp(const ScenarioConfig& scenario, int n_intervals);

    const NlpProblem& problem() const { return problem_; }
    const DecisionLayout& layout() const { return layout_; }

    int n_intervals() const { return layout_.n_intervals; }
    int num_defect_equalities() const { return 20 * layout_.n_intervals; }
    int num_boundary_equalities() const { return 33; }
    int num_equalities() const { return problem_.num_eq; }
    int num_inequalities() const { return problem_.num_ineq; }
    bool collision_enabled() const;
    const std::string& scenario_hash() const { return scenario_hash_; }

    /// t_f from a decision vector.
    double terminal_time(const Eigen::VectorXd& z) const {
        return z[layout_.tf_index()] * DecisionLayout::tf_scale;
    }

    /// Max |‖q‖²−1| over all quaternion nodes of both bodies.
    double quaternion_drift(const Eigen::VectorXd& z) const;

    const BodyParams& body_params() const;
    const DockingGeometry& docking_geometry() const;
    const CostWeights& weights() const;

    struct Data;

private:
    std::shared_ptr<const Data> data_;
    DecisionLayout layout_;
    NlpProblem problem_;
    std::string scenario_hash_;
};

/// Convenience wrapper mirroring the scenario-level contract.
TranscribedNlp transcribe(const ScenarioConfig& scenario, int n_intervals);

/// Linear-interpolation start point: states from x₀ to a docking-consistent
/// terminal state (target attitude propagated torque-free to t_f_guess,
/// servicer attitude/rates copied from it, relative position and velocity
/// docking-consistent), zero controls, quaternion nodes renormalized.
Eigen::VectorXd initial_guess(const ScenarioConfig& scenario, int n_intervals,
                              double t_f_guess = 400.0);

} // namespace dockopt
