#pragma once

#include "dockopt/constraints.hpp"
#include "dockopt/dynamics.hpp"
#include "dockopt/types.hpp"

#include <string>

namespace dockopt {

/// Raised for unparsable or invalid scenario files; the message names the
/// offending field or invariant.
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One rigid body's scenario block.
struct BodyConfig {
    InertiaTensor inertia;
    Vec3 docking_point = Vec3::Zero(); ///< body-fixed [m]
    double safety_radius = 1.0;        ///< [m]
    Quaternion q0 = Quaternion::identity();
    AngularVelocity omega0; ///< [rad/s] after conversion
};

/// Complete problem definition: constants, initial conditions, bounds,
/// weights and discretization choices.
struct ScenarioConfig {
    double gm = 398e12;    ///< gravitational parameter [m³/s²]
    double orbit_radius = 7'071'000.0; ///< [m]
    double servicer_mass = 200.0;      ///< [kg]

    BodyConfig servicer;
    BodyConfig target;

    TranslationalState initial_relative; ///< initial (r, ṙ)

    ControlBounds bounds;
    double tf_min = 10.0;   ///< [s]
    double tf_max = 2000.0; ///< [s]

    CostWeights weights;
    int steps = 370; ///< grid interval count N

    bool collision_constraint_enabled = true;
    double safety_margin = 0.0; ///< tightens r_s + r_t in the path constraint [m]

    double mean_motion_value() const { return mean_motion(gm, orbit_radius); }

    BodyParams body_params() const {
        BodyParams p;
        p.mass = servicer_mass;
        p.inertia_s = servicer.inertia;
        p.inertia_t = target.inertia;
        p.n = mean_motion_value();
        return p;
    }

    DockingGeometry docking_geometry() const {
        return {servicer.docking_point, target.docking_point, servicer.safety_radius,
                target.safety_radius};
    }

    StateVector20 initial_state() const {
        StateVector20 s;
        s.trans = initial_relative;
        s.w_s = servicer.omega0;
        s.w_t = target.omega0;
        s.q_s = servicer.q0;
        s.q_t = target.q0;
        return s;
    }

    /// Check every structural invariant; throws ScenarioError naming the
    /// violated one.
    void validate() const;

    /// FNV-1a hash of the canonical serialized form; identifies the scenario
    /// in solver metadata and reports.
    std::string hash() const;

    /// Canonical JSON serialization (sorted keys, full precision).
    std::string canonical_json() const;
};

/// Parse and validate a scenario file (JSON, // comments allowed).
ScenarioConfig load_scenario(const std::string& path);

/// Parse and validate scenario text directly.
ScenarioConfig parse_scenario(const std::string& text, const std::string& origin = "<string>");

} // namespace dockopt
