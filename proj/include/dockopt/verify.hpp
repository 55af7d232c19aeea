#pragma once

#include "dockopt/scenario.hpp"

#include <string>
#include <vector>

namespace dockopt {

struct VerifyCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Oracle and invariant suite for the dynamics layer:
///  - zero-control propagation vs. the closed-form relative-motion solution
///  - torque-free rotational energy / momentum-magnitude conservation
///  - stable principal-axis spin invariance
///  - out-of-plane decoupling
///  - rotation-matrix round trips and quaternion-rate orthogonality
///  - second-order convergence of the trapezoidal propagator
std::vector<VerifyCheck> run_oracle_suite(const ScenarioConfig& scenario, unsigned seed = 42,
                                          int num_random_states = 100);

} // namespace dockopt
