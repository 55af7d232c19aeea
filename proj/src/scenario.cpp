#include "dockopt/scenario.hpp"

#include "dockopt/dynamics.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace dockopt {

using nlohmann::json;

namespace {

const json& require(const json& j, const std::string& key, const std::string& context) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw ScenarioError(context + ": missing field '" + key + "'");
    }
    return *it;
}

double require_number(const json& j, const std::string& key, const std::string& context) {
    const json& v = require(j, key, context);
    if (!v.is_number()) {
        throw ScenarioError(context + ": field '" + key + "' must be a number");
    }
    return v.get<double>();
}

Vec3 require_vec3(const json& j, const std::string& key, const std::string& context) {
    const json& v = require(j, key, context);
    if (!v.is_array() || v.size() != 3) {
        throw ScenarioError(context + ": field '" + key + "' must be an array of 3 numbers");
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

Vec4 require_vec4(const json& j, const std::string& key, const std::string& context) {
    const json& v = require(j, key, context);
    if (!v.is_array() || v.size() != 4) {
        throw ScenarioError(context + ": field '" + key + "' must be an array of 4 numbers");
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()};
}

InertiaTensor parse_inertia(const json& j, const std::string& context) {
    InertiaTensor t;
    t.jxx = require_number(j, "xx_kgm2", context);
    t.jyy = require_number(j, "yy_kgm2", context);
    t.jzz = require_number(j, "zz_kgm2", context);
    return t;
}

BodyConfig parse_body(const json& j, const std::string& context) {
    BodyConfig b;
    b.inertia = parse_inertia(require(j, "inertia", context), context + ".inertia");
    b.docking_point = require_vec3(j, "docking_point_body_m", context);
    b.safety_radius = require_number(j, "safety_radius_m", context);

    const Vec4 q = require_vec4(j, "q0", context);
    const double norm = q.norm();
    if (!(norm > 1e-12) || !std::isfinite(norm)) {
        throw ScenarioError(context + ": q0 has zero or non-finite norm");
    }
    b.q0 = Quaternion::from_vec(q / norm);

    const Vec3 w_deg = require_vec3(j, "omega0_deg_per_s", context);
    b.omega0 = AngularVelocity::from_vec(w_deg * deg_per_s_to_rad);
    return b;
}

} // namespace

void ScenarioConfig::validate() const {
    if (!(gm > 0.0)) throw ScenarioError("scenario: orbit.gm_m3_per_s2 must be positive");
    if (!(orbit_radius > 0.0)) throw ScenarioError("scenario: orbit.radius_m must be positive");
    if (!(servicer_mass > 0.0)) throw ScenarioError("scenario: servicer.mass_kg must be positive");
    if (!servicer.inertia.valid()) {
        throw ScenarioError("scenario: servicer inertia moments must be positive");
    }
    if (!target.inertia.valid()) {
        throw ScenarioError("scenario: target inertia moments must be positive");
    }
    if (!docking_geometry().valid()) {
        throw ScenarioError("scenario: safety radii must be positive and the docking distance "
                            "|d_t - d_s| must be at least r_s + r_t");
    }
    if (!bounds.valid()) {
        throw ScenarioError("scenario: bounds.u_max and bounds.m_max_nm must be positive");
    }
    if (!(tf_min > 0.0) || !(tf_max > tf_min)) {
        throw ScenarioError("scenario: need 0 < tf_min_s < tf_max_s");
    }
    if (!weights.valid()) {
        throw ScenarioError("scenario: weights must be nonnegative and not all zero");
    }
    if (steps < 2) {
        throw ScenarioError("scenario: discretization.steps must be at least 2");
    }
    if (safety_margin < 0.0) {
        throw ScenarioError("scenario: options.safety_margin_m must be nonnegative");
    }
    if (!servicer.q0.is_unit(1e-9) || !target.q0.is_unit(1e-9)) {
        throw ScenarioError("scenario: initial quaternions failed normalization");
    }
    for (double v : {initial_relative.x, initial_relative.y, initial_relative.z,
                     initial_relative.vx, initial_relative.vy, initial_relative.vz}) {
        if (!std::isfinite(v)) {
            throw ScenarioError("scenario: initial relative state must be finite");
        }
    }
}

ScenarioConfig parse_scenario(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ScenarioError(origin + ": parse error: " + e.what());
    }

    ScenarioConfig cfg;
    const json& orbit = require(j, "orbit", origin);
    cfg.gm = require_number(orbit, "gm_m3_per_s2", origin + ".orbit");
    cfg.orbit_radius = require_number(orbit, "radius_m", origin + ".orbit");

    const json& servicer = require(j, "servicer", origin);
    cfg.servicer_mass = require_number(servicer, "mass_kg", origin + ".servicer");
    cfg.servicer = parse_body(servicer, origin + ".servicer");
    cfg.target = parse_body(require(j, "target", origin), origin + ".target");

    const json& init = require(j, "initial_relative_state", origin);
    const Vec3 r0 = require_vec3(init, "position_m", origin + ".initial_relative_state");
    const Vec3 v0 = require_vec3(init, "velocity_m_per_s", origin + ".initial_relative_state");
    cfg.initial_relative = {r0[0], r0[1], r0[2], v0[0], v0[1], v0[2]};

    const json& bounds = require(j, "bounds", origin);
    cfg.bounds.u_max = require_number(bounds, "u_max", origin + ".bounds");
    cfg.bounds.m_max = require_number(bounds, "m_max_nm", origin + ".bounds");
    cfg.tf_min = require_number(bounds, "tf_min_s", origin + ".bounds");
    cfg.tf_max = require_number(bounds, "tf_max_s", origin + ".bounds");

    const json& weights = require(j, "weights", origin);
    cfg.weights.l_tf = require_number(weights, "l_tf", origin + ".weights");
    cfg.weights.l_u = require_number(weights, "l_u", origin + ".weights");
    cfg.weights.l_m = require_number(weights, "l_m", origin + ".weights");

    cfg.steps = static_cast<int>(
        require_number(require(j, "discretization", origin), "steps", origin + ".discretization"));

    if (auto it = j.find("options"); it != j.end()) {
        const json& opts = *it;
        if (auto o = opts.find("collision_constraint_enabled"); o != opts.end()) {
            cfg.collision_constraint_enabled = o->get<bool>();
        }
        if (auto o = opts.find("thrust_bound_mode"); o != opts.end()) {
            const std::string mode = o->get<std::string>();
            if (mode == "literal") {
                cfg.bounds.thrust_mode = ThrustBoundMode::literal;
            } else if (mode == "squared") {
                cfg.bounds.thrust_mode = ThrustBoundMode::squared;
            } else {
                throw ScenarioError(origin +
                                    ".options: thrust_bound_mode must be 'literal' or 'squared'");
            }
        }
        if (auto o = opts.find("safety_margin_m"); o != opts.end()) {
            cfg.safety_margin = o->get<double>();
        }
    }

    cfg.validate();
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError("cannot open scenario file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

std::string ScenarioConfig::canonical_json() const {
    json j;
    j["orbit"] = {{"gm_m3_per_s2", gm}, {"radius_m", orbit_radius}};
    auto body_json = [](const BodyConfig& b) {
        return json{
            {"inertia",
             {{"xx_kgm2", b.inertia.jxx}, {"yy_kgm2", b.inertia.jyy}, {"zz_kgm2", b.inertia.jzz}}},
            {"docking_point_body_m", {b.docking_point[0], b.docking_point[1], b.docking_point[2]}},
            {"safety_radius_m", b.safety_radius},
            {"q0", {b.q0.q1, b.q0.q2, b.q0.q3, b.q0.q4}},
            {"omega0_rad_per_s", {b.omega0.wx, b.omega0.wy, b.omega0.wz}}};
    };
    j["servicer"] = body_json(servicer);
    j["servicer"]["mass_kg"] = servicer_mass;
    j["target"] = body_json(target);
    j["initial_relative_state"] = {
        {"position_m", {initial_relative.x, initial_relative.y, initial_relative.z}},
        {"velocity_m_per_s", {initial_relative.vx, initial_relative.vy, initial_relative.vz}}};
    j["bounds"] = {{"u_max", bounds.u_max},
                   {"m_max_nm", bounds.m_max},
                   {"tf_min_s", tf_min},
                   {"tf_max_s", tf_max},
                   {"thrust_bound_mode",
                    bounds.thrust_mode == ThrustBoundMode::literal ? "literal" : "squared"}};
    j["weights"] = {{"l_tf", weights.l_tf}, {"l_u", weights.l_u}, {"l_m", weights.l_m}};
    j["discretization"] = {{"steps", steps}};
    j["options"] = {{"collision_constraint_enabled", collision_constraint_enabled},
                    {"safety_margin_m", safety_margin}};
    return j.dump();
}

std::string ScenarioConfig::hash() const {
    const std::string text = canonical_json();
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace dockopt
