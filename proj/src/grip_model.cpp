#include "magspring/grip_model.hpp"

#include <string>

#include "magspring/constants.hpp"
#include "magspring/errors.hpp"

namespace magspring::grip {

using constants::g0;

void FingerForceModel::validate() const {
    if (!(lever_arm > 0.0)) throw ConfigError("finger force model: lever_arm must be positive");
    if (!(elastic_stiffness >= 0.0)) throw ConfigError("finger force model: stiffness must be >= 0");
}

void PayloadModel::validate() const {
    if (!(friction_coeff > 0.0) || friction_coeff > 2.0)
        throw ConfigError("payload model: friction coefficient must lie in (0, 2]");
    if (n_fingers < 2) throw ConfigError("payload model: n_fingers must be >= 2");
}

double beam_stiffness(const mat::MechanicalProperties& mech, const geom::GripperGeometry& g,
                      double cantilever_length) {
    mech.validate();
    g.validate();
    const double length = cantilever_length > 0.0 ? cantilever_length : g.finger_length;
    const double inertia = g.w * g.finger_thickness * g.finger_thickness * g.finger_thickness / 12.0;
    return 3.0 * mech.e_mod * inertia / (length * length * length);
}

double tip_force(const FingerForceModel& f, double deflection) {
    f.validate();
    if (deflection < 0.0) throw ConfigError("tip_force: deflection must be >= 0");
    return f.plateau_torque / f.lever_arm + f.elastic_stiffness * deflection;
}

std::vector<std::pair<double, double>> force_displacement_curve(const FingerForceModel& f,
                                                                const std::vector<double>& displacements) {
    std::vector<std::pair<double, double>> curve;
    curve.reserve(displacements.size());
    double prev = -1.0;
    for (const double x : displacements) {
        if (x < 0.0 || x <= prev)
            throw ConfigError("force_displacement_curve: displacements must be non-negative and increasing");
        curve.emplace_back(x, tip_force(f, x));
        prev = x;
    }
    return curve;
}

double max_payload(const PayloadModel& p, const mat::MechanicalProperties& mech,
                   const geom::GripperGeometry& g, double grip_deflection) {
    p.validate();
    if (grip_deflection < 0.0) throw ConfigError("max_payload: grip_deflection must be >= 0");
    const double holding_force =
        p.normal_force_per_finger + beam_stiffness(mech, g) * grip_deflection;
    return p.n_fingers * p.friction_coeff * holding_force / g0;
}

double calibrate_friction(int n_fingers, double normal_force_per_finger,
                          const mat::MechanicalProperties& mech, const geom::GripperGeometry& g,
                          double grip_deflection, double target_mass_kg) {
    if (!(target_mass_kg > 0.0)) throw ConfigError("calibrate_friction: target mass must be positive");
    const double holding_force =
        normal_force_per_finger + beam_stiffness(mech, g) * grip_deflection;
    if (!(holding_force > 0.0)) throw ConfigError("calibrate_friction: holding force must be positive");
    return target_mass_kg * g0 / (n_fingers * holding_force);
}

}  // namespace magspring::grip
