#pragma once

#include <utility>
#include <vector>

#include "magspring/geometry.hpp"
#include "magspring/materials.hpp"

namespace magspring::grip {

/// Finger tip force as a magnetic plateau-torque term plus a linear
/// cantilever term: F(x) = plateau_torque / lever_arm + k * x.
struct FingerForceModel {
    double plateau_torque = 0.0;     // [N*m]
    double lever_arm = 0.0;          // effective radius magnet center -> contact [m]
    double elastic_stiffness = 0.0;  // cantilever contribution [N/m]

    void validate() const;
};

/// Coulomb-friction payload model with a single calibrated friction
/// coefficient shared by all materials.
struct PayloadModel {
    double friction_coeff = 0.0;          // mu
    int n_fingers = 3;
    double normal_force_per_finger = 0.0;  // magnetic normal force F(0) [N]

    void validate() const;
};

/// Tip stiffness of the stripe as an end-loaded cantilever,
/// k = 3 E I / L^3 with I = w t^3 / 12. cantilever_length <= 0 uses the
/// full finger length.
double beam_stiffness(const mat::MechanicalProperties& mech, const geom::GripperGeometry& g,
                      double cantilever_length = 0.0);

double tip_force(const FingerForceModel& f, double deflection);

/// Monotone force-displacement samples over the given displacement grid.
std::vector<std::pair<double, double>> force_displacement_curve(const FingerForceModel& f,
                                                                const std::vector<double>& displacements);

/// Largest liftable mass [kg]: n * mu * (F_normal + k * grip_deflection) / g0.
double max_payload(const PayloadModel& p, const mat::MechanicalProperties& mech,
                   const geom::GripperGeometry& g, double grip_deflection);

/// Friction coefficient that makes max_payload hit target_mass for the given
/// material (one-point calibration).
double calibrate_friction(int n_fingers, double normal_force_per_finger,
                          const mat::MechanicalProperties& mech, const geom::GripperGeometry& g,
                          double grip_deflection, double target_mass_kg);

}  // namespace magspring::grip
