#pragma once

#include <vector>

#include "magspring/vec2.hpp"

namespace magspring::geom {

/// Cross-section parameters of the gripper. All lengths in meters.
struct GripperGeometry {
    double r_frame = 0.018;           // mounting-frame radius (magnet centers)
    double d_pm = 0.020;              // permanent-magnet outer diameter
    double w = 0.015;                 // finger (stripe) width, used as extrusion depth
    double finger_length = 0.060;     // stripe length
    double finger_thickness = 0.003;  // stripe thickness
    int n_fingers = 3;

    /// Throws GeometryError when any invariant is violated.
    void validate() const;

    double magnet_radius() const { return 0.5 * d_pm; }
    /// Radius of the contact circle traced by the stripe mid-line.
    double contact_radius() const { return 0.5 * d_pm + 0.5 * finger_thickness; }
};

/// Bookkeeping of how much stripe is wrapped at a given angle.
struct WrapState {
    double theta = 0.0;        // contact angle [rad]
    double arc_length = 0.0;   // stripe length lying on the magnet
    double free_length = 0.0;  // remaining straight length
};

/// Discretized stripe mid-line for one wrap configuration.
///
/// The contact portion lies on the circle of radius contact_radius() around
/// the magnet center; the free portion is a straight segment tangent to that
/// circle at the departure point. The anchor fixes the tangent line (which of
/// the two tangents, and on which side of the magnet); the stripe end point
/// slides along that line as material is consumed by the wrap.
struct WrapPath {
    std::vector<Vec2> polyline;  // stripe end -> tangency -> free tip
    double contact_start = 0.0;  // angle of the tangency point on the contact circle [rad]
    double contact_end = 0.0;    // angle of the free tip; contact_end - contact_start == theta
    Vec2 tangency;               // departure point on the contact circle
    Vec2 tail;                   // stripe end point on the tangent line
    double mid_radius = 0.0;     // contact circle radius
    WrapState state;
};

/// Radius of the largest cylinder admitted between the magnets in the open state.
double open_radius(const GripperGeometry& g);

/// Radius of the inscribed circle between the three finger faces when closed.
/// Only defined for the three-finger layout.
double close_radius(const GripperGeometry& g);

/// Largest wrap angle the stripe length allows, capped just short of a full
/// turn so the stripe can never overlap itself.
double max_wrap_angle(const GripperGeometry& g, double eps_gap_rad = 5.0 * 3.14159265358979323846 / 180.0);

/// Builds the stripe mid-line for wrap angle theta. The anchor must lie
/// strictly outside the contact circle.
WrapPath wrap_path(const GripperGeometry& g, double theta, const Vec2& anchor);

/// Default anchor: on the tangent line below the magnet, one finger length
/// away from the tangency point, so the theta=0 stripe ends exactly there.
Vec2 default_anchor(const GripperGeometry& g);

double polyline_length(const std::vector<Vec2>& pts);

}  // namespace magspring::geom
