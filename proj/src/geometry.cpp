#include "magspring/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "magspring/constants.hpp"
#include "magspring/errors.hpp"

namespace magspring::geom {

using constants::pi;

void GripperGeometry::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0))
            throw GeometryError(std::string("geometry: ") + name + " must be strictly positive");
    };
    positive(r_frame, "r_frame");
    positive(d_pm, "d_pm");
    positive(w, "w");
    positive(finger_length, "finger_length");
    positive(finger_thickness, "finger_thickness");
    if (n_fingers < 2) throw GeometryError("geometry: n_fingers must be >= 2");
    if (!(r_frame > 0.5 * d_pm))
        throw GeometryError("geometry: r_frame must exceed d_pm/2 (magnets may not meet at the center)");
}

double open_radius(const GripperGeometry& g) {
    g.validate();
    return g.r_frame - 0.5 * g.d_pm;
}

double close_radius(const GripperGeometry& g) {
    g.validate();
    if (g.n_fingers != 3)
        throw GeometryError("close_radius: closed-state formula requires exactly 3 fingers (got " +
                            std::to_string(g.n_fingers) + ")");
    return std::sqrt(3.0) / 6.0 * g.w;
}

double max_wrap_angle(const GripperGeometry& g, double eps_gap_rad) {
    g.validate();
    const double by_length = g.finger_length / g.contact_radius();
    // Past 2*pi - acos(r_pm/r_out) the wrapped tip (outer radius r_out)
    // re-enters the band occupied by the incoming free face; stop a gap
    // short of that self-contact angle.
    const double r_out = g.magnet_radius() + g.finger_thickness;
    const double self_contact = std::acos(g.magnet_radius() / r_out);
    const double by_overlap = 2.0 * pi - self_contact - eps_gap_rad;
    return std::min(by_length, by_overlap);
}

Vec2 default_anchor(const GripperGeometry& g) {
    // Tangency at the bottom of the contact circle, stripe hanging further down.
    return {g.contact_radius(), -g.finger_length};
}

WrapPath wrap_path(const GripperGeometry& g, double theta, const Vec2& anchor) {
    g.validate();
    const double theta_max = max_wrap_angle(g);
    if (!(theta >= 0.0) || theta > theta_max * (1.0 + 1e-12))
        throw GeometryError("wrap_path: theta out of range [0, " + std::to_string(theta_max) + "]");

    const double r_mid = g.contact_radius();
    const double d = anchor.norm();
    if (d <= g.magnet_radius())
        throw GeometryError("wrap_path: anchor lies inside the magnet");
    if (d <= r_mid)
        throw GeometryError("wrap_path: anchor lies inside the contact circle; no tangent line exists");

    // Tangency point such that the wrap proceeds counterclockwise from it;
    // the direction from tangency to anchor is then (sin w, -cos w).
    const double beta = std::atan2(anchor.y, anchor.x);
    const double alpha = std::acos(r_mid / d);
    const double w_t = beta + alpha;

    WrapPath path;
    path.mid_radius = r_mid;
    path.contact_start = w_t;
    path.contact_end = w_t + theta;
    path.tangency = {r_mid * std::cos(w_t), r_mid * std::sin(w_t)};

    const double arc_length = r_mid * theta;
    const double free_length = std::max(g.finger_length - arc_length, 0.0);
    path.state = {theta, arc_length, free_length};

    const Vec2 to_anchor{std::sin(w_t), -std::cos(w_t)};
    path.tail = path.tangency + free_length * to_anchor;

    path.polyline.push_back(path.tail);
    if (free_length > 0.0) path.polyline.push_back(path.tangency);
    if (theta > 0.0) {
        // Chord error theta_step^2/24 keeps the polyline length within 1e-6
        // relative of the exact arc length.
        const double max_step = 4.0e-3;
        const int n = std::max(1, static_cast<int>(std::ceil(theta / max_step)));
        for (int i = 1; i <= n; ++i) {
            const double a = w_t + theta * static_cast<double>(i) / n;
            path.polyline.push_back({r_mid * std::cos(a), r_mid * std::sin(a)});
        }
    }
    return path;
}

double polyline_length(const std::vector<Vec2>& pts) {
    double len = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) len += distance(pts[i - 1], pts[i]);
    return len;
}

}  // namespace magspring::geom
