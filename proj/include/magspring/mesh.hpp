#pragma once

#include <iosfwd>
#include <vector>

#include "magspring/geometry.hpp"
#include "magspring/vec2.hpp"

namespace magspring::msh {

enum class Region : int { air = 0, mre = 1, pm = 2 };

const char* region_name(Region r);

/// Mesh sizing controls. h_air = 0 picks a default from the air radius.
struct MeshParams {
    double h_max = 1.0e-3;          // target max edge length in MRE/PM regions [m]
    double h_air = 0.0;             // air-region target [m]; 0 = auto
    double air_radius_factor = 5.0;  // air disk radius / (r_frame + finger_length)

    void validate() const;
};

/// Parent curve of a boundary chain. Constraint splits reproject onto the
/// curve so circular boundaries stay circular under refinement.
struct Curve {
    enum class Type { line, arc };
    Type type = Type::line;
    Vec2 a, b;     // line endpoints (param 0..1)
    Vec2 center;   // arc center
    double radius = 0.0;  // arc radius (param = angle in radians)

    Vec2 point(double t) const;

    static Curve line(Vec2 a, Vec2 b);
    static Curve arc(Vec2 center, double radius);
};

struct OutlineSegment {
    int a = -1, b = -1;   // indices into Outline::points
    int curve = -1;       // parent curve
    double ta = 0, tb = 0;  // curve parameters of the endpoints
};

struct SizeDisk {
    Vec2 center;
    double radius = 0;
    double h = 0;
};
struct SizeCapsule {
    Vec2 a, b;
    double radius = 0;
    double h = 0;
};

/// Planar straight-line graph of the region boundaries plus sizing metadata.
/// Region interfaces appear exactly once; the magnet/stripe contact arc is a
/// single shared chain.
struct Outline {
    std::vector<Vec2> points;
    std::vector<OutlineSegment> segments;
    std::vector<Curve> curves;
    int outer_curve = -1;

    Vec2 center;             // air disk center
    double air_radius = 0;   // air disk radius
    double h_air_resolved = 0;  // effective air-region size target
    double min_feature = 0;  // thinnest region feature (stripe thickness / disk radius)

    // closed polygons (no repeated endpoint) for classification and tests
    std::vector<Vec2> magnet_polygon;
    std::vector<Vec2> stripe_polygon;

    // seeds for region flood fill
    Vec2 pm_seed;
    Vec2 mre_seed;
    bool has_stripe = false;

    // sizing features: target h inside each feature, graded growth outside
    std::vector<SizeDisk> size_disks;
    std::vector<SizeCapsule> size_capsules;
    double h_near = 0;

    double size_at(const Vec2& p, double h_air) const;
};

/// Region polygons for the wrapped-stripe configuration. The exact tangential
/// cusp where the free face leaves the magnet is closed with a short suture
/// (the inner face joins the magnet circle one element short of the tangency
/// point); without it no mesh can satisfy the minimum-angle bound there.
Outline build_geometry_outline(const geom::GripperGeometry& g, const geom::WrapPath& path,
                               const MeshParams& p);

/// Bare magnetized disk in air, used by the analytic field benchmarks.
Outline build_disk_outline(double disk_radius, double air_radius, const MeshParams& p);

struct Mesh {
    struct Tri {
        int a = -1, b = -1, c = -1;  // CCW
        Region tag = Region::air;
    };
    std::vector<Vec2> nodes;
    std::vector<Tri> triangles;
    std::vector<int> boundary_nodes;  // nodes on the outer air circle, ascending
};

/// Conforming constrained triangulation of the outline with Ruppert-style
/// quality refinement (min angle 20 deg) and the per-region size targets.
Mesh triangulate(const Outline& outline, const MeshParams& p);

// --- small mesh utilities -------------------------------------------------

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c);
double triangle_area(const Mesh& m, int t);
Vec2 triangle_centroid(const Mesh& m, int t);
double triangle_min_angle(const Mesh& m, int t);  // radians
double region_area(const Mesh& m, Region r);

double polygon_area(const std::vector<Vec2>& poly);
bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly);

/// Plain-text export: node count, "x y" lines; element count, "i j k tag" lines.
void write_mesh_text(const Mesh& m, std::ostream& out);

}  // namespace magspring::msh
