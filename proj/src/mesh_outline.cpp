#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "magspring/constants.hpp"
#include "magspring/errors.hpp"
#include "magspring/mesh.hpp"

namespace magspring::msh {

using constants::pi;

const char* region_name(Region r) {
    switch (r) {
        case Region::air: return "air";
        case Region::mre: return "mre";
        case Region::pm: return "pm";
    }
    return "?";
}

void MeshParams::validate() const {
    if (!(h_max > 0.0)) throw MeshError("mesh: h_max must be positive");
    if (h_air != 0.0 && !(h_air >= h_max))
        throw MeshError("mesh: h_air must be >= h_max (or 0 for automatic)");
    if (!(air_radius_factor >= 3.0)) throw MeshError("mesh: air_radius_factor must be >= 3");
}

Vec2 Curve::point(double t) const {
    if (type == Type::line) return a + t * (b - a);
    return center + Vec2{radius * std::cos(t), radius * std::sin(t)};
}

Curve Curve::line(Vec2 a, Vec2 b) {
    Curve c;
    c.type = Type::line;
    c.a = a;
    c.b = b;
    return c;
}

Curve Curve::arc(Vec2 center, double radius) {
    Curve c;
    c.type = Type::arc;
    c.center = center;
    c.radius = radius;
    return c;
}

namespace {

double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.norm2();
    if (len2 == 0.0) return distance(p, a);
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return distance(p, a + t * ab);
}

double resolved_h_air(double air_radius, const MeshParams& p) {
    const double cap = 2.0 * pi * air_radius / 64.0;  // keeps the outer polygon round
    const double h = (p.h_air > 0.0) ? p.h_air : 2.0 * pi * air_radius / 96.0;
    return std::min(h, cap);
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        return (q - p).cross(r - p);
    };
    const double o1 = orient(a, b, c), o2 = orient(a, b, d);
    const double o3 = orient(c, d, a), o4 = orient(c, d, b);
    return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0));
}

void check_simple_polygon(const std::vector<Vec2>& poly, const char* what) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            // skip adjacent edges (share a vertex)
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_intersect(a, b, poly[j], poly[(j + 1) % n]))
                throw GeometryError(std::string(what) + " polygon self-intersects (edges " +
                                    std::to_string(i) + " and " + std::to_string(j) + " of " +
                                    std::to_string(n) + ", near x=" + std::to_string(a.x) +
                                    " y=" + std::to_string(a.y) + ")");
        }
    }
}

// Builder that owns the point pool and emits constraint segments.
struct OutlineBuilder {
    Outline out;

    int add_point(const Vec2& p) {
        out.points.push_back(p);
        return static_cast<int>(out.points.size()) - 1;
    }
    int add_curve(const Curve& c) {
        out.curves.push_back(c);
        return static_cast<int>(out.curves.size()) - 1;
    }
    void add_segment(int a, int b, int curve, double ta, double tb) {
        out.segments.push_back({a, b, curve, ta, tb});
    }

    // Subdivided chain along a curve between existing endpoint indices.
    // Returns the interior points it created (excluding endpoints).
    std::vector<int> chain(int ia, int ib, int curve, double ta, double tb, double target_h) {
        const Curve& c = out.curves[curve];
        double len;
        if (c.type == Curve::Type::arc)
            len = c.radius * std::abs(tb - ta);
        else
            len = distance(c.point(ta), c.point(tb));
        const int n = std::max(1, static_cast<int>(std::ceil(len / target_h)));
        std::vector<int> interior;
        int prev = ia;
        double tprev = ta;
        for (int i = 1; i <= n; ++i) {
            const double t = ta + (tb - ta) * static_cast<double>(i) / n;
            int idx = (i == n) ? ib : add_point(c.point(t));
            if (i < n) interior.push_back(idx);
            add_segment(prev, idx, curve, tprev, t);
            prev = idx;
            tprev = t;
        }
        return interior;
    }
};

void add_air_circle(OutlineBuilder& b, const Vec2& center, double air_radius, const MeshParams& p) {
    const double h = resolved_h_air(air_radius, p);
    b.out.h_air_resolved = h;
    const int n = std::max(64, static_cast<int>(std::ceil(2.0 * pi * air_radius / h)));
    const int curve = b.add_curve(Curve::arc(center, air_radius));
    b.out.outer_curve = curve;
    int first = -1, prev = -1;
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * pi * i / n;
        const int idx = b.add_point(b.out.curves[curve].point(a));
        if (i == 0)
            first = idx;
        else
            b.add_segment(prev, idx, curve, 2.0 * pi * (i - 1) / n, a);
        prev = idx;
    }
    b.add_segment(prev, first, curve, 2.0 * pi * (n - 1) / n, 2.0 * pi);
}

}  // namespace

double Outline::size_at(const Vec2& p, double h_air) const {
    double d = std::numeric_limits<double>::max();
    for (const auto& disk : size_disks) {
        const double dd = distance(p, disk.center) - disk.radius;
        if (dd <= 0.0) return disk.h;
        d = std::min(d, dd);
    }
    for (const auto& cap : size_capsules) {
        const double dd = dist_point_segment(p, cap.a, cap.b) - cap.radius;
        if (dd <= 0.0) return cap.h;
        d = std::min(d, dd);
    }
    // graded growth away from the features
    return std::min(h_air, h_near + 0.4 * d);
}

Outline build_disk_outline(double disk_radius, double air_radius, const MeshParams& p) {
    p.validate();
    if (!(disk_radius > 0.0) || !(air_radius > 2.0 * disk_radius))
        throw MeshError("disk outline: need 0 < disk_radius and air_radius > 2*disk_radius");

    OutlineBuilder b;
    b.out.center = {0.0, 0.0};
    b.out.air_radius = air_radius;
    b.out.min_feature = disk_radius;
    b.out.h_near = p.h_max;
    b.out.pm_seed = {0.0, 0.0};
    b.out.has_stripe = false;
    b.out.size_disks.push_back({{0.0, 0.0}, disk_radius, p.h_max});

    const double dtheta = std::min(2.0 * pi / 72.0, 0.9 * p.h_max / disk_radius);
    const int n = std::max(16, static_cast<int>(std::ceil(2.0 * pi / dtheta)));
    const int curve = b.add_curve(Curve::arc({0.0, 0.0}, disk_radius));
    int first = -1, prev = -1;
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * pi * i / n;
        const int idx = b.add_point(b.out.curves[curve].point(a));
        b.out.magnet_polygon.push_back(b.out.points[idx]);
        if (i > 0) b.add_segment(prev, idx, curve, 2.0 * pi * (i - 1) / n, a);
        if (i == 0) first = idx;
        prev = idx;
    }
    b.add_segment(prev, first, curve, 2.0 * pi * (n - 1) / n, 2.0 * pi);

    add_air_circle(b, {0.0, 0.0}, air_radius, p);
    return std::move(b.out);
}

Outline build_geometry_outline(const geom::GripperGeometry& g, const geom::WrapPath& path,
                               const MeshParams& p) {
    g.validate();
    p.validate();

    const double r_pm = g.magnet_radius();
    const double t = g.finger_thickness;
    const double r_out = r_pm + t;
    const double r_mid = g.contact_radius();
    const double w_t = path.contact_start;
    const double theta = path.state.theta;
    const double free_len = path.state.free_length;
    const Vec2 dir{std::sin(w_t), -std::cos(w_t)};  // tangent direction toward the stripe tail
    auto on_circle = [](double r, double a) { return Vec2{r * std::cos(a), r * std::sin(a)}; };

    const double h_stripe = std::min(p.h_max, 0.5 * t);
    const double h_pm = p.h_max;

    OutlineBuilder b;
    Outline& out = b.out;
    out.center = {0.0, 0.0};
    out.air_radius = p.air_radius_factor * (g.r_frame + g.finger_length);
    out.min_feature = t;
    out.h_near = h_stripe;
    out.has_stripe = true;
    out.pm_seed = {0.0, 0.0};

    const double extent = std::max(r_out, path.tail.norm() + t);
    if (out.air_radius < 1.5 * extent)
        throw MeshError("outline: air radius " + std::to_string(out.air_radius) +
                        " too small for the stripe extent; increase air_radius_factor");

    // Suture: the free inner face joins the magnet circle a little before the
    // tangency point instead of exactly at it. s_star is the joined length.
    // A free stub below a quarter millimeter cannot be meshed at sane sizes;
    // treat it as fully wrapped.
    const bool has_free = free_len > std::min(2.5e-4, 0.1 * t);
    double s_star = 0.0;
    double w_f = w_t;
    Vec2 f1;
    if (has_free) {
        const double g_sut = std::min(0.5 * h_stripe, 0.25 * t);
        s_star = std::min(std::sqrt(2.0 * r_pm * g_sut), 0.8 * free_len);
        f1 = on_circle(r_pm, w_t) + s_star * dir;
        double a = std::atan2(f1.y, f1.x);
        while (a > w_t) a -= 2.0 * pi;
        while (a <= w_t - 2.0 * pi) a += 2.0 * pi;
        w_f = a;
    }

    // ---- magnet circle: suture arc [w_f, w_t] + contact arc [w_t, w_t+theta]
    //      + free arc [w_t+theta, w_f+2pi], one closed constrained loop.
    const int c_mag = b.add_curve(Curve::arc({0.0, 0.0}, r_pm));
    const double d_shared = std::min(2.0 * pi / 72.0, 0.9 * h_stripe / r_pm);
    const double d_free = std::min(2.0 * pi / 72.0, 0.9 * h_pm / r_pm);

    std::vector<double> angles;  // ascending from w_f to w_f + 2pi (exclusive)
    auto append_arc = [&angles](double a0, double a1, double step) {
        const double span = a1 - a0;
        if (span <= 1e-14) return;
        const int n = std::max(1, static_cast<int>(std::ceil(span / step)));
        for (int i = 0; i < n; ++i) angles.push_back(a0 + span * static_cast<double>(i) / n);
    };
    append_arc(w_f, w_t, d_shared);          // suture (empty when no free face)
    append_arc(w_t, w_t + theta, d_shared);  // contact
    append_arc(w_t + theta, w_f + 2.0 * pi, d_free);

    std::vector<int> circle_idx(angles.size());
    int idx_cf = -1, idx_ti = -1, idx_tip = -1;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        circle_idx[i] = b.add_point(on_circle(r_pm, angles[i]));
        out.magnet_polygon.push_back(out.points[circle_idx[i]]);
        if (std::abs(angles[i] - w_f) < 1e-14) idx_cf = circle_idx[i];
        if (std::abs(angles[i] - w_t) < 1e-14) idx_ti = circle_idx[i];
        if (std::abs(angles[i] - (w_t + theta)) < 1e-14) idx_tip = circle_idx[i];
    }
    if (idx_ti < 0) idx_ti = idx_cf;    // theta chains share the tangency vertex
    if (idx_tip < 0) idx_tip = idx_ti;  // theta == 0
    if (!has_free) idx_cf = idx_ti;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const std::size_t j = (i + 1) % angles.size();
        const double a1 = (j == 0) ? angles[0] + 2.0 * pi : angles[j];
        b.add_segment(circle_idx[i], circle_idx[j], c_mag, angles[i], a1);
    }

    // ---- stripe chain ----
    const Vec2 ti = on_circle(r_pm, w_t);
    const Vec2 to = on_circle(r_out, w_t);
    const Vec2 tip_i = on_circle(r_pm, w_t + theta);
    const Vec2 tip_o = on_circle(r_out, w_t + theta);
    const Vec2 si = ti + free_len * dir;
    const Vec2 so = to + free_len * dir;

    auto polygon_arc = [&](std::vector<Vec2>& poly, double r, double a0, double a1, double step) {
        // interior samples only, endpoints added by the caller
        const double span = std::abs(a1 - a0);
        const int n = std::max(1, static_cast<int>(std::ceil(span / step)));
        for (int i = 1; i < n; ++i) poly.push_back(on_circle(r, a0 + (a1 - a0) * static_cast<double>(i) / n));
    };

    std::vector<Vec2>& sp = out.stripe_polygon;
    if (has_free) {
        const int i_si = b.add_point(si);
        const int i_f1 = b.add_point(f1);
        const int c_in = b.add_curve(Curve::line(si, f1));
        const int c_con = b.add_curve(Curve::line(f1, out.points[idx_cf]));

        sp.push_back(si);
        {
            auto ids = b.chain(i_si, i_f1, c_in, 0.0, 1.0, h_stripe);
            for (int id : ids) sp.push_back(out.points[id]);
        }
        sp.push_back(f1);
        b.add_segment(i_f1, idx_cf, c_con, 0.0, 1.0);
        sp.push_back(out.points[idx_cf]);
        polygon_arc(sp, r_pm, w_f, w_t, d_shared);
        sp.push_back(ti);
        polygon_arc(sp, r_pm, w_t, w_t + theta, d_shared);
        if (theta > 0.0) sp.push_back(tip_i);

        const int i_tip_o = b.add_point(tip_o);
        const int c_cap = b.add_curve(Curve::line(tip_i, tip_o));
        {
            auto ids = b.chain(idx_tip, i_tip_o, c_cap, 0.0, 1.0, h_stripe);
            for (int id : ids) sp.push_back(out.points[id]);
        }
        sp.push_back(tip_o);

        int i_to = i_tip_o;
        if (theta > 0.0) {
            i_to = b.add_point(to);
            const int c_oarc = b.add_curve(Curve::arc({0.0, 0.0}, r_out));
            const double d_oarc = std::min(h_stripe, 2.0 * pi * r_out / 72.0);  // chord length target
            auto ids = b.chain(i_tip_o, i_to, c_oarc, w_t + theta, w_t, d_oarc);
            for (int id : ids) sp.push_back(out.points[id]);
            sp.push_back(to);
        }
        const int i_so = b.add_point(so);
        const int c_of = b.add_curve(Curve::line(to, so));
        {
            auto ids = b.chain(i_to, i_so, c_of, 0.0, 1.0, h_stripe);
            for (int id : ids) sp.push_back(out.points[id]);
        }
        sp.push_back(so);
        const int c_tcap = b.add_curve(Curve::line(so, si));
        {
            auto ids = b.chain(i_so, i_si, c_tcap, 0.0, 1.0, h_stripe);
            for (int id : ids) sp.push_back(out.points[id]);
        }
        out.mre_seed = on_circle(r_mid, w_t) + 0.5 * free_len * dir;
    } else {
        // fully wrapped: annular sector with two radial caps
        const int i_tip_o = b.add_point(tip_o);
        const int i_to = b.add_point(to);
        const int c_cap = b.add_curve(Curve::line(tip_i, tip_o));
        const int c_oarc = b.add_curve(Curve::arc({0.0, 0.0}, r_out));
        const int c_scap = b.add_curve(Curve::line(to, ti));
        const double d_oarc = std::min(h_stripe, 2.0 * pi * r_out / 72.0);  // chord length target

        sp.push_back(ti);
        polygon_arc(sp, r_pm, w_t, w_t + theta, d_shared);
        sp.push_back(tip_i);
        {
            auto ids = b.chain(idx_tip, i_tip_o, c_cap, 0.0, 1.0, h_stripe);
            for (int id : ids) sp.push_back(out.points[id]);
        }
        sp.push_back(tip_o);
        {
            auto ids = b.chain(i_tip_o, i_to, c_oarc, w_t + theta, w_t, d_oarc);
            for (int id : ids) sp.push_back(out.points[id]);
        }
        sp.push_back(to);
        {
            auto ids = b.chain(i_to, idx_ti, c_scap, 0.0, 1.0, h_stripe);
            for (int id : ids) sp.push_back(out.points[id]);
        }
        out.mre_seed = on_circle(r_mid, w_t + 0.5 * theta);
    }
    check_simple_polygon(sp, "stripe");

    // sizing: fine inside magnet+stripe annulus and along the free face
    out.size_disks.push_back({{0.0, 0.0}, r_out, h_stripe});
    if (has_free) {
        const Vec2 m_t = on_circle(r_mid, w_t);
        out.size_capsules.push_back({m_t + free_len * dir, m_t, t, h_stripe});
    }

    add_air_circle(b, out.center, out.air_radius, p);
    return std::move(b.out);
}

// --- mesh utilities --------------------------------------------------------

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * (b - a).cross(c - a);
}

double triangle_area(const Mesh& m, int t) {
    const auto& tr = m.triangles[t];
    return signed_area(m.nodes[tr.a], m.nodes[tr.b], m.nodes[tr.c]);
}

Vec2 triangle_centroid(const Mesh& m, int t) {
    const auto& tr = m.triangles[t];
    return (m.nodes[tr.a] + m.nodes[tr.b] + m.nodes[tr.c]) / 3.0;
}

double triangle_min_angle(const Mesh& m, int t) {
    const auto& tr = m.triangles[t];
    const Vec2& a = m.nodes[tr.a];
    const Vec2& b = m.nodes[tr.b];
    const Vec2& c = m.nodes[tr.c];
    auto angle = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        const Vec2 u = q - p, v = r - p;
        return std::acos(std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0));
    };
    return std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)});
}

double region_area(const Mesh& m, Region r) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m.triangles.size(); ++i)
        if (m.triangles[i].tag == r) sum += triangle_area(m, static_cast<int>(i));
    return sum;
}

double polygon_area(const std::vector<Vec2>& poly) {
    double s = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % poly.size()];
        s += a.cross(b);
    }
    return 0.5 * std::abs(s);
}

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

void write_mesh_text(const Mesh& m, std::ostream& out) {
    out << m.nodes.size() << "\n";
    char buf[80];
    for (const auto& n : m.nodes) {
        std::snprintf(buf, sizeof(buf), "%.12g %.12g\n", n.x, n.y);
        out << buf;
    }
    out << m.triangles.size() << "\n";
    for (const auto& t : m.triangles)
        out << t.a << " " << t.b << " " << t.c << " " << region_name(t.tag) << "\n";
}

}  // namespace magspring::msh
