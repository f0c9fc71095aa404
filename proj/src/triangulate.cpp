#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "magspring/constants.hpp"
#include "magspring/errors.hpp"
#include "magspring/mesh.hpp"

namespace magspring::msh {

namespace {

using constants::pi;

constexpr double kOrientEps = 1e-13;        // normalized coordinates
constexpr double kVertexMergeEps = 1e-12;   // points closer than this are the same
constexpr double kMinAngleDeg = 20.0;
// circumradius / shortest edge bound equivalent to a 20 degree minimum angle
const double kQualityBound = 1.0 / (2.0 * std::sin(kMinAngleDeg * pi / 180.0));

inline std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

struct ConstraintInfo {
    int curve = -1;
    double ta = 0, tb = 0;
};

/// Incremental Bowyer-Watson triangulation with constrained edges acting as
/// cavity walls, plus Ruppert-style refinement. All coordinates are
/// normalized by the air radius; boundary splits reproject onto their parent
/// curves so circles stay circular.
class Triangulator {
  public:
    Triangulator(const Outline& outline, const MeshParams& params) : out_(outline), p_(params) {}

    Mesh run();

  private:
    struct Tri {
        std::array<int, 3> v{-1, -1, -1};  // CCW
        std::array<int, 3> n{-1, -1, -1};  // n[i] across edge opposite v[i]
        bool alive = false;
    };

    const Outline& out_;
    const MeshParams& p_;
    double scale_ = 1.0;

    std::vector<Vec2> pts_;  // normalized
    std::vector<int> pt_curve_;
    std::vector<double> pt_param_;
    std::vector<Tri> tris_;
    std::vector<int> vtri_;  // vertex -> some incident live triangle
    std::unordered_map<std::uint64_t, ConstraintInfo> constraints_;
    std::deque<int> queue_;
    std::vector<int> visit_mark_;
    int visit_epoch_ = 0;
    long long insertions_ = 0;

    Vec2 normalize(const Vec2& p) const { return (p - out_.center) / scale_; }
    Vec2 denormalize(const Vec2& p) const { return out_.center + scale_ * p; }

    bool is_super(int v) const { return v < 3; }
    bool exterior(const Tri& t) const { return is_super(t.v[0]) || is_super(t.v[1]) || is_super(t.v[2]); }
    bool constrained(int a, int b) const { return constraints_.count(edge_key(a, b)) > 0; }

    // constraint params are stored in (min vertex, max vertex) order
    void mark_constraint(int a, int b, int curve, double ta, double tb) {
        if (a > b) {
            std::swap(a, b);
            std::swap(ta, tb);
        }
        constraints_[edge_key(a, b)] = {curve, ta, tb};
    }

    static double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
        return (b - a).cross(c - a);
    }

    bool in_circumcircle(const Tri& t, const Vec2& p) const {
        const Vec2 a = pts_[t.v[0]] - p;
        const Vec2 b = pts_[t.v[1]] - p;
        const Vec2 c = pts_[t.v[2]] - p;
        const double t1 = a.norm2() * b.cross(c);
        const double t2 = b.norm2() * c.cross(a);
        const double t3 = c.norm2() * a.cross(b);
        const double det = t1 + t2 + t3;
        const double tol = 1e-12 * (std::abs(t1) + std::abs(t2) + std::abs(t3));
        return det > tol;
    }

    int add_vertex(const Vec2& p, int curve, double param) {
        pts_.push_back(p);
        pt_curve_.push_back(curve);
        pt_param_.push_back(param);
        vtri_.push_back(-1);
        return static_cast<int>(pts_.size()) - 1;
    }

    int add_tri(int a, int b, int c) {
        Tri t;
        t.v = {a, b, c};
        t.alive = true;
        tris_.push_back(t);
        const int id = static_cast<int>(tris_.size()) - 1;
        vtri_[a] = vtri_[b] = vtri_[c] = id;
        return id;
    }

    int vertex_index(const Tri& t, int v) const {
        for (int i = 0; i < 3; ++i)
            if (t.v[i] == v) return i;
        return -1;
    }

    void set_neighbor(int tri, int a, int b, int nb) {
        // edge (a, b) of triangle tri; neighbor stored opposite the third vertex
        Tri& t = tris_[tri];
        for (int i = 0; i < 3; ++i) {
            const int va = t.v[(i + 1) % 3];
            const int vb = t.v[(i + 2) % 3];
            if ((va == a && vb == b) || (va == b && vb == a)) {
                t.n[i] = nb;
                return;
            }
        }
    }

    int locate(const Vec2& p, int hint) const;
    bool edge_exists(int a, int b) const;

    struct CavityEdge {
        int a = -1, b = -1;   // directed CCW seen from the cavity interior
        int outside = -1;     // triangle across the edge
    };

    bool build_cavity(const Vec2& p, int t0, std::vector<int>& cavity, std::vector<CavityEdge>& boundary);
    int carve(const Vec2& p, int curve, double param, const std::vector<int>& cavity,
              const std::vector<CavityEdge>& boundary);
    std::pair<int, bool> insert_point(const Vec2& p, int curve, double param, int hint);
    void validate_structure() const;  // debug aid, MAGSPRING_MESH_PARANOIA=1
    void recover_segment(int a, int b, int curve, double ta, double tb, int depth);
    bool split_constraint(int a, int b);
    void refine();
    Vec2 circumcenter(const Tri& t, double& radius) const;
    double size_target(const Vec2& centroid_normalized) const {
        return out_.size_at(denormalize(centroid_normalized), out_.h_air_resolved) / scale_;
    }
    bool is_bad(int tri) const;

    Mesh extract();
};

int Triangulator::locate(const Vec2& p, int hint) const {
    int t = (hint >= 0 && hint < static_cast<int>(tris_.size()) && tris_[hint].alive) ? hint : -1;
    if (t < 0) {
        for (int i = static_cast<int>(tris_.size()) - 1; i >= 0; --i)
            if (tris_[i].alive) {
                t = i;
                break;
            }
    }
    const long long cap = 4 * static_cast<long long>(tris_.size()) + 64;
    for (long long step = 0; step < cap; ++step) {
        const Tri& tr = tris_[t];
        int next = -1;
        for (int i = 0; i < 3; ++i) {
            const Vec2& a = pts_[tr.v[(i + 1) % 3]];
            const Vec2& b = pts_[tr.v[(i + 2) % 3]];
            if (orient(a, b, p) < -kOrientEps) {
                next = tr.n[i];
                break;
            }
        }
        if (next < 0) return t;
        t = next;
    }
    throw MeshError("triangulate: point location did not terminate");
}

bool Triangulator::edge_exists(int a, int b) const {
    const int start = vtri_[a];
    if (start < 0) return false;
    int t = start;
    int guard = 0;
    do {
        const Tri& tr = tris_[t];
        const int ia = vertex_index(tr, a);
        if (ia < 0) return false;  // stale incidence; treat as missing
        if (tr.v[(ia + 1) % 3] == b || tr.v[(ia + 2) % 3] == b) return true;
        t = tr.n[(ia + 1) % 3];
        if (t < 0) return false;
    } while (t != start && ++guard < 10000);
    return false;
}

bool Triangulator::build_cavity(const Vec2& p, int t0, std::vector<int>& cavity,
                                std::vector<CavityEdge>& boundary) {
    ++visit_epoch_;
    visit_mark_.resize(tris_.size(), 0);
    auto visited = [&](int t) { return visit_mark_[t] == visit_epoch_; };
    auto mark = [&](int t) { visit_mark_[t] = visit_epoch_; };

    cavity.clear();
    cavity.push_back(t0);
    mark(t0);
    std::vector<int> stack{t0};
    while (!stack.empty()) {
        const int t = stack.back();
        stack.pop_back();
        const Tri tr = tris_[t];
        for (int i = 0; i < 3; ++i) {
            const int nb = tr.n[i];
            const int ea = tr.v[(i + 1) % 3];
            const int eb = tr.v[(i + 2) % 3];
            if (nb < 0 || constrained(ea, eb) || visited(nb)) continue;
            if (in_circumcircle(tris_[nb], p)) {
                mark(nb);
                cavity.push_back(nb);
                stack.push_back(nb);
            }
        }
    }

    // Shrink the cavity until carving it is safe: every boundary edge must be
    // visible from p (star-shaped fan), no vertex may end up stranded inside,
    // the cavity must stay edge-connected, and the boundary must be one
    // closed loop. Evictions handle the near-cocircular roundoff cases.
    for (int repair = 0; repair < 512; ++repair) {
        auto evict = [&](std::size_t ci) {
            if (cavity[ci] == t0) return false;
            visit_mark_[cavity[ci]] = 0;
            cavity.erase(cavity.begin() + static_cast<long>(ci));
            return true;
        };

        // drop members no longer edge-connected to the seed
        {
            std::vector<int> reach{t0};
            std::vector<char> seen(cavity.size(), 0);
            auto index_of = [&](int t) -> int {
                for (std::size_t k = 0; k < cavity.size(); ++k)
                    if (cavity[k] == t) return static_cast<int>(k);
                return -1;
            };
            seen[index_of(t0)] = 1;
            for (std::size_t qi = 0; qi < reach.size(); ++qi) {
                const Tri& tr = tris_[reach[qi]];
                for (int i = 0; i < 3; ++i) {
                    const int nb = tr.n[i];
                    if (nb < 0 || !visited(nb)) continue;
                    if (constrained(tr.v[(i + 1) % 3], tr.v[(i + 2) % 3])) continue;
                    const int k = index_of(nb);
                    if (k >= 0 && !seen[k]) {
                        seen[k] = 1;
                        reach.push_back(nb);
                    }
                }
            }
            if (reach.size() != cavity.size()) {
                for (std::size_t k = cavity.size(); k-- > 0;)
                    if (!seen[k]) {
                        visit_mark_[cavity[k]] = 0;
                        cavity.erase(cavity.begin() + static_cast<long>(k));
                    }
            }
        }

        boundary.clear();
        bool ok = true;
        for (std::size_t ci = 0; ci < cavity.size() && ok; ++ci) {
            const Tri& tr = tris_[cavity[ci]];
            for (int i = 0; i < 3; ++i) {
                const int nb = tr.n[i];
                const int ea = tr.v[(i + 1) % 3];
                const int eb = tr.v[(i + 2) % 3];
                if (nb >= 0 && visited(nb) && !constrained(ea, eb)) continue;
                // boundary edge (ea -> eb) is CCW around the cavity
                if (orient(pts_[ea], pts_[eb], p) <= kOrientEps) {
                    if (!evict(ci)) return false;
                    ok = false;
                    break;
                }
                boundary.push_back({ea, eb, nb});
            }
        }
        if (!ok) continue;
        if (boundary.empty()) return false;

        // a vertex of a cavity triangle that is on no boundary edge would be
        // orphaned by the carve; evict one of its triangles and retry
        bool orphan = false;
        for (std::size_t ci = 0; ci < cavity.size() && !orphan; ++ci) {
            for (const int v : tris_[cavity[ci]].v) {
                bool on_boundary = false;
                for (const auto& e : boundary)
                    if (e.a == v || e.b == v) {
                        on_boundary = true;
                        break;
                    }
                if (!on_boundary) {
                    if (!evict(ci)) return false;
                    orphan = true;
                    break;
                }
            }
        }
        if (orphan) continue;

        // the directed boundary edges must chain into a single closed loop
        std::unordered_map<int, int> next;
        bool dup = false;
        for (const auto& e : boundary) dup |= !next.emplace(e.a, e.b).second;
        if (dup) return false;
        int walk = boundary.front().a;
        std::size_t steps = 0;
        do {
            const auto it = next.find(walk);
            if (it == next.end()) break;
            walk = it->second;
            ++steps;
        } while (walk != boundary.front().a && steps <= boundary.size());
        if (steps != boundary.size() || walk != boundary.front().a) return false;

        return true;
    }
    return false;
}

int Triangulator::carve(const Vec2& p, int curve, double param, const std::vector<int>& cavity,
                        const std::vector<CavityEdge>& boundary) {
    const int vid = add_vertex(p, curve, param);
    ++insertions_;

    std::unordered_map<int, int> start_at, end_at;  // boundary vertex -> new triangle
    std::vector<int> new_tris;
    new_tris.reserve(boundary.size());
    for (const auto& e : boundary) {
        const int nt = add_tri(vid, e.a, e.b);
        tris_[nt].n[0] = e.outside;  // across edge (a, b), opposite vid
        if (e.outside >= 0) set_neighbor(e.outside, e.a, e.b, nt);
        start_at[e.a] = nt;
        end_at[e.b] = nt;
        new_tris.push_back(nt);
    }
    for (std::size_t i = 0; i < boundary.size(); ++i) {
        const int nt = new_tris[i];
        // edge (b, vid) opposite a (index 1); edge (vid, a) opposite b (index 2)
        tris_[nt].n[1] = start_at.at(boundary[i].b);
        tris_[nt].n[2] = end_at.at(boundary[i].a);
    }
    for (const int t : cavity) tris_[t].alive = false;
    for (const int nt : new_tris) queue_.push_back(nt);
    return vid;
}

void Triangulator::validate_structure() const {
    for (std::size_t t = 0; t < tris_.size(); ++t) {
        if (!tris_[t].alive) continue;
        const Tri& tr = tris_[t];
        for (int i = 0; i < 3; ++i) {
            const int nb = tr.n[i];
            if (nb < 0) continue;
            if (!tris_[nb].alive)
                throw MeshError("paranoia: triangle " + std::to_string(t) + " points at dead neighbor");
            const int ea = tr.v[(i + 1) % 3];
            const int eb = tr.v[(i + 2) % 3];
            bool mutual = false;
            for (int k = 0; k < 3; ++k) {
                const int na = tris_[nb].v[(k + 1) % 3];
                const int nb2 = tris_[nb].v[(k + 2) % 3];
                if (((na == ea && nb2 == eb) || (na == eb && nb2 == ea)) &&
                    tris_[nb].n[k] == static_cast<int>(t))
                    mutual = true;
            }
            if (!mutual)
                throw MeshError("paranoia: adjacency not mutual at triangle " + std::to_string(t));
        }
    }
}

std::pair<int, bool> Triangulator::insert_point(const Vec2& p, int curve, double param, int hint) {
    const int t0 = locate(p, hint);
    for (const int v : tris_[t0].v) {
        if (distance(pts_[v], p) < kVertexMergeEps) return {v, false};
    }
    std::vector<int> cavity;
    std::vector<CavityEdge> boundary;
    if (!build_cavity(p, t0, cavity, boundary)) return {-1, false};
    const int vid = carve(p, curve, param, cavity, boundary);
    static const bool paranoia = std::getenv("MAGSPRING_MESH_PARANOIA") != nullptr;
    if (paranoia) validate_structure();
    return {vid, true};
}

void Triangulator::recover_segment(int a, int b, int curve, double ta, double tb, int depth) {
    if (depth > 48)
        throw MeshError("triangulate: failed to recover a boundary segment (degenerate outline?)");
    if (edge_exists(a, b)) {
        mark_constraint(a, b, curve, ta, tb);
        return;
    }
    const double tm = 0.5 * (ta + tb);
    const Vec2 pm = normalize(out_.curves[curve].point(tm));
    auto [mid, inserted] = insert_point(pm, curve, tm, vtri_[a]);
    if (mid < 0 || mid == a || mid == b)
        throw MeshError("triangulate: boundary segment could not be split");
    recover_segment(a, mid, curve, ta, tm, depth + 1);
    recover_segment(mid, b, curve, tm, tb, depth + 1);
}

bool Triangulator::split_constraint(int a, int b) {
    if (a > b) std::swap(a, b);  // params are stored in this order
    const auto it = constraints_.find(edge_key(a, b));
    if (it == constraints_.end()) return false;
    const ConstraintInfo info = it->second;
    const double len = distance(pts_[a], pts_[b]);
    if (len < 1e-7) return false;  // refuse to split below resolution; audit will judge
    constraints_.erase(it);
    const double tm = 0.5 * (info.ta + info.tb);
    const Vec2 pm = normalize(out_.curves[info.curve].point(tm));
    auto [mid, inserted] = insert_point(pm, info.curve, tm, vtri_[a]);
    if (mid < 0 || mid == a || mid == b) {
        constraints_[edge_key(a, b)] = info;  // could not place the midpoint; restore
        return false;
    }
    mark_constraint(a, mid, info.curve, info.ta, tm);
    mark_constraint(mid, b, info.curve, tm, info.tb);
    if (!edge_exists(a, mid) || !edge_exists(mid, b))
        throw MeshError("triangulate: constraint split produced a non-edge near (" +
                        std::to_string(pm.x) + ", " + std::to_string(pm.y) + ")");
    return true;
}

Vec2 Triangulator::circumcenter(const Tri& t, double& radius) const {
    const Vec2& a = pts_[t.v[0]];
    const Vec2& b = pts_[t.v[1]];
    const Vec2& c = pts_[t.v[2]];
    const Vec2 ab = b - a, ac = c - a;
    const double d = 2.0 * ab.cross(ac);
    if (std::abs(d) < 1e-30) {
        radius = std::numeric_limits<double>::infinity();
        return a;
    }
    const double ab2 = ab.norm2(), ac2 = ac.norm2();
    const Vec2 rel{(ac.y * ab2 - ab.y * ac2) / d, (ab.x * ac2 - ac.x * ab2) / d};
    radius = rel.norm();
    return a + rel;
}

bool Triangulator::is_bad(int tri) const {
    const Tri& t = tris_[tri];
    if (!t.alive || exterior(t)) return false;
    const Vec2& a = pts_[t.v[0]];
    const Vec2& b = pts_[t.v[1]];
    const Vec2& c = pts_[t.v[2]];
    const double la = distance(b, c), lb = distance(c, a), lc = distance(a, b);
    const double lmin = std::min({la, lb, lc});
    const double lmax = std::max({la, lb, lc});
    const double area = 0.5 * std::abs((b - a).cross(c - a));
    const double r = (la * lb * lc) / std::max(4.0 * area, 1e-300);
    const bool quality_bad = r / std::max(lmin, 1e-300) > kQualityBound;
    const Vec2 centroid = (a + b + c) / 3.0;
    return quality_bad || lmax > size_target(centroid);
}

void Triangulator::refine() {
    queue_.clear();
    for (std::size_t i = 0; i < tris_.size(); ++i)
        if (tris_[i].alive) queue_.push_back(static_cast<int>(i));

    const long long insert_cap = 4000000;
    int rescans = 0;
    while (true) {
        while (!queue_.empty()) {
            const int ti = queue_.front();
            queue_.pop_front();
            if (ti >= static_cast<int>(tris_.size()) || !tris_[ti].alive) continue;
            if (!is_bad(ti)) continue;
            if (insertions_ > insert_cap)
                throw MeshError("triangulate: refinement exceeded the insertion budget");

            double cr = 0.0;
            Vec2 c = circumcenter(tris_[ti], cr);
            if (!std::isfinite(cr) || cr > 8.0) {
                // degenerate triangle: fall back to longest-edge midpoint
                const Tri& t = tris_[ti];
                int ea = t.v[0], eb = t.v[1];
                double best = -1.0;
                for (int i = 0; i < 3; ++i) {
                    const int va = t.v[(i + 1) % 3], vb = t.v[(i + 2) % 3];
                    const double len = distance(pts_[va], pts_[vb]);
                    if (len > best) {
                        best = len;
                        ea = va;
                        eb = vb;
                    }
                }
                bool progressed;
                if (constrained(ea, eb)) {
                    progressed = split_constraint(ea, eb);
                } else {
                    auto [vid, inserted] = insert_point(0.5 * (pts_[ea] + pts_[eb]), -1, 0.0, ti);
                    progressed = inserted;
                }
                if (progressed && ti < static_cast<int>(tris_.size()) && tris_[ti].alive)
                    queue_.push_back(ti);
                continue;
            }

            // Walk from the triangle toward the circumcenter; a constrained
            // edge in the way is split instead (Ruppert encroachment rule).
            int cur = ti;
            int blocked_a = -1, blocked_b = -1;
            Vec2 from = (pts_[tris_[ti].v[0]] + pts_[tris_[ti].v[1]] + pts_[tris_[ti].v[2]]) / 3.0;
            for (long long step = 0; step < 2 * static_cast<long long>(tris_.size()) + 64; ++step) {
                const Tri& tr = tris_[cur];
                int next = -1;
                for (int i = 0; i < 3; ++i) {
                    const int va = tr.v[(i + 1) % 3];
                    const int vb = tr.v[(i + 2) % 3];
                    if (orient(pts_[va], pts_[vb], c) < -kOrientEps &&
                        orient(pts_[va], pts_[vb], from) > kOrientEps) {
                        if (constrained(va, vb)) {
                            blocked_a = va;
                            blocked_b = vb;
                        } else {
                            next = tr.n[i];
                        }
                        break;
                    }
                }
                if (blocked_a >= 0 || next < 0) break;
                if (exterior(tris_[next])) {
                    // circumcenter escaped the domain without hitting a wall;
                    // treat the hull edge as the blocker
                    const Tri& tr2 = tris_[cur];
                    for (int i = 0; i < 3; ++i) {
                        const int va = tr2.v[(i + 1) % 3];
                        const int vb = tr2.v[(i + 2) % 3];
                        if (tr2.n[i] == next && constrained(va, vb)) {
                            blocked_a = va;
                            blocked_b = vb;
                        }
                    }
                    break;
                }
                cur = next;
            }

            if (blocked_a >= 0) {
                if (split_constraint(blocked_a, blocked_b) && tris_[ti].alive)
                    queue_.push_back(ti);
                continue;
            }

            // proximity guard: skip circumcenters that collapse onto a vertex
            bool too_close = false;
            for (const int v : tris_[cur].v)
                if (distance(pts_[v], c) < 4.0 * kVertexMergeEps) too_close = true;
            if (too_close) continue;

            std::vector<int> cavity;
            std::vector<CavityEdge> boundary;
            if (!build_cavity(c, cur, cavity, boundary)) continue;

            // encroachment: if the circumcenter sees a constrained cavity wall
            // from inside its diametral circle, split the wall instead
            int wall_a = -1, wall_b = -1;
            for (const auto& e : boundary) {
                if (!constrained(e.a, e.b)) continue;
                if ((c - pts_[e.a]).dot(c - pts_[e.b]) < 0.0) {
                    wall_a = e.a;
                    wall_b = e.b;
                    break;
                }
            }
            if (wall_a >= 0) {
                if (split_constraint(wall_a, wall_b) && tris_[ti].alive) queue_.push_back(ti);
                continue;
            }
            carve(c, -1, 0.0, cavity, boundary);
        }

        // safety rescan: requeue anything still bad (rare bookkeeping misses)
        bool any = false;
        for (std::size_t i = 0; i < tris_.size() && rescans < 8; ++i) {
            if (tris_[i].alive && is_bad(static_cast<int>(i))) {
                queue_.push_back(static_cast<int>(i));
                any = true;
            }
        }
        ++rescans;
        if (!any || rescans >= 8) break;
    }
}

Mesh Triangulator::extract() {
    // flood-fill region labels from the outline seeds; constrained edges are
    // region boundaries
    std::vector<int> label(tris_.size(), -1);
    auto flood = [&](const Vec2& seed_real, Region region) {
        const int t0 = locate(normalize(seed_real), -1);
        if (!tris_[t0].alive || exterior(tris_[t0]))
            throw MeshError("triangulate: region seed landed outside the domain");
        if (label[t0] != -1)
            throw MeshError(std::string("triangulate: ") + region_name(region) + " seed at (" +
                            std::to_string(seed_real.x) + ", " + std::to_string(seed_real.y) +
                            ") already labeled " + region_name(static_cast<Region>(label[t0])) +
                            " (leaked region boundary)");
        std::vector<int> stack{t0};
        label[t0] = static_cast<int>(region);
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            const Tri& tr = tris_[t];
            for (int i = 0; i < 3; ++i) {
                const int nb = tr.n[i];
                if (nb < 0 || !tris_[nb].alive || exterior(tris_[nb])) continue;
                if (constrained(tr.v[(i + 1) % 3], tr.v[(i + 2) % 3])) continue;
                if (label[nb] == -1) {
                    label[nb] = static_cast<int>(region);
                    stack.push_back(nb);
                }
            }
        }
    };

    double inner_extent = 0.0;
    for (std::size_t i = 0; i < pts_.size(); ++i) {
        if (is_super(static_cast<int>(i)) || pt_curve_[i] == out_.outer_curve) continue;
        inner_extent = std::max(inner_extent, pts_[i].norm());
    }
    const Vec2 air_seed = denormalize({0.5 * (inner_extent + 1.0), 0.0});
    flood(air_seed, Region::air);
    flood(out_.pm_seed, Region::pm);
    if (out_.has_stripe) flood(out_.mre_seed, Region::mre);

    Mesh mesh;
    std::vector<int> remap(pts_.size(), -1);
    for (std::size_t i = 0; i < tris_.size(); ++i) {
        const Tri& t = tris_[i];
        if (!t.alive || exterior(t)) continue;
        if (label[i] == -1) throw MeshError("triangulate: region flood left unlabeled triangles");
        Mesh::Tri mt;
        int ids[3];
        for (int k = 0; k < 3; ++k) {
            const int v = t.v[k];
            if (remap[v] == -1) {
                remap[v] = static_cast<int>(mesh.nodes.size());
                mesh.nodes.push_back(denormalize(pts_[v]));
            }
            ids[k] = remap[v];
        }
        mt.a = ids[0];
        mt.b = ids[1];
        mt.c = ids[2];
        mt.tag = static_cast<Region>(label[i]);
        if (signed_area(mesh.nodes[mt.a], mesh.nodes[mt.b], mesh.nodes[mt.c]) < 0.0)
            std::swap(mt.b, mt.c);
        mesh.triangles.push_back(mt);
    }
    for (std::size_t i = 0; i < pts_.size(); ++i)
        if (remap[i] >= 0 && pt_curve_[i] == out_.outer_curve) mesh.boundary_nodes.push_back(remap[i]);
    std::sort(mesh.boundary_nodes.begin(), mesh.boundary_nodes.end());
    return mesh;
}

Mesh Triangulator::run() {
    scale_ = out_.air_radius;
    if (!(scale_ > 0.0)) throw MeshError("triangulate: outline has no air radius");
    if (p_.h_max > out_.min_feature)
        throw MeshError("triangulate: h_max = " + std::to_string(p_.h_max) +
                        " exceeds the thinnest feature (" + std::to_string(out_.min_feature) +
                        "); choose h_max <= the stripe thickness");

    // big super triangle in normalized coordinates (domain radius is 1)
    add_vertex({-64.0, -64.0}, -1, 0.0);
    add_vertex({64.0, -64.0}, -1, 0.0);
    add_vertex({0.0, 64.0}, -1, 0.0);
    add_tri(0, 1, 2);

    int hint = 0;
    std::vector<int> ids(out_.points.size(), -1);
    for (std::size_t i = 0; i < out_.points.size(); ++i) {
        auto [vid, inserted] = insert_point(normalize(out_.points[i]), -1, 0.0, hint);
        if (vid < 0) throw MeshError("triangulate: failed to insert an outline point");
        ids[i] = vid;
        hint = vtri_[vid];
    }
    // remember parent curves for boundary-node extraction; the outer circle
    // comes last in the segment list so its points keep the outer curve id
    for (const auto& s : out_.segments) {
        if (s.curve >= 0) {
            pt_curve_[ids[s.a]] = s.curve;
            pt_param_[ids[s.a]] = s.ta;
            pt_curve_[ids[s.b]] = s.curve;
            pt_param_[ids[s.b]] = s.tb;
        }
    }
    for (const auto& s : out_.segments)
        recover_segment(ids[s.a], ids[s.b], s.curve, s.ta, s.tb, 0);

    refine();

    // every constrained sub-segment must still be an edge of the triangulation
    for (const auto& [key, info] : constraints_) {
        const int a = static_cast<int>(key >> 32);
        const int b = static_cast<int>(key & 0xffffffffu);
        if (!edge_exists(a, b))
            throw MeshError("triangulate: a constrained edge was lost during refinement");
    }
    return extract();
}

}  // namespace

Mesh triangulate(const Outline& outline, const MeshParams& p) {
    p.validate();
    Triangulator tr(outline, p);
    Mesh mesh = tr.run();

    // generator-enforced invariants
    double covered = 0.0;
    for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
        const double area = triangle_area(mesh, static_cast<int>(i));
        if (!(area > 0.0)) throw MeshError("triangulate: non-positive triangle area");
        covered += area;
        const double ang = triangle_min_angle(mesh, static_cast<int>(i));
        if (ang < (kMinAngleDeg - 1e-6) * pi / 180.0)
            throw MeshError("triangulate: minimum-angle bound violated (" +
                            std::to_string(ang * 180.0 / pi) + " deg)");
        const auto& t = mesh.triangles[i];
        if (t.tag != Region::air) {
            const double lmax = std::max({distance(mesh.nodes[t.a], mesh.nodes[t.b]),
                                          distance(mesh.nodes[t.b], mesh.nodes[t.c]),
                                          distance(mesh.nodes[t.c], mesh.nodes[t.a])});
            if (lmax > p.h_max * (1.0 + 1e-9))
                throw MeshError("triangulate: edge length target violated in " +
                                std::string(region_name(t.tag)));
        }
    }
    const double disk = pi * outline.air_radius * outline.air_radius;
    if (std::abs(covered - disk) > 0.005 * disk)
        throw MeshError("triangulate: mesh does not cover the air disk within 0.5%");
    return mesh;
}

}  // namespace magspring::msh
