#include <doctest.h>

#include <cmath>
#include <memory>

#include "magspring/constants.hpp"
#include "magspring/errors.hpp"
#include "magspring/magnetostatics.hpp"

using namespace magspring;
using constants::mu0;
using constants::pi;
using fem::MaterialMap;
using mat::MaterialModel;

namespace {

std::shared_ptr<const msh::Mesh> disk_mesh(double disk_radius, double air_radius, double h) {
    msh::MeshParams p;
    p.h_max = h;
    const auto outline = msh::build_disk_outline(disk_radius, air_radius, p);
    return std::make_shared<const msh::Mesh>(msh::triangulate(outline, p));
}

MaterialMap cylinder_materials(double b_r, Vec2 dir = {1.0, 0.0}) {
    return MaterialMap::make(MaterialModel::make_air(), MaterialModel::make_air(),
                             MaterialModel::make_pm(b_r, b_r / mu0, 1.0, dir));
}

struct CylinderError {
    double mean_rel = 0.0;     // |mean B - exact| / |exact|
    double scatter_rel = 0.0;  // RMS deviation around the exact value
};

CylinderError cylinder_field_error(const msh::Mesh& m, const fem::FieldSolution& sol, double b_r,
                                   double a, double r_air) {
    // uniformly magnetized 2D cylinder inside a grounded circle: the interior
    // field is uniform, B = (b_r/2) * (1 - a^2/R^2) along the magnetization
    const double exact = 0.5 * b_r * (1.0 - a * a / (r_air * r_air));
    Vec2 mean{0.0, 0.0};
    double area = 0.0, scatter = 0.0;
    for (std::size_t i = 0; i < m.triangles.size(); ++i) {
        if (m.triangles[i].tag != msh::Region::pm) continue;
        const double ar = msh::triangle_area(m, static_cast<int>(i));
        mean += ar * sol.b_elem[i];
        area += ar;
    }
    mean = mean / area;
    for (std::size_t i = 0; i < m.triangles.size(); ++i) {
        if (m.triangles[i].tag != msh::Region::pm) continue;
        const double ar = msh::triangle_area(m, static_cast<int>(i));
        scatter += ar * (sol.b_elem[i] - Vec2{exact, 0.0}).norm2();
    }
    CylinderError e;
    e.mean_rel = (mean - Vec2{exact, 0.0}).norm() / exact;
    e.scatter_rel = std::sqrt(scatter / area) / exact;
    return e;
}

}  // namespace

TEST_CASE("no magnetization anywhere gives the zero solution") {
    auto mesh = disk_mesh(0.010, 0.060, 1.5e-3);
    const MaterialMap mats =
        MaterialMap::make(MaterialModel::make_air(), MaterialModel::make_air(),
                          MaterialModel::make_permeable(3.0));
    const auto sys = fem::assemble(*mesh, mats);
    CHECK(sys.rhs.norm() == 0.0);
    const auto sol = fem::solve_field(mesh, mats);
    for (const double a : sol.a) CHECK(a == 0.0);
    for (const auto& b : sol.b_elem) CHECK(b.norm() == 0.0);
    CHECK(fem::total_coenergy(sol, mats, 0.015) == 0.0);
}

TEST_CASE("assembled stiffness is symmetric") {
    auto mesh = disk_mesh(0.010, 0.060, 1.5e-3);
    const MaterialMap mats = cylinder_materials(1.0);
    const auto sys = fem::assemble(*mesh, mats);
    const Eigen::SparseMatrix<double> diff = Eigen::SparseMatrix<double>(sys.stiffness.transpose()) -
                                             sys.stiffness;
    double max_diff = 0.0, max_abs = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it)
            max_diff = std::max(max_diff, std::abs(it.value()));
    for (int k = 0; k < sys.stiffness.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.stiffness, k); it; ++it)
            max_abs = std::max(max_abs, std::abs(it.value()));
    CHECK(max_diff / max_abs < 1e-12);
}

TEST_CASE("flipping the magnetization negates the source exactly") {
    auto mesh = disk_mesh(0.010, 0.060, 1.5e-3);
    const auto sys_pos = fem::assemble(*mesh, cylinder_materials(1.0, {1.0, 0.0}));
    const auto sys_neg = fem::assemble(*mesh, cylinder_materials(1.0, {-1.0, 0.0}));
    CHECK((sys_pos.rhs + sys_neg.rhs).norm() == 0.0);
}

TEST_CASE("magnetized cylinder reproduces the analytic interior field") {
    const double a = 0.010, r_air = 0.120, b_r = 1.0;
    auto mesh = disk_mesh(a, r_air, a / 20.0);  // h = d/40
    const MaterialMap mats = cylinder_materials(b_r);
    const auto sol = fem::solve_field(mesh, mats);
    const auto err = cylinder_field_error(*mesh, sol, b_r, a, r_air);
    CHECK(err.mean_rel < 0.02);
    CHECK(err.scatter_rel < 0.05);

    // interior field against the classical free-space value mu0*M/2 = b_r/2
    Vec2 mean{0.0, 0.0};
    double area = 0.0;
    for (std::size_t i = 0; i < mesh->triangles.size(); ++i) {
        if (mesh->triangles[i].tag != msh::Region::pm) continue;
        const double ar = msh::triangle_area(*mesh, static_cast<int>(i));
        mean += ar * sol.b_elem[i];
        area += ar;
    }
    mean = mean / area;
    CHECK((mean - Vec2{0.5 * b_r, 0.0}).norm() / (0.5 * b_r) < 0.02);
}

TEST_CASE("field error decreases under refinement") {
    const double a = 0.010, r_air = 0.120, b_r = 1.0;
    const auto coarse_mesh = disk_mesh(a, r_air, a / 10.0);
    const auto fine_mesh = disk_mesh(a, r_air, a / 20.0);
    const MaterialMap mats = cylinder_materials(b_r);
    const auto ec = cylinder_field_error(*coarse_mesh, fem::solve_field(coarse_mesh, mats), b_r, a, r_air);
    const auto ef = cylinder_field_error(*fine_mesh, fem::solve_field(fine_mesh, mats), b_r, a, r_air);
    CHECK(ef.scatter_rel < ec.scatter_rel);
}

TEST_CASE("solution scales linearly with the remanence") {
    auto mesh = disk_mesh(0.010, 0.060, 1.0e-3);
    const auto sol1 = fem::solve_field(mesh, cylinder_materials(0.6));
    const auto sol2 = fem::solve_field(mesh, cylinder_materials(1.2));
    double max_rel = 0.0;
    double scale = 0.0;
    for (const double v : sol1.a) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < sol1.a.size(); ++i)
        max_rel = std::max(max_rel, std::abs(sol2.a[i] - 2.0 * sol1.a[i]) / scale);
    CHECK(max_rel < 1e-9);
}

TEST_CASE("coenergy scales quadratically and is raised by permeable material") {
    auto mesh = disk_mesh(0.010, 0.060, 1.0e-3);
    const MaterialMap m1 = cylinder_materials(0.5);
    const MaterialMap m2 = cylinder_materials(1.0);
    const double w1 = fem::total_coenergy(fem::solve_field(mesh, m1), m1, 0.015);
    const double w2 = fem::total_coenergy(fem::solve_field(mesh, m2), m2, 0.015);
    CHECK(w2 == doctest::Approx(4.0 * w1).epsilon(1e-6));

    // analytic self-coenergy of the cylinder inside the grounded circle:
    // interior density (beta^2 - 1)/2, exterior (1 - q^2)/8 in units of
    // b_r^2/mu0 per unit disk area, with q = (a/R)^2, beta = (1-q)/2
    const double q = (0.010 * 0.010) / (0.060 * 0.060);
    const double beta = 0.5 * (1.0 - q);
    const double w_exact =
        (0.5 * beta * beta - 0.5 + (1.0 - q * q) / 8.0) * pi * 0.010 * 0.010 / mu0 * 0.015;
    CHECK(w2 == doctest::Approx(w_exact).epsilon(0.01));
}

TEST_CASE("constitutive law holds element-wise") {
    auto mesh = disk_mesh(0.010, 0.060, 1.0e-3);
    const MaterialMap mats = cylinder_materials(1.0);
    const auto sol = fem::solve_field(mesh, mats);
    for (std::size_t i = 0; i < mesh->triangles.size(); ++i) {
        const auto& mm = mats.of(mesh->triangles[i].tag);
        Vec2 reconstructed;
        if (mm.is_pm())
            reconstructed = mu0 * mm.mu_r * sol.h_elem[i] + mm.b_r * mm.magnetization_dir;
        else
            reconstructed = mu0 * mm.mu_r * sol.h_elem[i];
        CHECK((reconstructed - sol.b_elem[i]).norm() <= 1e-10 * (sol.b_elem[i].norm() + 1e-12));
    }
    for (const int n : mesh->boundary_nodes) CHECK(sol.a[n] == 0.0);
}

TEST_CASE("permeable stripe raises the coenergy over the bare magnet") {
    // same mesh, stripe region set to air for the reference solve
    const geom::GripperGeometry g{0.018, 0.020, 0.015, 0.060, 0.003, 3};
    msh::MeshParams p;
    p.h_max = 1.5e-3;
    const auto path = geom::wrap_path(g, 0.0, geom::default_anchor(g));
    const auto outline = msh::build_geometry_outline(g, path, p);
    auto mesh = std::make_shared<const msh::Mesh>(msh::triangulate(outline, p));

    const MaterialMap with_stripe =
        MaterialMap::make(MaterialModel::make_air(), MaterialModel::make_permeable(3.0),
                          MaterialModel::make_pm(1.23, 899e3, 1.05));
    const MaterialMap bare = with_stripe.with_mre_as_air();

    const double w_stripe =
        fem::total_coenergy(fem::solve_field(mesh, with_stripe), with_stripe, g.w);
    const double w_bare = fem::total_coenergy(fem::solve_field(mesh, bare), bare, g.w);
    CHECK(w_stripe > w_bare);
}

TEST_CASE("deterministic repeat solves are bit-identical") {
    auto mesh = disk_mesh(0.010, 0.060, 1.2e-3);
    const MaterialMap mats = cylinder_materials(1.0);
    const auto s1 = fem::solve_field(mesh, mats);
    const auto s2 = fem::solve_field(mesh, mats);
    for (std::size_t i = 0; i < s1.a.size(); ++i) CHECK(s1.a[i] == s2.a[i]);
}

TEST_CASE("conjugate-gradient fallback agrees with the direct solver") {
    auto mesh = disk_mesh(0.010, 0.060, 1.2e-3);
    const MaterialMap mats = cylinder_materials(1.0);
    fem::SolverOptions cg;
    cg.method = fem::SolverOptions::Method::cg;
    const auto sd = fem::solve_field(mesh, mats);
    const auto sc = fem::solve_field(mesh, mats, cg);
    CHECK(sc.stats.iterations > 0);
    double scale = 0.0, max_diff = 0.0;
    for (const double v : sd.a) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < sd.a.size(); ++i)
        max_diff = std::max(max_diff, std::abs(sd.a[i] - sc.a[i]));
    CHECK(max_diff / scale < 1e-7);
}
