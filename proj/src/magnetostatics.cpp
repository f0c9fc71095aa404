#include "magspring/magnetostatics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include <Eigen/SparseCholesky>
#include <Eigen/IterativeLinearSolvers>

#include "magspring/constants.hpp"
#include "magspring/errors.hpp"

namespace magspring::fem {

using constants::mu0;

MaterialMap MaterialMap::make(mat::MaterialModel air, mat::MaterialModel mre, mat::MaterialModel pm) {
    MaterialMap m;
    m.of(msh::Region::air) = air;
    m.of(msh::Region::mre) = mre;
    m.of(msh::Region::pm) = pm;
    return m;
}

MaterialMap MaterialMap::with_mre_as_air() const {
    MaterialMap m = *this;
    m.of(msh::Region::mre) = of(msh::Region::air);
    return m;
}

namespace {

struct ElementGeometry {
    Vec2 grad[3];  // shape-function gradients
    double area = 0.0;
};

ElementGeometry element_geometry(const msh::Mesh& mesh, const msh::Mesh::Tri& t) {
    const Vec2& p0 = mesh.nodes[t.a];
    const Vec2& p1 = mesh.nodes[t.b];
    const Vec2& p2 = mesh.nodes[t.c];
    ElementGeometry e;
    e.area = msh::signed_area(p0, p1, p2);
    const double inv = 1.0 / (2.0 * e.area);
    e.grad[0] = {(p1.y - p2.y) * inv, (p2.x - p1.x) * inv};
    e.grad[1] = {(p2.y - p0.y) * inv, (p0.x - p2.x) * inv};
    e.grad[2] = {(p0.y - p1.y) * inv, (p1.x - p0.x) * inv};
    return e;
}

}  // namespace

AssembledSystem assemble(const msh::Mesh& mesh, const MaterialMap& materials) {
    for (const auto& m : materials.by_region) m.validate();

    AssembledSystem sys;
    sys.node_to_dof.assign(mesh.nodes.size(), 0);
    for (const int n : mesh.boundary_nodes) sys.node_to_dof[n] = -1;
    int dof = 0;
    for (auto& d : sys.node_to_dof)
        if (d == 0) d = dof++;
    sys.n_free = dof;

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(mesh.triangles.size() * 9);
    sys.rhs = Eigen::VectorXd::Zero(sys.n_free);

    for (const auto& t : mesh.triangles) {
        const ElementGeometry e = element_geometry(mesh, t);
        const mat::MaterialModel& m = materials.of(t.tag);
        const double nu = 1.0 / (mu0 * m.mu_r);
        const int nodes[3] = {t.a, t.b, t.c};

        for (int i = 0; i < 3; ++i) {
            const int di = sys.node_to_dof[nodes[i]];
            if (di < 0) continue;
            if (m.is_pm()) {
                // curl of the test function dotted with the remanence direction
                const Vec2 curl_phi{e.grad[i].y, -e.grad[i].x};
                sys.rhs(di) += nu * m.b_r * curl_phi.dot(m.magnetization_dir) * e.area;
            }
            for (int j = 0; j < 3; ++j) {
                const int dj = sys.node_to_dof[nodes[j]];
                if (dj < 0) continue;
                triplets.emplace_back(di, dj, nu * e.grad[i].dot(e.grad[j]) * e.area);
            }
        }
    }
    sys.stiffness.resize(sys.n_free, sys.n_free);
    sys.stiffness.setFromTriplets(triplets.begin(), triplets.end());
    sys.stiffness.makeCompressed();
    return sys;
}

FieldSolution solve_field(std::shared_ptr<const msh::Mesh> mesh, const MaterialMap& materials,
                          const SolverOptions& opts) {
    const msh::Mesh& m = *mesh;
    AssembledSystem sys = assemble(m, materials);

    FieldSolution sol;
    sol.mesh = mesh;
    sol.stats.n_nodes = static_cast<int>(m.nodes.size());
    sol.stats.n_dofs = sys.n_free;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.n_free);
    const double rhs_norm = sys.rhs.norm();
    if (rhs_norm > 0.0) {
        auto rel_residual = [&](const Eigen::VectorXd& v) {
            return (sys.stiffness * v - sys.rhs).norm() / rhs_norm;
        };
        auto run_cg = [&](const Eigen::VectorXd& guess) {
            Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
            cg.setTolerance(opts.tolerance);
            cg.setMaxIterations(opts.max_iterations);
            cg.compute(sys.stiffness);
            Eigen::VectorXd result = cg.solveWithGuess(sys.rhs, guess);
            sol.stats.iterations += static_cast<int>(cg.iterations());
            if (cg.info() != Eigen::Success && rel_residual(result) > opts.tolerance)
                throw SolveError("solve_field: CG did not converge within " +
                                 std::to_string(opts.max_iterations) + " iterations (residual " +
                                 std::to_string(cg.error()) + ")");
            return result;
        };

        if (opts.method == SolverOptions::Method::direct) {
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(sys.stiffness);
            if (ldlt.info() != Eigen::Success)
                throw SolveError("solve_field: sparse factorization failed");
            x = ldlt.solve(sys.rhs);
            sol.stats.method = "ldlt";
            if (rel_residual(x) > opts.tolerance) {
                x = run_cg(x);  // iterative fallback polishes the direct solution
                sol.stats.method = "ldlt+cg";
            }
        } else {
            x = run_cg(x);
            sol.stats.method = "cg";
        }
        sol.stats.residual = rel_residual(x);
        if (sol.stats.residual > opts.tolerance)
            throw SolveError("solve_field: relative residual " + std::to_string(sol.stats.residual) +
                             " above tolerance " + std::to_string(opts.tolerance));
    } else {
        sol.stats.method = "trivial";
    }

    sol.a.assign(m.nodes.size(), 0.0);
    for (std::size_t n = 0; n < m.nodes.size(); ++n)
        if (sys.node_to_dof[n] >= 0) sol.a[n] = x(sys.node_to_dof[n]);

    sol.b_elem.resize(m.triangles.size());
    sol.h_elem.resize(m.triangles.size());
    for (std::size_t i = 0; i < m.triangles.size(); ++i) {
        const auto& t = m.triangles[i];
        const ElementGeometry e = element_geometry(m, t);
        Vec2 grad_a{0.0, 0.0};
        const int nodes[3] = {t.a, t.b, t.c};
        for (int k = 0; k < 3; ++k) grad_a += sol.a[nodes[k]] * e.grad[k];
        const Vec2 b{grad_a.y, -grad_a.x};  // curl of the scalar potential
        sol.b_elem[i] = b;
        const mat::MaterialModel& mm = materials.of(t.tag);
        if (mm.is_pm())
            sol.h_elem[i] = (b - mm.b_r * mm.magnetization_dir) / (mu0 * mm.mu_r);
        else
            sol.h_elem[i] = b / (mu0 * mm.mu_r);
    }
    return sol;
}

double total_coenergy(const FieldSolution& sol, const MaterialMap& materials, double depth) {
    const msh::Mesh& m = *sol.mesh;
    double w = 0.0;
    for (std::size_t i = 0; i < m.triangles.size(); ++i) {
        const double area = msh::triangle_area(m, static_cast<int>(i));
        w += mat::coenergy_density(materials.of(m.triangles[i].tag), sol.b_elem[i]) * area;
    }
    return w * depth;
}

void write_field_csv(const FieldSolution& sol, std::ostream& out) {
    out << "x_m,y_m,bx_T,by_T,region\n";
    const msh::Mesh& m = *sol.mesh;
    char buf[160];
    for (std::size_t i = 0; i < m.triangles.size(); ++i) {
        const Vec2 c = msh::triangle_centroid(m, static_cast<int>(i));
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%s\n", c.x, c.y, sol.b_elem[i].x,
                      sol.b_elem[i].y, msh::region_name(m.triangles[i].tag));
        out << buf;
    }
}

}  // namespace magspring::fem
