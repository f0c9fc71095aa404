#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "magspring/materials.hpp"
#include "magspring/mesh.hpp"
#include "magspring/vec2.hpp"

namespace magspring::fem {

/// Material assignment per mesh region tag.
struct MaterialMap {
    std::array<mat::MaterialModel, 3> by_region{};  // indexed by msh::Region

    const mat::MaterialModel& of(msh::Region r) const {
        return by_region[static_cast<int>(r)];
    }
    mat::MaterialModel& of(msh::Region r) { return by_region[static_cast<int>(r)]; }

    static MaterialMap make(mat::MaterialModel air, mat::MaterialModel mre, mat::MaterialModel pm);
    /// Same map with the stripe region replaced by air (isolated-magnet reference).
    MaterialMap with_mre_as_air() const;
};

struct SolverOptions {
    enum class Method { direct, cg };
    Method method = Method::direct;
    double tolerance = 1e-10;  // relative residual
    int max_iterations = 20000;
    bool deterministic = true;  // both methods are deterministic; kept as a config surface
};

struct SolveStats {
    int n_nodes = 0;
    int n_dofs = 0;
    int iterations = 0;  // 0 for the direct path
    double residual = 0.0;
    std::string method;
};

/// Nodal vector potential plus element-wise fields on the mesh it was solved on.
struct FieldSolution {
    std::shared_ptr<const msh::Mesh> mesh;
    std::vector<double> a;     // per node, zero on the outer boundary [Wb/m]
    std::vector<Vec2> b_elem;  // piecewise-constant flux density [T]
    std::vector<Vec2> h_elem;  // magnetizing field from the constitutive law [A/m]
    SolveStats stats;
};

struct AssembledSystem {
    Eigen::SparseMatrix<double> stiffness;  // free dofs only, SPD
    Eigen::VectorXd rhs;
    std::vector<int> node_to_dof;  // -1 on Dirichlet nodes
    int n_free = 0;
};

/// Galerkin P1 assembly of div(nu grad A) = -curl(nu b_r m_hat) with the
/// permanent magnet entering as an equivalent-magnetization source term and
/// A = 0 eliminated on the outer boundary.
AssembledSystem assemble(const msh::Mesh& mesh, const MaterialMap& materials);

FieldSolution solve_field(std::shared_ptr<const msh::Mesh> mesh, const MaterialMap& materials,
                          const SolverOptions& opts = {});

/// Coenergy of the whole domain: sum of the per-element coenergy density
/// times element area times the extrusion depth.
double total_coenergy(const FieldSolution& sol, const MaterialMap& materials, double depth);

/// Per-element centroid, Bx, By and region tag as CSV (debug/plot).
void write_field_csv(const FieldSolution& sol, std::ostream& out);

}  // namespace magspring::fem
