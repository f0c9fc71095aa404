#pragma once

#include <optional>
#include <string>
#include <vector>

#include "magspring/geometry.hpp"
#include "magspring/magnetostatics.hpp"
#include "magspring/mesh.hpp"
#include "magspring/spline.hpp"

namespace magspring::energy {

/// Coenergy vs wrap angle. Thetas are strictly increasing, in radians.
struct CoenergyCurve {
    std::vector<double> theta;
    std::vector<double> w_co;  // [J]

    struct Meta {
        std::string config_key;  // canonical content key of the sweep inputs
        int n_solves = 0;        // field solves actually performed
        int cache_hits = 0;
        long long total_elements = 0;
        double solve_seconds = 0.0;
    } meta;
};

struct TorqueCurve {
    std::vector<double> theta;
    std::vector<double> t_co;  // [N*m]
};

/// One cached sweep sample: full-system and isolated-magnet coenergy on the
/// same mesh. Keys are canonical content strings of all inputs.
struct SampleRecord {
    double w_full = 0.0;
    double w_self = 0.0;
    int n_elements = 0;
};

class SampleCache {
  public:
    virtual ~SampleCache() = default;
    virtual bool lookup(const std::string& key, SampleRecord& record) = 0;
    virtual void store(const std::string& key, const SampleRecord& record) = 0;
};

struct SweepOptions {
    fem::SolverOptions solver;
    Vec2 anchor;                        // stripe anchor; zero means default_anchor(g)
    bool use_default_anchor = true;
    int workers = 0;                    // 0 = MAGSPRING_WORKERS env or hardware
    bool self_energy_correction = true;  // subtract the same-mesh isolated-magnet energy
    // Average the two orthogonal in-plane magnetization directions. The plane
    // model collapses an axially magnetized disc onto an in-plane dipole whose
    // pole/equator asymmetry is an artifact; the average cancels it.
    bool average_magnetization = true;
    SampleCache* cache = nullptr;
};

/// Canonical content key for one (geometry, materials, mesh, theta) sample.
std::string sample_key(const geom::GripperGeometry& g, const fem::MaterialMap& materials,
                       const msh::MeshParams& mesh, const SweepOptions& opts, double theta);

/// One meshed configuration per theta: wrap path -> outline -> mesh ->
/// solve(s) -> total coenergy. Deterministic for a given configuration
/// regardless of the worker count; samples are joined in theta order.
///
/// Each reported w_co is the isolated-magnet coenergy of the first sample's
/// mesh plus the same-mesh energy gain of the wrapped stripe; the same-mesh
/// difference cancels the remeshing noise of the large magnet self-energy.
CoenergyCurve sweep_coenergy(const geom::GripperGeometry& g, const fem::MaterialMap& materials,
                             const msh::MeshParams& mesh_params, const std::vector<double>& theta_grid,
                             const SweepOptions& opts = {});

/// Cubic smoothing spline through the coenergy samples; lambda absent means
/// generalized cross-validation. Needs at least 8 samples.
spline::SmoothingSpline fit_spline(const CoenergyCurve& curve, std::optional<double> lambda);

/// Analytic derivative of the fitted spline on the evaluation grid.
TorqueCurve torque_curve(const spline::SmoothingSpline& s, const std::vector<double>& eval_grid);

/// Independent derivative estimate: central finite differences on the raw
/// samples, one-sided at the ends. Needs at least 3 samples.
TorqueCurve torque_fd_oracle(const CoenergyCurve& curve);

}  // namespace magspring::energy
