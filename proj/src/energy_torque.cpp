#include "magspring/energy_torque.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <thread>

#include "magspring/constants.hpp"
#include "magspring/errors.hpp"

namespace magspring::energy {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int resolve_workers(int requested, std::size_t n_tasks) {
    int w = requested;
    if (w <= 0) {
        if (const char* env = std::getenv("MAGSPRING_WORKERS")) w = std::atoi(env);
    }
    if (w <= 0) w = static_cast<int>(std::thread::hardware_concurrency());
    if (w <= 0) w = 1;
    w = std::min<int>(w, 16);
    return std::max(1, std::min<int>(w, static_cast<int>(n_tasks)));
}

std::string material_key(const mat::MaterialModel& m) {
    return std::to_string(static_cast<int>(m.kind)) + ":" + fmt_double(m.mu_r) + ":" +
           fmt_double(m.b_r) + ":" + fmt_double(m.h_c) + ":" + fmt_double(m.magnetization_dir.x) +
           "," + fmt_double(m.magnetization_dir.y);
}

}  // namespace

std::string sample_key(const geom::GripperGeometry& g, const fem::MaterialMap& materials,
                       const msh::MeshParams& mesh, const SweepOptions& opts, double theta) {
    const Vec2 anchor = opts.use_default_anchor ? geom::default_anchor(g) : opts.anchor;
    std::string key = "v1|geom=";
    for (double v : {g.r_frame, g.d_pm, g.w, g.finger_length, g.finger_thickness}) key += fmt_double(v) + ",";
    key += std::to_string(g.n_fingers);
    key += "|mat=" + material_key(materials.of(msh::Region::air)) + ";" +
           material_key(materials.of(msh::Region::mre)) + ";" +
           material_key(materials.of(msh::Region::pm));
    key += "|mesh=" + fmt_double(mesh.h_max) + "," + fmt_double(mesh.h_air) + "," +
           fmt_double(mesh.air_radius_factor);
    key += "|anchor=" + fmt_double(anchor.x) + "," + fmt_double(anchor.y);
    key += "|corr=" + std::to_string(opts.self_energy_correction ? 1 : 0);
    key += "|avg=" + std::to_string(opts.average_magnetization ? 1 : 0);
    key += "|solver=" + std::to_string(static_cast<int>(opts.solver.method)) + "," +
           fmt_double(opts.solver.tolerance);
    key += "|theta=" + fmt_double(theta);
    return key;
}

namespace {

SampleRecord compute_sample(const geom::GripperGeometry& g, const fem::MaterialMap& materials,
                            const msh::MeshParams& mesh_params, const SweepOptions& opts,
                            double theta) {
    const Vec2 anchor = opts.use_default_anchor ? geom::default_anchor(g) : opts.anchor;
    const geom::WrapPath path = geom::wrap_path(g, theta, anchor);
    const msh::Outline outline = msh::build_geometry_outline(g, path, mesh_params);
    auto mesh = std::make_shared<const msh::Mesh>(msh::triangulate(outline, mesh_params));

    std::vector<fem::MaterialMap> maps{materials};
    if (opts.average_magnetization) {
        fem::MaterialMap rotated = materials;
        auto& pm = rotated.of(msh::Region::pm);
        pm.magnetization_dir = pm.magnetization_dir.perp();
        maps.push_back(rotated);
    }

    SampleRecord rec;
    rec.n_elements = static_cast<int>(mesh->triangles.size());
    for (const auto& map : maps) {
        const fem::FieldSolution full = fem::solve_field(mesh, map, opts.solver);
        rec.w_full += fem::total_coenergy(full, map, g.w) / maps.size();
        if (opts.self_energy_correction) {
            const fem::MaterialMap self_map = map.with_mre_as_air();
            const fem::FieldSolution self = fem::solve_field(mesh, self_map, opts.solver);
            rec.w_self += fem::total_coenergy(self, self_map, g.w) / maps.size();
        }
    }
    return rec;
}

}  // namespace

CoenergyCurve sweep_coenergy(const geom::GripperGeometry& g, const fem::MaterialMap& materials,
                             const msh::MeshParams& mesh_params, const std::vector<double>& theta_grid,
                             const SweepOptions& opts) {
    g.validate();
    mesh_params.validate();
    if (theta_grid.empty()) throw DataError("sweep: empty theta grid");
    const double theta_max = geom::max_wrap_angle(g);
    for (std::size_t i = 0; i < theta_grid.size(); ++i) {
        if (theta_grid[i] < 0.0 || theta_grid[i] > theta_max * (1.0 + 1e-12))
            throw DataError("sweep: theta grid leaves [0, max_wrap_angle]");
        if (i > 0 && !(theta_grid[i] > theta_grid[i - 1]))
            throw DataError("sweep: theta grid must be strictly increasing");
    }

    const auto t_start = std::chrono::steady_clock::now();
    const std::size_t n = theta_grid.size();
    std::vector<SampleRecord> records(n);
    std::vector<char> from_cache(n, 0);
    std::vector<std::string> errors(n);
    std::mutex cache_mutex;

    auto run_one = [&](std::size_t i) {
        const double theta = theta_grid[i];
        try {
            const std::string key = sample_key(g, materials, mesh_params, opts, theta);
            SampleRecord rec;
            bool hit = false;
            if (opts.cache) {
                std::lock_guard<std::mutex> lock(cache_mutex);
                hit = opts.cache->lookup(key, rec);
            }
            if (!hit) {
                rec = compute_sample(g, materials, mesh_params, opts, theta);
                if (opts.cache) {
                    std::lock_guard<std::mutex> lock(cache_mutex);
                    opts.cache->store(key, rec);
                }
            }
            records[i] = rec;
            from_cache[i] = hit ? 1 : 0;
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    };

    const int workers = resolve_workers(opts.workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int wk = 0; wk < workers; ++wk)
            pool.emplace_back([&]() {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= n) return;
                    run_one(i);
                }
            });
        for (auto& th : pool) th.join();
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (!errors[i].empty())
            throw SolveError("sweep failed at theta = " +
                             std::to_string(theta_grid[i] * constants::rad2deg) + " deg: " + errors[i]);
    }

    CoenergyCurve curve;
    curve.theta = theta_grid;
    curve.w_co.resize(n);
    // Anchor the curve at the first sample's isolated-magnet energy; adding
    // the same-mesh difference keeps each value a total coenergy while the
    // mesh-dependent part of the self-energy cancels sample by sample.
    const double w_self_ref = records[0].w_self;
    for (std::size_t i = 0; i < n; ++i) {
        if (opts.self_energy_correction)
            curve.w_co[i] = w_self_ref + (records[i].w_full - records[i].w_self);
        else
            curve.w_co[i] = records[i].w_full;
        curve.meta.total_elements += records[i].n_elements;
        curve.meta.cache_hits += from_cache[i];
    }
    curve.meta.n_solves = static_cast<int>(n) - curve.meta.cache_hits;
    curve.meta.config_key = sample_key(g, materials, mesh_params, opts, theta_grid.front()) + "..." +
                            fmt_double(theta_grid.back()) + "x" + std::to_string(n);
    curve.meta.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return curve;
}

spline::SmoothingSpline fit_spline(const CoenergyCurve& curve, std::optional<double> lambda) {
    if (curve.theta.size() < 8)
        throw DataError("fit_spline: need at least 8 coenergy samples, got " +
                        std::to_string(curve.theta.size()));
    if (lambda) return spline::SmoothingSpline::fit(curve.theta, curve.w_co, *lambda);
    return spline::SmoothingSpline::fit_gcv(curve.theta, curve.w_co);
}

TorqueCurve torque_curve(const spline::SmoothingSpline& s, const std::vector<double>& eval_grid) {
    TorqueCurve t;
    t.theta = eval_grid;
    t.t_co.reserve(eval_grid.size());
    for (const double x : eval_grid) t.t_co.push_back(s.derivative(x));
    return t;
}

TorqueCurve torque_fd_oracle(const CoenergyCurve& curve) {
    const std::size_t n = curve.theta.size();
    if (n < 3) throw DataError("torque_fd_oracle: need at least 3 samples");
    TorqueCurve t;
    t.theta = curve.theta;
    t.t_co.resize(n);
    const auto& x = curve.theta;
    const auto& y = curve.w_co;
    t.t_co[0] = (y[1] - y[0]) / (x[1] - x[0]);
    t.t_co[n - 1] = (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
    for (std::size_t i = 1; i + 1 < n; ++i) t.t_co[i] = (y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1]);
    return t;
}

}  // namespace magspring::energy
