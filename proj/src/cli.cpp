#include "magspring/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "magspring/constants.hpp"
#include "magspring/errors.hpp"
#include "magspring/grip_model.hpp"

namespace magspring::cli {

using constants::deg2rad;
using constants::g0;
using constants::rad2deg;
using nlohmann::json;

namespace {

constexpr double kSweepStopFraction = 0.98;  // default sweep ends at 0.98 * theta_max

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::uint64_t fnv1a64(const std::string& s, std::uint64_t h = 1469598103934665603ULL) {
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string content_hash(const std::string& s) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%016llx%016llx",
                  static_cast<unsigned long long>(fnv1a64(s)),
                  static_cast<unsigned long long>(fnv1a64(s, 14695981039346656037ULL)));
    return buf;
}

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
    throw ConfigError("config " + origin + ": " + what);
}

double get_number(const json& j, const std::string& origin, const std::string& path) {
    if (!j.is_number()) fail(origin, path + " must be a number");
    return j.get<double>();
}

void check_keys(const json& j, const std::string& origin, const std::string& section,
                const std::set<std::string>& allowed) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) fail(origin, "unknown key '" + section + key + "'");
    }
}

// "auto" or absent -> nullopt; number -> value
std::optional<double> get_auto_or_number(const json& j, const std::string& origin,
                                         const std::string& path) {
    if (j.is_string()) {
        if (j.get<std::string>() == "auto") return std::nullopt;
        fail(origin, path + " must be a number or \"auto\"");
    }
    if (j.is_null()) return std::nullopt;
    return get_number(j, origin, path);
}

}  // namespace

json default_config_json() {
    return json{
        {"geometry",
         {{"r_frame_mm", 18.0},
          {"d_pm_mm", 20.0},
          {"w_mm", 15.0},
          {"finger_length_mm", 60.0},
          {"finger_thickness_mm", 3.0},
          {"n_fingers", 3}}},
        {"materials", {{"library_file", ""}, {"pm", "NdFeB"}, {"mre", "MRE_RTV"}}},
        {"mesh", {{"h_max_mm", 1.0}, {"h_air_mm", 0.0}, {"air_radius_factor", 5.0}}},
        {"sweep",
         {{"start_deg", 0.0}, {"stop_deg", "auto"}, {"step_deg", 5.0}, {"average_magnetization", true}}},
        {"spline", {{"lambda", "auto"}}},
        {"payload",
         {{"mu", "auto"},
          {"calibrate_material", "MRE_RTV"},
          {"grip_deflection_mm", 2.0},
          {"finger_force_n", 0.7},
          {"lever_arm_mm", "auto"},
          {"n_fingers", 0}}},
        {"solver",
         {{"method", "direct"}, {"tolerance", 1e-10}, {"max_iterations", 20000}, {"deterministic", true}}},
        {"workers", 0},
        {"output_dir", "out"},
    };
}

RunConfig parse_config(const json& j, const std::string& origin, bool file_mode) {
    if (!j.is_object()) fail(origin, "top level must be an object");
    check_keys(j, origin, "",
               {"geometry", "materials", "mesh", "sweep", "spline", "payload", "solver", "workers",
                "output_dir"});
    if (file_mode && !j.contains("geometry")) fail(origin, "missing required section 'geometry'");

    const json defaults = default_config_json();
    json merged = defaults;
    merged.merge_patch(j);  // file values override defaults

    RunConfig cfg;
    cfg.effective = merged;

    {
        const json& g = merged.at("geometry");
        check_keys(g, origin, "geometry.",
                   {"r_frame_mm", "d_pm_mm", "w_mm", "finger_length_mm", "finger_thickness_mm",
                    "n_fingers", "anchor_mm"});
        cfg.geometry.r_frame = get_number(g.at("r_frame_mm"), origin, "geometry.r_frame_mm") * 1e-3;
        cfg.geometry.d_pm = get_number(g.at("d_pm_mm"), origin, "geometry.d_pm_mm") * 1e-3;
        cfg.geometry.w = get_number(g.at("w_mm"), origin, "geometry.w_mm") * 1e-3;
        cfg.geometry.finger_length =
            get_number(g.at("finger_length_mm"), origin, "geometry.finger_length_mm") * 1e-3;
        cfg.geometry.finger_thickness =
            get_number(g.at("finger_thickness_mm"), origin, "geometry.finger_thickness_mm") * 1e-3;
        if (!g.at("n_fingers").is_number_integer()) fail(origin, "geometry.n_fingers must be an integer");
        cfg.geometry.n_fingers = g.at("n_fingers").get<int>();
        if (g.contains("anchor_mm")) {
            const json& a = g.at("anchor_mm");
            if (!a.is_array() || a.size() != 2) fail(origin, "geometry.anchor_mm must be [x, y]");
            cfg.anchor = Vec2{get_number(a[0], origin, "geometry.anchor_mm[0]") * 1e-3,
                              get_number(a[1], origin, "geometry.anchor_mm[1]") * 1e-3};
        }
        try {
            cfg.geometry.validate();
        } catch (const GeometryError& e) {
            fail(origin, e.what());
        }
    }
    {
        const json& m = merged.at("materials");
        check_keys(m, origin, "materials.",
                   {"library_file", "pm", "mre", "mre_mu_r", "pm_b_r_t", "pm_mu_r", "pm_h_c_a_per_m"});
        cfg.materials_file = m.at("library_file").get<std::string>();
        cfg.pm_name = m.at("pm").get<std::string>();
        cfg.mre_name = m.at("mre").get<std::string>();
        if (m.contains("mre_mu_r")) cfg.mre_mu_r = get_number(m.at("mre_mu_r"), origin, "materials.mre_mu_r");
        if (m.contains("pm_b_r_t")) cfg.pm_b_r = get_number(m.at("pm_b_r_t"), origin, "materials.pm_b_r_t");
        if (m.contains("pm_mu_r")) cfg.pm_mu_r = get_number(m.at("pm_mu_r"), origin, "materials.pm_mu_r");
        if (m.contains("pm_h_c_a_per_m"))
            cfg.pm_h_c = get_number(m.at("pm_h_c_a_per_m"), origin, "materials.pm_h_c_a_per_m");
    }
    {
        const json& m = merged.at("mesh");
        check_keys(m, origin, "mesh.", {"h_max_mm", "h_air_mm", "air_radius_factor"});
        cfg.mesh.h_max = get_number(m.at("h_max_mm"), origin, "mesh.h_max_mm") * 1e-3;
        cfg.mesh.h_air = get_number(m.at("h_air_mm"), origin, "mesh.h_air_mm") * 1e-3;
        cfg.mesh.air_radius_factor = get_number(m.at("air_radius_factor"), origin, "mesh.air_radius_factor");
        try {
            cfg.mesh.validate();
        } catch (const MeshError& e) {
            fail(origin, e.what());
        }
    }
    {
        const json& s = merged.at("sweep");
        check_keys(s, origin, "sweep.", {"start_deg", "stop_deg", "step_deg", "average_magnetization"});
        cfg.sweep_start = get_number(s.at("start_deg"), origin, "sweep.start_deg") * deg2rad;
        cfg.sweep_step = get_number(s.at("step_deg"), origin, "sweep.step_deg") * deg2rad;
        const auto stop = get_auto_or_number(s.at("stop_deg"), origin, "sweep.stop_deg");
        if (stop) cfg.sweep_stop = *stop * deg2rad;
        if (!(cfg.sweep_step > 0.0)) fail(origin, "sweep.step_deg must be positive");
        if (cfg.sweep_start < 0.0) fail(origin, "sweep.start_deg must be >= 0");
        if (!s.at("average_magnetization").is_boolean())
            fail(origin, "sweep.average_magnetization must be a boolean");
        cfg.average_magnetization = s.at("average_magnetization").get<bool>();
    }
    {
        const json& s = merged.at("spline");
        check_keys(s, origin, "spline.", {"lambda"});
        cfg.spline_lambda = get_auto_or_number(s.at("lambda"), origin, "spline.lambda");
        if (cfg.spline_lambda && *cfg.spline_lambda < 0.0) fail(origin, "spline.lambda must be >= 0");
    }
    {
        const json& p = merged.at("payload");
        check_keys(p, origin, "payload.",
                   {"mu", "calibrate_material", "grip_deflection_mm", "finger_force_n", "lever_arm_mm",
                    "n_fingers"});
        cfg.payload_mu = get_auto_or_number(p.at("mu"), origin, "payload.mu");
        cfg.calibrate_material = p.at("calibrate_material").get<std::string>();
        cfg.grip_deflection =
            get_number(p.at("grip_deflection_mm"), origin, "payload.grip_deflection_mm") * 1e-3;
        cfg.finger_force = get_number(p.at("finger_force_n"), origin, "payload.finger_force_n");
        const auto lever = get_auto_or_number(p.at("lever_arm_mm"), origin, "payload.lever_arm_mm");
        if (lever) cfg.lever_arm = *lever * 1e-3;
        if (!p.at("n_fingers").is_number_integer()) fail(origin, "payload.n_fingers must be an integer");
        cfg.payload_n_fingers = p.at("n_fingers").get<int>();
    }
    {
        const json& s = merged.at("solver");
        check_keys(s, origin, "solver.", {"method", "tolerance", "max_iterations", "deterministic"});
        const std::string method = s.at("method").get<std::string>();
        if (method == "direct")
            cfg.solver.method = fem::SolverOptions::Method::direct;
        else if (method == "cg")
            cfg.solver.method = fem::SolverOptions::Method::cg;
        else
            fail(origin, "solver.method must be \"direct\" or \"cg\"");
        cfg.solver.tolerance = get_number(s.at("tolerance"), origin, "solver.tolerance");
        cfg.solver.max_iterations = s.at("max_iterations").get<int>();
        cfg.solver.deterministic = s.at("deterministic").get<bool>();
    }
    if (!merged.at("workers").is_number_integer()) fail(origin, "workers must be an integer");
    cfg.workers = merged.at("workers").get<int>();
    cfg.output_dir = merged.at("output_dir").get<std::string>();
    return cfg;
}

void apply_override(json& tree, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override '" + assignment + "' must look like section.key=value");
    const std::string path = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);

    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::parse_error&) {
        parsed = value;  // bare strings are allowed unquoted
    }

    json* node = &tree;
    std::size_t begin = 0;
    while (true) {
        const auto dot = path.find('.', begin);
        const std::string key = path.substr(begin, dot == std::string::npos ? dot : dot - begin);
        if (key.empty()) throw ConfigError("override '" + assignment + "' has an empty key segment");
        if (dot == std::string::npos) {
            (*node)[key] = parsed;
            return;
        }
        node = &((*node)[key]);
        begin = dot + 1;
    }
}

RunConfig load_config_file(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    for (const auto& o : overrides) apply_override(j, o);
    return parse_config(j, path, true);
}

RunConfig load_default_config(const std::vector<std::string>& overrides) {
    json j = default_config_json();
    for (const auto& o : overrides) apply_override(j, o);
    return parse_config(j, "<defaults>", false);
}

ResolvedMaterials resolve_materials(const RunConfig& cfg) {
    ResolvedMaterials r;
    r.library = cfg.materials_file.empty() ? mat::MaterialLibrary::builtin()
                                           : mat::MaterialLibrary::from_file(cfg.materials_file);
    if (!r.library.contains("air")) throw ConfigError("materials: library must define 'air'");
    const mat::MaterialEntry& pm_entry = r.library.at(cfg.pm_name);
    const mat::MaterialEntry& mre_entry = r.library.at(cfg.mre_name);

    mat::MaterialModel air = r.library.at("air").model;
    mat::MaterialModel mre = mre_entry.model;
    mat::MaterialModel pm = pm_entry.model;
    if (!pm.is_pm()) throw ConfigError("materials: '" + cfg.pm_name + "' is not a permanent magnet");
    if (mre.is_pm()) throw ConfigError("materials: '" + cfg.mre_name + "' must be a permeable material");

    if (cfg.mre_mu_r) mre.mu_r = *cfg.mre_mu_r;
    if (cfg.pm_b_r) pm.b_r = *cfg.pm_b_r;
    if (cfg.pm_mu_r) pm.mu_r = *cfg.pm_mu_r;
    if (cfg.pm_h_c) pm.h_c = *cfg.pm_h_c;
    air.validate();
    mre.validate();
    pm.validate();

    const mat::PmConsistency pc = mat::pm_consistency_check(pm);
    if (pc.flagged) {
        std::ostringstream ss;
        ss << "warning: PM '" << cfg.pm_name << "' recoil mu_r " << pm.mu_r
           << " deviates from b_r/(mu0*h_c) = " << pc.implied_mu_r << " by "
           << static_cast<int>(pc.relative_deviation * 100.0) << "%";
        r.warning = ss.str();
    }
    r.map = fem::MaterialMap::make(air, mre, pm);
    return r;
}

FileSampleCache::FileSampleCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path FileSampleCache::path_for(const std::string& key) const {
    return dir_ / (content_hash(key) + ".json");
}

bool FileSampleCache::lookup(const std::string& key, energy::SampleRecord& record) {
    std::ifstream in(path_for(key));
    if (!in) return false;
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error&) {
        return false;  // damaged entry; treated as a miss
    }
    if (j.value("key", "") != key) return false;
    record.w_full = j.at("w_full").get<double>();
    record.w_self = j.at("w_self").get<double>();
    record.n_elements = j.at("n_elements").get<int>();
    return true;
}

void FileSampleCache::store(const std::string& key, const energy::SampleRecord& record) {
    const json j{{"key", key},
                 {"w_full", record.w_full},
                 {"w_self", record.w_self},
                 {"n_elements", record.n_elements}};
    const std::filesystem::path final_path = path_for(key);
    const std::filesystem::path tmp = final_path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        out << j.dump(1) << "\n";
    }
    std::filesystem::rename(tmp, final_path);  // atomic publish
}

void run_geometry(const RunConfig& cfg, std::ostream& out) {
    const geom::GripperGeometry& g = cfg.geometry;
    out << "r_open: " << fmt(geom::open_radius(g) * 1e3) << " mm\n";
    if (g.n_fingers == 3)
        out << "r_close: " << fmt(geom::close_radius(g) * 1e3) << " mm\n";
    else
        out << "r_close: unsupported (n_fingers=" << g.n_fingers
            << "; the closed-state formula requires 3 fingers)\n";
    const double tmax = geom::max_wrap_angle(g);
    out << "theta_max: " << fmt(tmax * rad2deg) << " deg (" << fmt(tmax) << " rad)\n";
}

std::vector<double> build_theta_grid(const RunConfig& cfg) {
    const double theta_max = geom::max_wrap_angle(cfg.geometry);
    const double stop = cfg.sweep_stop ? *cfg.sweep_stop : kSweepStopFraction * theta_max;
    if (!(stop > cfg.sweep_start)) throw ConfigError("sweep: stop angle must exceed start angle");
    if (stop > theta_max * (1.0 + 1e-12))
        throw ConfigError("sweep: stop angle " + fmt(stop * rad2deg) + " deg exceeds theta_max " +
                          fmt(theta_max * rad2deg) + " deg");
    std::vector<double> grid;
    for (double t = cfg.sweep_start; t < stop - 1e-12; t += cfg.sweep_step) grid.push_back(t);
    grid.push_back(stop);
    return grid;
}

SweepOutputs run_sweep(const RunConfig& cfg, std::ostream& log) {
    const auto t0 = std::chrono::steady_clock::now();
    const ResolvedMaterials mats = resolve_materials(cfg);
    if (!mats.warning.empty()) log << mats.warning << "\n";

    const std::vector<double> grid = build_theta_grid(cfg);
    if (grid.size() < 8)
        throw ConfigError("sweep: grid has only " + std::to_string(grid.size()) +
                          " samples; the spline fit needs at least 8 (reduce step_deg)");

    const std::filesystem::path out_dir(cfg.output_dir);
    std::filesystem::create_directories(out_dir);
    FileSampleCache cache(out_dir / ".cache");

    energy::SweepOptions opts;
    opts.solver = cfg.solver;
    opts.workers = cfg.workers;
    opts.average_magnetization = cfg.average_magnetization;
    opts.cache = &cache;
    if (cfg.anchor) {
        opts.anchor = *cfg.anchor;
        opts.use_default_anchor = false;
    }

    const energy::CoenergyCurve curve = energy::sweep_coenergy(cfg.geometry, mats.map, cfg.mesh, grid, opts);
    const spline::SmoothingSpline spl = energy::fit_spline(curve, cfg.spline_lambda);
    const energy::TorqueCurve torque = energy::torque_curve(spl, grid);

    SweepOutputs outs;
    outs.coenergy_csv = out_dir / "coenergy.csv";
    outs.torque_csv = out_dir / "torque.csv";
    outs.run_meta = out_dir / "run_meta.json";
    outs.n_solves = curve.meta.n_solves;
    outs.cache_hits = curve.meta.cache_hits;

    {
        std::ofstream out(outs.coenergy_csv);
        out << "theta_deg,w_co_J\n";
        for (std::size_t i = 0; i < curve.theta.size(); ++i)
            out << fmt(curve.theta[i] * rad2deg) << "," << fmt(curve.w_co[i]) << "\n";
    }
    {
        std::ofstream out(outs.torque_csv);
        out << "theta_deg,t_mNm\n";
        for (std::size_t i = 0; i < torque.theta.size(); ++i)
            out << fmt(torque.theta[i] * rad2deg) << "," << fmt(torque.t_co[i] * 1e3) << "\n";
    }
    {
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const json meta{{"config", cfg.effective},
                        {"config_hash", content_hash(cfg.effective.dump())},
                        {"n_theta", curve.theta.size()},
                        {"solves", curve.meta.n_solves},
                        {"cache_hits", curve.meta.cache_hits},
                        {"total_elements", curve.meta.total_elements},
                        {"spline_lambda", spl.lambda()},
                        {"timings", {{"total_seconds", seconds}, {"sweep_seconds", curve.meta.solve_seconds}}},
                        {"outputs", {"coenergy.csv", "torque.csv"}}};
        std::ofstream out(outs.run_meta);
        out << meta.dump(2) << "\n";
    }
    log << "sweep: " << curve.theta.size() << " samples, " << curve.meta.n_solves << " solves, "
        << curve.meta.cache_hits << " cache hits -> " << outs.coenergy_csv.string() << ", "
        << outs.torque_csv.string() << "\n";
    return outs;
}

void run_capacity(const RunConfig& cfg, std::ostream& log) {
    const ResolvedMaterials mats = resolve_materials(cfg);
    const geom::GripperGeometry& g = cfg.geometry;
    const int n_fingers = cfg.payload_n_fingers > 0 ? cfg.payload_n_fingers : g.n_fingers;

    // all library materials with tensile data, stiffest first
    std::vector<std::pair<std::string, const mat::MaterialEntry*>> rows;
    for (const auto& [name, entry] : mats.library.entries())
        if (entry.mechanical) rows.emplace_back(name, &entry);
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second->mechanical->e_mod != b.second->mechanical->e_mod)
            return a.second->mechanical->e_mod > b.second->mechanical->e_mod;
        return a.first < b.first;
    });
    if (rows.empty()) throw ConfigError("capacity: no materials with mechanical data in the library");

    double mu;
    if (cfg.payload_mu) {
        mu = *cfg.payload_mu;
    } else {
        const mat::MaterialEntry& ref = mats.library.at(cfg.calibrate_material);
        if (!ref.mechanical || !ref.measured_max_mass_g)
            throw ConfigError("capacity: calibration material '" + cfg.calibrate_material +
                              "' lacks mechanical data or a measured mass");
        mu = grip::calibrate_friction(n_fingers, cfg.finger_force, *ref.mechanical, g,
                                      cfg.grip_deflection, *ref.measured_max_mass_g * 1e-3);
    }

    const std::filesystem::path out_dir(cfg.output_dir);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path csv_path = out_dir / "capacity.csv";
    std::ofstream out(csv_path);
    out << "material,E_mod_MPa,predicted_mass_g,paper_mass_g\n";
    for (const auto& [name, entry] : rows) {
        double predicted_g = 0.0;
        if (mu > 0.0) {
            grip::PayloadModel pm{mu, n_fingers, cfg.finger_force};
            predicted_g = grip::max_payload(pm, *entry->mechanical, g, cfg.grip_deflection) * 1e3;
        }
        out << name << "," << fmt(entry->mechanical->e_mod * 1e-6) << "," << fmt(predicted_g) << ",";
        if (entry->measured_max_mass_g) out << fmt(*entry->measured_max_mass_g);
        out << "\n";
    }
    log << "capacity: " << rows.size() << " materials, mu = " << fmt(mu) << " -> "
        << csv_path.string() << "\n";
}

void run_field_dump(const RunConfig& cfg, double theta_deg, bool dump_mesh, std::ostream& log) {
    const ResolvedMaterials mats = resolve_materials(cfg);
    if (!mats.warning.empty()) log << mats.warning << "\n";
    const double theta = theta_deg * deg2rad;
    const Vec2 anchor = cfg.anchor ? *cfg.anchor : geom::default_anchor(cfg.geometry);
    const geom::WrapPath path = geom::wrap_path(cfg.geometry, theta, anchor);
    const msh::Outline outline = msh::build_geometry_outline(cfg.geometry, path, cfg.mesh);
    auto mesh = std::make_shared<const msh::Mesh>(msh::triangulate(outline, cfg.mesh));
    const fem::FieldSolution sol = fem::solve_field(mesh, mats.map, cfg.solver);

    const std::filesystem::path out_dir(cfg.output_dir);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path field_path = out_dir / "field.csv";
    {
        std::ofstream out(field_path);
        fem::write_field_csv(sol, out);
    }
    log << "field-dump: theta = " << fmt(theta_deg) << " deg, " << mesh->triangles.size()
        << " elements -> " << field_path.string() << "\n";
    if (dump_mesh) {
        const std::filesystem::path mesh_path = out_dir / "mesh.txt";
        std::ofstream out(mesh_path);
        msh::write_mesh_text(*mesh, out);
        log << "field-dump: mesh -> " << mesh_path.string() << "\n";
    }
}

}  // namespace magspring::cli
