#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "magspring/energy_torque.hpp"
#include "magspring/geometry.hpp"
#include "magspring/magnetostatics.hpp"
#include "magspring/materials.hpp"
#include "magspring/mesh.hpp"

namespace magspring::cli {

/// Fully parsed run configuration. Config files use millimeters and degrees
/// (the bench conventions); everything here is SI and radians.
struct RunConfig {
    geom::GripperGeometry geometry;
    std::optional<Vec2> anchor;  // stripe anchor [m]; absent = default tangent anchor

    std::string materials_file;  // empty = built-in library
    std::string pm_name = "NdFeB";
    std::string mre_name = "MRE_RTV";
    std::optional<double> mre_mu_r;
    std::optional<double> pm_b_r;
    std::optional<double> pm_mu_r;
    std::optional<double> pm_h_c;

    msh::MeshParams mesh;

    double sweep_start = 0.0;  // [rad]
    double sweep_step = 0.0;   // [rad]
    std::optional<double> sweep_stop;  // [rad]; absent = 0.98 * max wrap angle
    bool average_magnetization = true;

    std::optional<double> spline_lambda;  // absent = generalized cross-validation

    std::optional<double> payload_mu;  // absent = calibrate on calibrate_material
    std::string calibrate_material = "MRE_RTV";
    double grip_deflection = 0.002;  // [m]
    double finger_force = 0.7;       // magnetic tip force F(0) [N]
    std::optional<double> lever_arm;  // [m]; absent = contact radius
    int payload_n_fingers = 0;        // 0 = geometry.n_fingers

    fem::SolverOptions solver;
    int workers = 0;
    std::string output_dir = "out";

    nlohmann::json effective;  // merged config tree as loaded (echoed to run_meta)
};

nlohmann::json default_config_json();

/// Parses a config JSON tree. When file_mode is set the "geometry" section is
/// required; defaults fill everything else. Unknown keys are rejected.
RunConfig parse_config(const nlohmann::json& j, const std::string& origin, bool file_mode);

RunConfig load_config_file(const std::string& path, const std::vector<std::string>& overrides = {});
RunConfig load_default_config(const std::vector<std::string>& overrides = {});

/// Applies one "a.b.c=value" override onto the config tree.
void apply_override(nlohmann::json& tree, const std::string& assignment);

struct ResolvedMaterials {
    mat::MaterialLibrary library;
    fem::MaterialMap map;
    std::string warning;  // non-empty when the PM datasheet check flags
};
ResolvedMaterials resolve_materials(const RunConfig& cfg);

/// File-backed sample cache keyed by content hash; writes are
/// write-temp-then-rename so concurrent runs never corrupt entries.
class FileSampleCache final : public energy::SampleCache {
  public:
    explicit FileSampleCache(std::filesystem::path dir);
    bool lookup(const std::string& key, energy::SampleRecord& record) override;
    void store(const std::string& key, const energy::SampleRecord& record) override;

  private:
    std::filesystem::path path_for(const std::string& key) const;
    std::filesystem::path dir_;
};

void run_geometry(const RunConfig& cfg, std::ostream& out);

struct SweepOutputs {
    std::filesystem::path coenergy_csv;
    std::filesystem::path torque_csv;
    std::filesystem::path run_meta;
    int n_solves = 0;
    int cache_hits = 0;
};
SweepOutputs run_sweep(const RunConfig& cfg, std::ostream& log);

void run_capacity(const RunConfig& cfg, std::ostream& log);

void run_field_dump(const RunConfig& cfg, double theta_deg, bool dump_mesh, std::ostream& log);

/// Sweep grid in radians: start, start+step, ... , stop (stop always included).
std::vector<double> build_theta_grid(const RunConfig& cfg);

}  // namespace magspring::cli
