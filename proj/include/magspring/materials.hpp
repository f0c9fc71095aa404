#pragma once

#include <map>
#include <optional>
#include <string>

#include "magspring/vec2.hpp"

namespace magspring::mat {

enum class MaterialKind { air, linear_permeable, linear_permanent_magnet };

/// Linear magnetic constitutive model. Air and permeable materials follow
/// b = mu0*mu_r*h; the permanent magnet follows the recoil law
/// b = mu0*mu_r*h + b_r*m_hat.
struct MaterialModel {
    MaterialKind kind = MaterialKind::air;
    double mu_r = 1.0;
    double b_r = 0.0;                 // remanence [T], PM only
    double h_c = 0.0;                 // coercivity [A/m], PM only
    Vec2 magnetization_dir{1.0, 0.0};  // unit vector, PM only

    void validate() const;
    bool is_pm() const { return kind == MaterialKind::linear_permanent_magnet; }

    static MaterialModel make_air();
    static MaterialModel make_permeable(double mu_r);
    static MaterialModel make_pm(double b_r, double h_c, double mu_r, Vec2 dir = {1.0, 0.0});
};

/// Tensile data consumed by the grip model. sigma_300 is absent for
/// materials that break before 300% strain.
struct MechanicalProperties {
    double e_mod = 0.0;     // Young's modulus [Pa]
    double sigma_100 = 0.0;  // stress at 100% strain [Pa]
    std::optional<double> sigma_300;  // stress at 300% strain [Pa]

    void validate() const;
};

/// Magnetic coenergy density integral(B dH) from 0 to the operating point,
/// evaluated for the linear constitutive laws above. [J/m^3]
double coenergy_density(const MaterialModel& m, const Vec2& b);

struct PmConsistency {
    double implied_mu_r = 0.0;       // b_r / (mu0 * h_c)
    double relative_deviation = 0.0;  // |implied - mu_r| / mu_r
    bool flagged = false;             // deviation beyond 10%
};

/// Advisory datasheet check: for a consistent linear PM model the recoil
/// permeability should be close to b_r/(mu0*h_c).
PmConsistency pm_consistency_check(const MaterialModel& m);

struct MaterialEntry {
    MaterialModel model;
    std::optional<MechanicalProperties> mechanical;
    std::optional<double> measured_max_mass_g;  // reference payload data, when known
};

/// Named material collection, loadable from a JSON file. A built-in library
/// with air, the three MRE blends and the NdFeB magnet ships with the tool.
class MaterialLibrary {
  public:
    static MaterialLibrary builtin();
    static MaterialLibrary from_json_text(const std::string& text, const std::string& origin = "<string>");
    static MaterialLibrary from_file(const std::string& path);

    bool contains(const std::string& name) const { return entries_.count(name) > 0; }
    const MaterialEntry& at(const std::string& name) const;
    const std::map<std::string, MaterialEntry>& entries() const { return entries_; }

    void insert(const std::string& name, MaterialEntry entry);

  private:
    std::map<std::string, MaterialEntry> entries_;
};

}  // namespace magspring::mat
