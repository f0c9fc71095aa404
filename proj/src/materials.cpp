#include "magspring/materials.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "magspring/constants.hpp"
#include "magspring/errors.hpp"
#include "materials_data.hpp"

namespace magspring::mat {

using constants::mu0;
using nlohmann::json;

void MaterialModel::validate() const {
    if (!(mu_r >= 1.0)) throw ConfigError("material: mu_r must be >= 1");
    if (kind == MaterialKind::air && mu_r != 1.0)
        throw ConfigError("material: air must have mu_r = 1 exactly");
    if (is_pm()) {
        if (!(b_r > 0.0)) throw ConfigError("material: PM remanence b_r must be positive");
        if (!(h_c > 0.0)) throw ConfigError("material: PM coercivity h_c must be positive");
        if (std::abs(magnetization_dir.norm() - 1.0) > 1e-12)
            throw ConfigError("material: PM magnetization_dir must be a unit vector");
    }
}

MaterialModel MaterialModel::make_air() { return {}; }

MaterialModel MaterialModel::make_permeable(double mu_r) {
    MaterialModel m;
    m.kind = MaterialKind::linear_permeable;
    m.mu_r = mu_r;
    m.validate();
    return m;
}

MaterialModel MaterialModel::make_pm(double b_r, double h_c, double mu_r, Vec2 dir) {
    MaterialModel m;
    m.kind = MaterialKind::linear_permanent_magnet;
    m.mu_r = mu_r;
    m.b_r = b_r;
    m.h_c = h_c;
    m.magnetization_dir = dir.normalized();
    m.validate();
    return m;
}

void MechanicalProperties::validate() const {
    if (!(e_mod > 0.0)) throw ConfigError("mechanical: e_mod must be positive");
    if (!(sigma_100 > 0.0)) throw ConfigError("mechanical: sigma_100 must be positive");
    if (sigma_300 && !(*sigma_300 > sigma_100))
        throw ConfigError("mechanical: sigma_300 must exceed sigma_100");
}

double coenergy_density(const MaterialModel& m, const Vec2& b) {
    if (!m.is_pm()) return b.norm2() / (2.0 * mu0 * m.mu_r);
    // PM recoil law: integral of B dH along h' = s*h gives the quadratic term
    // plus the remanence work b_r * (m_hat . h).
    const Vec2 h = (b - m.b_r * m.magnetization_dir) / (mu0 * m.mu_r);
    return 0.5 * mu0 * m.mu_r * h.norm2() + m.b_r * m.magnetization_dir.dot(h);
}

PmConsistency pm_consistency_check(const MaterialModel& m) {
    PmConsistency rep;
    rep.implied_mu_r = m.b_r / (mu0 * m.h_c);
    rep.relative_deviation = std::abs(rep.implied_mu_r - m.mu_r) / m.mu_r;
    rep.flagged = rep.relative_deviation > 0.10;
    return rep;
}

namespace {

MaterialEntry parse_entry(const std::string& name, const json& j, const std::string& origin) {
    auto fail = [&](const std::string& what) {
        throw ConfigError("materials " + origin + ": entry '" + name + "': " + what);
    };
    if (!j.is_object()) fail("must be an object");

    MaterialEntry entry;
    const std::string kind = j.value("kind", "");
    if (kind == "air") {
        entry.model = MaterialModel::make_air();
    } else if (kind == "linear_permeable") {
        if (!j.contains("mu_r")) fail("missing mu_r");
        entry.model = MaterialModel::make_permeable(j.at("mu_r").get<double>());
    } else if (kind == "linear_permanent_magnet") {
        if (!j.contains("b_r_t") || !j.contains("h_c_a_per_m")) fail("missing b_r_t / h_c_a_per_m");
        Vec2 dir{1.0, 0.0};
        if (j.contains("magnetization_dir")) {
            const auto& d = j.at("magnetization_dir");
            if (!d.is_array() || d.size() != 2) fail("magnetization_dir must be [x, y]");
            dir = {d[0].get<double>(), d[1].get<double>()};
        }
        entry.model = MaterialModel::make_pm(j.at("b_r_t").get<double>(), j.at("h_c_a_per_m").get<double>(),
                                             j.value("mu_r", 1.05), dir);
    } else {
        fail("unknown kind '" + kind + "'");
    }

    if (j.contains("mechanical")) {
        const auto& mech = j.at("mechanical");
        MechanicalProperties props;
        props.e_mod = mech.at("e_mod_mpa").get<double>() * 1e6;
        props.sigma_100 = mech.at("sigma_100_mpa").get<double>() * 1e6;
        if (mech.contains("sigma_300_mpa")) props.sigma_300 = mech.at("sigma_300_mpa").get<double>() * 1e6;
        props.validate();
        entry.mechanical = props;
    }
    if (j.contains("measured_max_mass_g"))
        entry.measured_max_mass_g = j.at("measured_max_mass_g").get<double>();
    return entry;
}

}  // namespace

MaterialLibrary MaterialLibrary::builtin() {
    return from_json_text(detail::builtin_materials_json, "<builtin>");
}

MaterialLibrary MaterialLibrary::from_json_text(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("materials " + origin + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("materials " + origin + ": top level must be an object");

    MaterialLibrary lib;
    for (const auto& [name, entry] : j.items()) lib.entries_[name] = parse_entry(name, entry, origin);
    return lib;
}

MaterialLibrary MaterialLibrary::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("materials: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str(), path);
}

const MaterialEntry& MaterialLibrary::at(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw ConfigError("materials: unknown material '" + name + "'");
    return it->second;
}

void MaterialLibrary::insert(const std::string& name, MaterialEntry entry) {
    entries_[name] = std::move(entry);
}

}  // namespace magspring::mat
