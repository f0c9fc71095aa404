// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria 3-5 and 8 share the default sweep through the CLI layer
// so the full pipeline (config -> sweep -> spline -> CSV) is what is judged.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "magspring/cli.hpp"
#include "magspring/constants.hpp"
#include "magspring/energy_torque.hpp"
#include "magspring/errors.hpp"
#include "magspring/grip_model.hpp"
#include "magspring/magnetostatics.hpp"

namespace fs = std::filesystem;
using namespace magspring;
using constants::deg2rad;
using constants::mu0;
using constants::pi;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& name, const std::string& detail) {
    std::printf("%s criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

struct Csv {
    std::vector<double> x, y;
};

Csv read_csv(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw Error("cannot open " + p.string());
    std::string line;
    std::getline(in, line);  // header
    Csv csv;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        csv.x.push_back(std::stod(line.substr(0, comma)));
        csv.y.push_back(std::stod(line.substr(comma + 1)));
    }
    return csv;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// --- criterion 1 ------------------------------------------------------------

void criterion_geometry() {
    const geom::GripperGeometry g{0.018, 0.020, 0.015, 0.060, 0.003, 3};
    const double r_open = geom::open_radius(g);
    const double r_close = geom::close_radius(g);
    const double expect_close = std::sqrt(3.0) / 6.0 * g.w;
    const bool pass = std::abs(r_open - 0.008) / 0.008 < 1e-6 &&
                      std::abs(r_close - expect_close) / expect_close < 1e-6 &&
                      std::abs(r_close - 4.3301e-3) / 4.3301e-3 < 1e-4;
    report(1, pass, "geometry exactness",
           "r_open = " + fmt(r_open * 1e3) + " mm, r_close = " + fmt(r_close * 1e3) + " mm");
}

// --- criterion 2 ------------------------------------------------------------

struct CylinderErrors {
    double mean_vs_free = 0.0;   // vs the classical mu0 M / 2
    double rms_vs_exact = 0.0;   // vs the Dirichlet-domain exact interior field
    double scatter = 0.0;
};

CylinderErrors solve_cylinder(double h) {
    const double a = 0.010, r_air = 0.120, b_r = 1.0;
    msh::MeshParams p;
    p.h_max = h;
    p.h_air = 16.0 * h;  // refine every length scale so the order is observable
    const auto outline = msh::build_disk_outline(a, r_air, p);
    auto mesh = std::make_shared<const msh::Mesh>(msh::triangulate(outline, p));
    const auto mats = fem::MaterialMap::make(mat::MaterialModel::make_air(), mat::MaterialModel::make_air(),
                                             mat::MaterialModel::make_pm(b_r, b_r / mu0, 1.0));
    const auto sol = fem::solve_field(mesh, mats);

    const double exact = 0.5 * b_r * (1.0 - a * a / (r_air * r_air));
    Vec2 mean{0.0, 0.0};
    double area = 0.0;
    for (std::size_t i = 0; i < mesh->triangles.size(); ++i) {
        if (mesh->triangles[i].tag != msh::Region::pm) continue;
        const double ar = msh::triangle_area(*mesh, static_cast<int>(i));
        mean += ar * sol.b_elem[i];
        area += ar;
    }
    mean = mean / area;
    double rms = 0.0;
    for (std::size_t i = 0; i < mesh->triangles.size(); ++i) {
        if (mesh->triangles[i].tag != msh::Region::pm) continue;
        const double ar = msh::triangle_area(*mesh, static_cast<int>(i));
        rms += ar * (sol.b_elem[i] - Vec2{exact, 0.0}).norm2();
    }
    CylinderErrors e;
    e.mean_vs_free = (mean - Vec2{0.5 * b_r, 0.0}).norm() / (0.5 * b_r);
    e.rms_vs_exact = std::sqrt(rms / area) / exact;
    e.scatter = e.rms_vs_exact;
    return e;
}

void criterion_field_oracle() {
    // base level h = d/40 plus three uniform refinements
    const double h0 = 0.020 / 40.0;
    std::vector<CylinderErrors> e;
    for (int level = 0; level < 4; ++level) e.push_back(solve_cylinder(h0 / (1 << level)));

    const bool level0 = e[0].mean_vs_free < 0.02 && e[0].scatter < 0.05;
    bool decreasing = true;
    for (int level = 1; level < 4; ++level)
        decreasing = decreasing && e[level].rms_vs_exact < e[level - 1].rms_vs_exact;
    const double order =
        std::log(e[0].rms_vs_exact / e[3].rms_vs_exact) / (3.0 * std::log(2.0));
    const bool pass = level0 && decreasing && order >= 1.0;
    report(2, pass, "field-solver analytic oracle",
           "mean err " + fmt(e[0].mean_vs_free * 100) + "%, scatter " + fmt(e[0].scatter * 100) +
               "%, B-error " + fmt(e[0].rms_vs_exact) + " -> " + fmt(e[1].rms_vs_exact) + " -> " +
               fmt(e[2].rms_vs_exact) + " -> " + fmt(e[3].rms_vs_exact) + ", observed order " +
               fmt(order));
}

// --- criteria 3-5 and 8 (default sweep through the CLI) ----------------------

struct SweepArtifacts {
    Csv coenergy;  // theta_deg, w_co_J
    Csv torque;    // theta_deg, t_mNm
    std::string coenergy_bytes, torque_bytes;
    cli::SweepOutputs cold, warm;
};

SweepArtifacts run_default_sweep(const fs::path& dir) {
    auto cfg = cli::load_default_config({"output_dir=" + dir.string()});
    SweepArtifacts art;
    std::ostringstream log;
    art.cold = cli::run_sweep(cfg, log);
    art.coenergy_bytes = slurp(art.cold.coenergy_csv);
    art.torque_bytes = slurp(art.cold.torque_csv);
    art.coenergy = read_csv(art.cold.coenergy_csv);
    art.torque = read_csv(art.cold.torque_csv);
    art.warm = cli::run_sweep(cfg, log);
    return art;
}

void criterion_monotonic_coenergy(const SweepArtifacts& art) {
    const auto& w = art.coenergy.y;
    const double rise = w.back() - w.front();
    bool pass = rise > 0.0;
    double worst_drop = 0.0;
    for (std::size_t i = 1; i < w.size(); ++i) {
        worst_drop = std::max(worst_drop, w[i - 1] - w[i]);
        if (w[i] < w[i - 1] - 0.005 * rise) pass = false;
    }
    report(3, pass, "coenergy monotonicity",
           "rise " + fmt(rise) + " J, worst step drop " + fmt(worst_drop) + " J (tol " +
               fmt(0.005 * rise) + " J)");
}

struct PlateauStats {
    double mean = 0.0;
    double cv = 0.0;
};

PlateauStats plateau_stats(const Csv& torque) {
    std::vector<double> window;
    for (std::size_t i = 0; i < torque.x.size(); ++i)
        if (torque.x[i] >= 20.0 && torque.x[i] <= 200.0) window.push_back(torque.y[i]);
    PlateauStats s;
    for (const double v : window) s.mean += v;
    s.mean /= window.size();
    double var = 0.0;
    for (const double v : window) var += (v - s.mean) * (v - s.mean);
    s.cv = std::sqrt(var / window.size()) / std::abs(s.mean);
    return s;
}

void criterion_plateau(const SweepArtifacts& art) {
    const PlateauStats s = plateau_stats(art.torque);
    const double terminal = art.torque.y.back();
    const bool pass = s.mean > 0.0 && s.cv < 0.25 && std::abs(terminal) < 0.25 * s.mean;
    report(4, pass, "torque plateau shape",
           "plateau " + fmt(s.mean) + " mNm, CV " + fmt(s.cv) + ", terminal " + fmt(terminal) +
               " mNm (" + fmt(100.0 * terminal / s.mean) + "% of plateau)");
}

void criterion_derivative_oracle(const SweepArtifacts& art) {
    // rebuild the raw coenergy samples in radians
    energy::CoenergyCurve curve;
    for (std::size_t i = 0; i < art.coenergy.x.size(); ++i) {
        curve.theta.push_back(art.coenergy.x[i] * deg2rad);
        curve.w_co.push_back(art.coenergy.y[i]);
    }
    const energy::TorqueCurve fd = energy::torque_fd_oracle(curve);
    const PlateauStats s = plateau_stats(art.torque);
    const double plateau_nm = s.mean * 1e-3;

    double rms = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 1; i + 1 < curve.theta.size(); ++i) {
        const double spline_t = art.torque.y[i] * 1e-3;
        const double diff = spline_t - fd.t_co[i];
        rms += diff * diff;
        ++count;
    }
    rms = std::sqrt(rms / count);

    double integral = 0.0;
    for (std::size_t i = 1; i < curve.theta.size(); ++i)
        integral += 0.5 * (art.torque.y[i] + art.torque.y[i - 1]) * 1e-3 *
                    (curve.theta[i] - curve.theta[i - 1]);
    const double rise = curve.w_co.back() - curve.w_co.front();

    const bool pass = rms < 0.10 * plateau_nm && std::abs(integral - rise) < 0.02 * std::abs(rise);
    report(5, pass, "derivative oracle agreement",
           "RMS(spline-FD) " + fmt(rms * 1e3) + " mNm = " + fmt(100.0 * rms / plateau_nm) +
               "% of plateau; integral " + fmt(integral) + " J vs rise " + fmt(rise) + " J");
}

void criterion_determinism(const SweepArtifacts& art) {
    const bool identical = slurp(art.warm.coenergy_csv) == art.coenergy_bytes &&
                           slurp(art.warm.torque_csv) == art.torque_bytes;
    const bool pass = identical && art.warm.n_solves == 0;
    report(8, pass, "determinism and cache",
           std::string("warm rerun solves = ") + std::to_string(art.warm.n_solves) +
               ", CSVs byte-identical = " + (identical ? "yes" : "no"));
}

// --- criterion 6 -------------------------------------------------------------

void criterion_payload_ordering() {
    const geom::GripperGeometry g{0.018, 0.020, 0.015, 0.060, 0.003, 3};
    const auto lib = mat::MaterialLibrary::builtin();
    const auto& rtv = *lib.at("MRE_RTV").mechanical;
    const auto& ms10 = *lib.at("MRE_MS10").mechanical;
    const auto& ds15 = *lib.at("MRE_DS15").mechanical;
    const double d = 0.002, force = 0.7;

    const double mu = grip::calibrate_friction(3, force, rtv, g, d, 0.0974);
    grip::PayloadModel pm{mu, 3, force};
    const double m_rtv = grip::max_payload(pm, rtv, g, d) * 1e3;
    const double m_ms10 = grip::max_payload(pm, ms10, g, d) * 1e3;
    const double m_ds15 = grip::max_payload(pm, ds15, g, d) * 1e3;

    const bool pass = std::abs(m_rtv - 97.4) < 1e-6 && m_rtv > m_ms10 && m_ms10 > m_ds15;
    report(6, pass, "payload ordering",
           "mu " + fmt(mu) + "; RTV " + fmt(m_rtv) + " g > MS10 " + fmt(m_ms10) + " g > DS15 " +
               fmt(m_ds15) + " g");
}

// --- criterion 7 -------------------------------------------------------------

void criterion_force_displacement() {
    const geom::GripperGeometry g{0.018, 0.020, 0.015, 0.060, 0.003, 3};
    const auto lib = mat::MaterialLibrary::builtin();
    const double plateau = 0.7 * g.contact_radius();  // torque consistent with F(0) = 0.7 N
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(i * 1e-3);

    std::vector<std::vector<double>> curves;
    for (const char* name : {"MRE_RTV", "MRE_MS10", "MRE_DS15"}) {
        grip::FingerForceModel f{plateau, g.contact_radius(),
                                 grip::beam_stiffness(*lib.at(name).mechanical, g)};
        std::vector<double> c;
        for (const auto& [x, force] : grip::force_displacement_curve(f, grid)) c.push_back(force);
        curves.push_back(std::move(c));
    }
    double max_rel = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double lo = 1e300, hi = -1e300;
        for (const auto& c : curves) {
            lo = std::min(lo, c[i]);
            hi = std::max(hi, c[i]);
        }
        max_rel = std::max(max_rel, (hi - lo) / lo);
    }
    const bool pass = max_rel < 0.05;
    report(7, pass, "force-displacement near-material-independence",
           "max relative spread over 0-10 mm = " + fmt(max_rel * 100) + "%");
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path work =
        fs::temp_directory_path() / ("magspring_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(work);

    try {
        criterion_geometry();
        criterion_field_oracle();
        const SweepArtifacts art = run_default_sweep(work / "sweep");
        criterion_monotonic_coenergy(art);
        criterion_plateau(art);
        criterion_derivative_oracle(art);
        criterion_payload_ordering();
        criterion_force_displacement();
        criterion_determinism(art);
    } catch (const std::exception& e) {
        std::printf("FAIL acceptance: unhandled error: %s\n", e.what());
        fs::remove_all(work);
        return 1;
    }
    fs::remove_all(work);

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("acceptance: %d/8 criteria passed in %.1f s\n", 8 - failures, seconds);
    return failures == 0 ? 0 : 1;
}
