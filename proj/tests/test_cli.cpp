#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "magspring/cli.hpp"
#include "magspring/constants.hpp"
#include "magspring/errors.hpp"

using namespace magspring;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (const char c : s)
        if (c == '\n') ++n;
    return n;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("magspring_test_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("default config resolves to the bench geometry") {
    const auto cfg = cli::load_default_config();
    CHECK(cfg.geometry.r_frame == doctest::Approx(0.018));
    CHECK(cfg.geometry.d_pm == doctest::Approx(0.020));
    CHECK(cfg.geometry.w == doctest::Approx(0.015));
    CHECK(cfg.geometry.finger_length == doctest::Approx(0.060));
    CHECK(cfg.geometry.finger_thickness == doctest::Approx(0.003));
    CHECK(cfg.geometry.n_fingers == 3);
    CHECK_FALSE(cfg.spline_lambda.has_value());
    CHECK_FALSE(cfg.payload_mu.has_value());
    CHECK(cfg.sweep_step == doctest::Approx(5.0 * constants::deg2rad));
}

TEST_CASE("geometry report prints the grasp radii") {
    const auto cfg = cli::load_default_config();
    std::ostringstream out;
    cli::run_geometry(cfg, out);
    CHECK(out.str().find("r_open: 8 mm") != std::string::npos);
    CHECK(out.str().find("r_close: 4.3301") != std::string::npos);
    CHECK(out.str().find("theta_max") != std::string::npos);

    SUBCASE("two-finger layout reports the closed state as unsupported") {
        const auto cfg2 = cli::load_default_config({"geometry.n_fingers=2"});
        std::ostringstream out2;
        cli::run_geometry(cfg2, out2);
        CHECK(out2.str().find("unsupported") != std::string::npos);
    }
}

TEST_CASE("config diagnostics") {
    SUBCASE("missing geometry section") {
        try {
            cli::parse_config(nlohmann::json::object(), "test.json", true);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("geometry") != std::string::npos);
        }
    }
    SUBCASE("unknown keys are rejected") {
        CHECK_THROWS_AS(cli::load_default_config({"geometry.bogus_mm=1"}), ConfigError);
        CHECK_THROWS_AS(cli::load_default_config({"turbo=true"}), ConfigError);
    }
    SUBCASE("zero sweep step") {
        CHECK_THROWS_AS(cli::load_default_config({"sweep.step_deg=0"}), ConfigError);
    }
    SUBCASE("invalid geometry flagged with the field name") {
        try {
            cli::load_default_config({"geometry.r_frame_mm=10", "geometry.d_pm_mm=20"});
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("r_frame") != std::string::npos);
        }
    }
    SUBCASE("overrides change parsed values") {
        const auto cfg = cli::load_default_config({"geometry.r_frame_mm=25", "mesh.h_max_mm=0.5"});
        CHECK(cfg.geometry.r_frame == doctest::Approx(0.025));
        CHECK(cfg.mesh.h_max == doctest::Approx(0.5e-3));
    }
}

TEST_CASE("material resolution honors overrides and flags bad datasheets") {
    auto cfg = cli::load_default_config({"materials.mre_mu_r=4.0"});
    const auto mats = cli::resolve_materials(cfg);
    CHECK(mats.map.of(msh::Region::mre).mu_r == doctest::Approx(4.0));
    CHECK(mats.warning.empty());

    const auto flagged = cli::load_default_config({"materials.pm_h_c_a_per_m=100000"});
    CHECK_FALSE(cli::resolve_materials(flagged).warning.empty());

    CHECK_THROWS_AS(cli::resolve_materials(cli::load_default_config({"materials.mre=missing"})),
                    ConfigError);
}

TEST_CASE("file cache round-trips samples bit-exactly") {
    TempDir tmp;
    cli::FileSampleCache cache(tmp.path / "cache");
    energy::SampleRecord rec{-1.234567890123456789, 0.9876543210987654321, 4242};
    cache.store("some|key", rec);

    energy::SampleRecord back;
    REQUIRE(cache.lookup("some|key", back));
    CHECK(back.w_full == rec.w_full);
    CHECK(back.w_self == rec.w_self);
    CHECK(back.n_elements == rec.n_elements);
    CHECK_FALSE(cache.lookup("other|key", back));
}

TEST_CASE("capacity command writes the payload table") {
    TempDir tmp;
    auto cfg = cli::load_default_config({"output_dir=" + (tmp.path / "out").string()});
    std::ostringstream log;
    cli::run_capacity(cfg, log);

    const std::string csv = slurp(tmp.path / "out" / "capacity.csv");
    CHECK(csv.rfind("material,E_mod_MPa,predicted_mass_g,paper_mass_g\n", 0) == 0);
    CHECK(count_lines(csv) == 4);  // header + three MRE rows
    CHECK(csv.find("MRE_RTV,0.81,97.4,97.4") != std::string::npos);
    CHECK(csv.find("MRE_MS10") != std::string::npos);
    CHECK(csv.find("MRE_DS15") != std::string::npos);

    // rows are ordered stiffest-first and predictions follow that order
    const auto pos_rtv = csv.find("MRE_RTV");
    const auto pos_ms = csv.find("MRE_MS10");
    const auto pos_ds = csv.find("MRE_DS15");
    CHECK(pos_rtv < pos_ms);
    CHECK(pos_ms < pos_ds);

    SUBCASE("zero friction zeroes the prediction") {
        auto cfg0 = cli::load_default_config(
            {"output_dir=" + (tmp.path / "out0").string(), "payload.mu=0"});
        std::ostringstream log0;
        cli::run_capacity(cfg0, log0);
        const std::string csv0 = slurp(tmp.path / "out0" / "capacity.csv");
        CHECK(csv0.find("MRE_RTV,0.81,0,") != std::string::npos);
        CHECK(csv0.find("MRE_DS15,0.36,0,") != std::string::npos);
    }
}

TEST_CASE("sweep command: outputs, cache warm rerun, determinism") {
    TempDir tmp;
    const std::string out_dir = (tmp.path / "run").string();
    // coarse settings keep this test quick
    const std::vector<std::string> overrides{
        "output_dir=" + out_dir,
        "mesh.h_max_mm=1.5",
        "sweep.step_deg=40",
    };
    auto cfg = cli::load_default_config(overrides);

    std::ostringstream log1;
    const auto run1 = cli::run_sweep(cfg, log1);
    CHECK(run1.n_solves > 0);
    CHECK(run1.cache_hits == 0);

    const std::string coenergy1 = slurp(run1.coenergy_csv);
    const std::string torque1 = slurp(run1.torque_csv);
    CHECK(coenergy1.rfind("theta_deg,w_co_J\n", 0) == 0);
    CHECK(torque1.rfind("theta_deg,t_mNm\n", 0) == 0);
    CHECK(count_lines(coenergy1) == count_lines(torque1));
    CHECK(count_lines(coenergy1) >= 9);  // header + at least 8 samples

    std::ostringstream log2;
    const auto run2 = cli::run_sweep(cfg, log2);
    CHECK(run2.n_solves == 0);
    CHECK(run2.cache_hits > 0);
    CHECK(slurp(run2.coenergy_csv) == coenergy1);
    CHECK(slurp(run2.torque_csv) == torque1);

    const auto meta = nlohmann::json::parse(slurp(run2.run_meta));
    CHECK(meta.at("solves").get<int>() == 0);
    CHECK(meta.at("config").contains("geometry"));

    SUBCASE("cold rerun in a fresh directory is byte-identical") {
        auto cfg2 = cli::load_default_config({
            "output_dir=" + (tmp.path / "run2").string(),
            "mesh.h_max_mm=1.5",
            "sweep.step_deg=40",
        });
        std::ostringstream log3;
        const auto run3 = cli::run_sweep(cfg2, log3);
        CHECK(run3.n_solves > 0);
        CHECK(slurp(run3.coenergy_csv) == coenergy1);
        CHECK(slurp(run3.torque_csv) == torque1);
    }
}

TEST_CASE("field dump writes element fields and optionally the mesh") {
    TempDir tmp;
    auto cfg = cli::load_default_config({
        "output_dir=" + (tmp.path / "dump").string(),
        "mesh.h_max_mm=1.5",
    });
    std::ostringstream log;
    cli::run_field_dump(cfg, 60.0, true, log);
    const std::string field = slurp(tmp.path / "dump" / "field.csv");
    CHECK(field.rfind("x_m,y_m,bx_T,by_T,region\n", 0) == 0);
    CHECK(field.find(",pm\n") != std::string::npos);
    CHECK(field.find(",mre\n") != std::string::npos);
    CHECK(field.find(",air\n") != std::string::npos);
    CHECK(fs::exists(tmp.path / "dump" / "mesh.txt"));
}

TEST_CASE("theta grid construction") {
    auto cfg = cli::load_default_config();
    const auto grid = cli::build_theta_grid(cfg);
    REQUIRE(grid.size() >= 55);
    CHECK(grid.front() == 0.0);
    const double theta_max = geom::max_wrap_angle(cfg.geometry);
    CHECK(grid.back() == doctest::Approx(0.98 * theta_max).epsilon(1e-12));
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);

    auto stopped = cli::load_default_config({"sweep.stop_deg=1000"});
    CHECK_THROWS_AS(cli::build_theta_grid(stopped), ConfigError);
}
