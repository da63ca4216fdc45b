#include "wgspec/cli.hpp"

#include "wgspec/io.hpp"
#include "wgspec/thermal.hpp"

#include <nlohmann/json.hpp>

#include <doctest.h>

#include <cmath>
#include <fstream>

using namespace wgspec;
using nlohmann::json;

namespace {

std::filesystem::path fresh_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("wgspec_cli_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

json simulate_config(double beta, double gamma_d, double xi, double sigma,
                     std::uint64_t seed, double center = 0.0) {
    return json{{"model",
                 {{"beta", beta},
                  {"gamma_d_ghz", gamma_d},
                  {"gamma_ghz", 0.87},
                  {"xi", xi},
                  {"center_ghz", center}}},
                {"grid", {{"min_ghz", center - 5.0}, {"max_ghz", center + 5.0}, {"points", 201}}},
                {"noise", {{"sigma", sigma}, {"seed", seed}}}};
}

int run(const std::vector<std::string>& args) { return run_command(args); }

}  // namespace

TEST_CASE("simulate then fit through the command surface") {
    const auto dir = fresh_dir("simfit");
    write_json_atomic(dir / "params.json", simulate_config(0.51, 0.06 * 0.87, 0.16, 0.01, 7));

    REQUIRE(run({"--out-dir", dir.string(), "simulate", "--params",
                 (dir / "params.json").string()}) == 0);
    REQUIRE(std::filesystem::exists(dir / "simulated_spectrum.csv"));
    REQUIRE(std::filesystem::exists(dir / "simulate_record.json"));

    REQUIRE(run({"--out-dir", dir.string(), "fit", "--spectrum",
                 (dir / "simulated_spectrum.csv").string(), "--gamma", "0.87"}) == 0);
    const json record = load_json(dir / "fit_record.json");
    CHECK(record["record_kind"] == "fit");
    CHECK(record["fit"]["converged"].get<bool>());
    CHECK(std::abs(record["fit"]["parameters"]["beta"]["value"].get<double>() - 0.51) < 0.03);
    CHECK(std::abs(record["fit"]["parameters"]["xi"]["value"].get<double>() - 0.16) < 0.05);

    // plot data carries one model row per sample
    std::ifstream curve(dir / "fit_curve.csv");
    std::string header;
    std::getline(curve, header);
    CHECK(header == "x,y,sigma,model,residual");
    int rows = 0;
    for (std::string line; std::getline(curve, line);) ++rows;
    CHECK(rows == 201);
}

TEST_CASE("simulation records are byte identical under a pinned timestamp") {
    const auto dir_a = fresh_dir("det_a");
    const auto dir_b = fresh_dir("det_b");
    const json params = simulate_config(0.51, 0.0522, 0.16, 0.01, 9);
    write_json_atomic(dir_a / "params.json", params);
    write_json_atomic(dir_b / "params.json", params);

    const std::string stamp = "2026-02-03T04:05:06Z";
    REQUIRE(run({"--out-dir", dir_a.string(), "--timestamp", stamp, "simulate", "--params",
                 (dir_a / "params.json").string()}) == 0);
    REQUIRE(run({"--out-dir", dir_b.string(), "--timestamp", stamp, "simulate", "--params",
                 (dir_b / "params.json").string()}) == 0);

    CHECK(read_text(dir_a / "simulated_spectrum.csv") ==
          read_text(dir_b / "simulated_spectrum.csv"));
    CHECK(read_text(dir_a / "simulate_record.json") ==
          read_text(dir_b / "simulate_record.json"));

    // a different seed changes the data digest
    REQUIRE(run({"--out-dir", dir_b.string(), "--timestamp", stamp, "simulate", "--params",
                 (dir_b / "params.json").string(), "--seed", "10"}) == 0);
    CHECK(read_text(dir_a / "simulated_spectrum.csv") !=
          read_text(dir_b / "simulated_spectrum.csv"));
}

TEST_CASE("unknown subcommands and missing inputs") {
    CHECK(run({"frobnicate"}) == 2);
    CHECK(run({}) == 2);

    const auto dir = fresh_dir("err");
    CHECK(run({"--out-dir", dir.string(), "fit", "--spectrum",
               (dir / "nope.csv").string(), "--gamma", "0.87"}) == 1);
    REQUIRE(std::filesystem::exists(dir / "error_record.json"));
    const json error = load_json(dir / "error_record.json");
    CHECK(error["record_kind"] == "error");
    CHECK(!error["error"].get<std::string>().empty());
}

TEST_CASE("config schemas reject unknown keys") {
    const auto dir = fresh_dir("schema");
    json params = simulate_config(0.51, 0.0522, 0.16, 0.0, 1);
    params["model"]["betaa"] = 0.3;  // typo
    write_json_atomic(dir / "params.json", params);
    CHECK(run({"--out-dir", dir.string(), "simulate", "--params",
               (dir / "params.json").string()}) == 1);
    const json error = load_json(dir / "error_record.json");
    CHECK(error["error"].get<std::string>().find("betaa") != std::string::npos);
}

TEST_CASE("power series pipeline end to end") {
    const auto dir = fresh_dir("power");
    const double pc_nw = 13.1;
    json manifest = json::array();
    int index = 0;
    for (const double p_nw : {1.0, 3.0, 8.0, 13.0, 25.0, 60.0}) {
        json cfg = simulate_config(0.42, 0.06 * 0.87, 0.16, 0.004, 40 + index);
        cfg["model"]["drive_s"] = p_nw / pc_nw;
        write_json_atomic(dir / "gen.json", cfg);
        REQUIRE(run({"--out-dir", dir.string(), "simulate", "--params",
                     (dir / "gen.json").string()}) == 0);
        const auto name = "p" + std::to_string(index++) + ".csv";
        std::filesystem::rename(dir / "simulated_spectrum.csv", dir / name);
        manifest.push_back({{"power_nW", p_nw}, {"path", name}});
    }
    write_json_atomic(dir / "manifest.json", manifest);
    write_json_atomic(dir / "series.json",
                      json{{"series",
                            {{"gamma_ghz", 0.87},
                             {"gamma_r", 0.06},
                             {"transition_frequency_thz", 325.457},
                             {"gamma_per_ns", 5.49}}}});

    REQUIRE(run({"--out-dir", dir.string(), "power-series", "--manifest",
                 (dir / "manifest.json").string(), "--config",
                 (dir / "series.json").string()}) == 0);

    const json record = load_json(dir / "saturation_record.json");
    CHECK(std::abs(record["saturation"]["beta_eff"].get<double>() - 0.42) < 0.04);
    CHECK(std::abs(record["saturation"]["critical_input_power_nW"].get<double>() - pc_nw) <
          0.25 * pc_nw);
    CHECK(record["saturation"].contains("alpha"));

    std::ifstream rows(dir / "power_series_rows.csv");
    std::string header;
    std::getline(rows, header);
    CHECK(header.rfind("power_nW,", 0) == 0);
    int count = 0;
    for (std::string line; std::getline(rows, line);) ++count;
    CHECK(count == 6);
}

TEST_CASE("temperature series pipeline end to end") {
    const auto dir = fresh_dir("thermal");
    const BandEdgeParams truth{0.0, 0.48, 6.6};
    json manifest = json::array();
    int index = 0;
    for (const double t : {2.0, 6.0, 10.0, 14.0, 18.0, 22.0, 26.0, 30.0}) {
        const double center = -band_edge_shift_mev(t, truth) / k_mev_per_ghz;
        json cfg = simulate_config(0.51, 0.02 * 0.87, 0.1, 0.0, 1, center);
        write_json_atomic(dir / "gen.json", cfg);
        REQUIRE(run({"--out-dir", dir.string(), "simulate", "--params",
                     (dir / "gen.json").string()}) == 0);
        const auto name = "t" + std::to_string(index++) + ".csv";
        std::filesystem::rename(dir / "simulated_spectrum.csv", dir / name);
        manifest.push_back({{"temperature_K", t}, {"path", name}});
    }
    write_json_atomic(dir / "manifest.json", manifest);
    write_json_atomic(dir / "series.json", json{{"series", {{"gamma_ghz", 0.87}}}});

    REQUIRE(run({"--out-dir", dir.string(), "temp-series", "--manifest",
                 (dir / "manifest.json").string(), "--config",
                 (dir / "series.json").string()}) == 0);

    const json record = load_json(dir / "band_edge_record.json");
    REQUIRE(!record["band_edge"].is_null());
    CHECK(std::abs(record["band_edge"]["eta"].get<double>() - 0.48) < 0.01);
    CHECK(std::abs(record["band_edge"]["mean_phonon_mev"].get<double>() - 6.6) < 0.1);
    CHECK(std::filesystem::exists(dir / "temp_series_rows.csv"));
}

TEST_CASE("beta map pipeline end to end") {
    const auto dir = fresh_dir("betamap");

    // two guided modes sampled on a 1024-point line
    const std::size_t n = 1024;
    const double dz = 10.0;
    const double k0 = 2.0 * M_PI * 40.0 / (n * dz);
    const double k2 = 2.0 * M_PI * 80.0 / (n * dz);
    std::ostringstream field;
    field.precision(17);
    field << "z_nm,Ex_re,Ex_im\n";
    for (std::size_t i = 0; i < n; ++i) {
        const double z = static_cast<double>(i) * dz;
        const std::complex<double> value =
            std::complex<double>{0.0, 0.5} * std::exp(std::complex<double>{0.0, 1.0} * k0 * z) +
            std::complex<double>{0.0, 0.5} * std::exp(std::complex<double>{0.0, 1.0} * k2 * z);
        field << z << ',' << value.real() << ',' << value.imag() << '\n';
    }
    write_text_atomic(dir / "line.csv", field.str());

    const double bin = 2.0 * M_PI / (n * dz);
    write_json_atomic(
        dir / "modes.json",
        json{{"modes",
              {{"frequency_thz", 325.7},
               {"dipole_z_nm", -1.0e5},
               {"dipole", {{"re", 0.0}, {"im", 1.0}}},
               {"hom_dipole", {{"re", 0.0}, {"im", 0.60606060606060606}}},
               {"bands",
                json::array({{{"label", "TE0"}, {"k_center", k0}, {"k_halfwidth", 5.0 * bin}},
                             {{"label", "TE2"},
                              {"k_center", k2},
                              {"k_halfwidth", 5.0 * bin}}})}}}});

    REQUIRE(run({"--out-dir", dir.string(), "beta-map", "--config",
                 (dir / "modes.json").string(), "--field", (dir / "line.csv").string()}) == 0);

    const json record = load_json(dir / "beta_map_record.json");
    REQUIRE(record["lines"].size() == 1);
    const auto& modes = record["lines"][0]["modes"];
    REQUIRE(modes.size() == 2);
    CHECK(std::abs(modes[0]["beta"].get<double>() - 0.5) < 1e-6);
    CHECK(std::abs(modes[1]["beta"].get<double>() - 0.5) < 1e-6);
    CHECK(std::abs(record["lines"][0]["purcell_factor"].get<double>() - 1.65) < 1e-9);
    CHECK(std::filesystem::exists(dir / "beta_map.csv"));
}

TEST_CASE("calibration command") {
    const auto dir = fresh_dir("cal");
    write_text_atomic(dir / "points.csv",
                      "voltage_V,frequency_GHz\n0.1,10\n0.2,15\n0.3,20\n");
    REQUIRE(run({"--out-dir", dir.string(), "calibrate", "--points",
                 (dir / "points.csv").string()}) == 0);
    const json record = load_json(dir / "calibration_record.json");
    CHECK(record["slope_ghz_per_v"].get<double>() == doctest::Approx(50.0));
    CHECK(record["intercept_ghz"].get<double>() == doctest::Approx(5.0));
}
