#include "wgspec/cli.hpp"

#include "wgspec/decay.hpp"
#include "wgspec/io.hpp"
#include "wgspec/saturation.hpp"
#include "wgspec/spectral_fits.hpp"
#include "wgspec/thermal.hpp"
#include "wgspec/version.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <sstream>

namespace wgspec {

namespace {

using nlohmann::json;

std::string iso_timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// reject config blocks with keys outside the schema
void require_keys(const json& obj, const std::string& context,
                  std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw std::runtime_error(context + ": expected a JSON object");
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) known = true;
        if (!known)
            throw std::runtime_error(context + ": unknown key '" + key + "'");
    }
}

FitConfig parse_fit_block(const json& block) {
    require_keys(block, "fit",
                 {"max_iterations", "chi2_rel_tol", "param_rel_tol", "bounds", "frozen", "init",
                  "mask_windows", "drive_s", "gamma_free", "residual_peaks"});
    FitConfig cfg;
    if (block.contains("max_iterations")) cfg.max_iterations = block["max_iterations"].get<int>();
    if (block.contains("chi2_rel_tol")) cfg.chi2_rel_tol = block["chi2_rel_tol"].get<double>();
    if (block.contains("param_rel_tol")) cfg.param_rel_tol = block["param_rel_tol"].get<double>();
    if (block.contains("bounds"))
        for (const auto& [name, b] : block["bounds"].items())
            cfg.bounds[name] = {b.at(0).get<double>(), b.at(1).get<double>()};
    if (block.contains("frozen"))
        for (const auto& name : block["frozen"]) cfg.frozen.insert(name.get<std::string>());
    if (block.contains("init"))
        for (const auto& [name, v] : block["init"].items()) cfg.initial[name] = v.get<double>();
    if (block.contains("mask_windows"))
        for (const auto& w : block["mask_windows"])
            cfg.mask_windows.emplace_back(w.at(0).get<double>(), w.at(1).get<double>());
    cfg.validate();
    return cfg;
}

SpectrumModelParams parse_model_block(const json& block) {
    require_keys(block, "model",
                 {"beta", "gamma_d_ghz", "gamma_ghz", "xi", "center_ghz", "drive_s",
                  "photon_number", "residual_peaks"});
    SpectrumModelParams params;
    params.emitter.beta = block.at("beta").get<double>();
    params.emitter.dephasing_ghz = block.at("gamma_d_ghz").get<double>();
    params.emitter.linewidth_ghz = block.at("gamma_ghz").get<double>();
    if (block.contains("xi")) params.fano.xi = block["xi"].get<double>();
    if (block.contains("center_ghz")) params.center_ghz = block["center_ghz"].get<double>();
    if (block.contains("drive_s"))
        params.drive = DrivePoint::from_saturation(block["drive_s"].get<double>());
    if (block.contains("photon_number"))
        params.drive = DrivePoint::from_photon_number(block["photon_number"].get<double>());
    if (block.contains("residual_peaks")) {
        for (const auto& p : block["residual_peaks"]) {
            require_keys(p, "model.residual_peaks", {"center_ghz", "fwhm_ghz", "amplitude"});
            params.residual_peaks.push_back({p.at("center_ghz").get<double>(),
                                             p.at("fwhm_ghz").get<double>(),
                                             p.at("amplitude").get<double>()});
        }
    }
    params.validate();
    return params;
}

struct CommonPaths {
    std::filesystem::path out_dir;
    std::string timestamp;
};

json spectrum_record_payload(const Spectrum& s) {
    return json{{"points", s.size()},
                {"x_min", s.x.front()},
                {"x_max", s.x.back()},
                {"with_sigma", s.has_sigma()}};
}

void write_fit_curve_csv(const std::filesystem::path& path, const Spectrum& s,
                         const std::vector<double>& model) {
    std::ostringstream out;
    out.precision(17);
    out << (s.has_sigma() ? "x,y,sigma,model,residual\n" : "x,y,model,residual\n");
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << s.x[i] << ',' << s.y[i] << ',';
        if (s.has_sigma()) out << s.sigma[i] << ',';
        out << model[i] << ',' << (s.y[i] - model[i]) << '\n';
    }
    write_text_atomic(path, out.str());
}

int cmd_simulate(const std::filesystem::path& params_path, std::uint64_t seed_override,
                 bool seed_given, const CommonPaths& paths) {
    const json config = load_json(params_path);
    require_keys(config, "simulate config", {"model", "grid", "noise"});
    const SpectrumModelParams model = parse_model_block(config.at("model"));

    GridSpec grid;
    if (config.contains("grid")) {
        require_keys(config["grid"], "grid", {"min_ghz", "max_ghz", "points"});
        grid.x_min = config["grid"].at("min_ghz").get<double>();
        grid.x_max = config["grid"].at("max_ghz").get<double>();
        grid.points = config["grid"].at("points").get<int>();
    }
    NoiseSpec noise;
    if (config.contains("noise")) {
        require_keys(config["noise"], "noise", {"sigma", "seed", "generator"});
        if (config["noise"].contains("sigma")) noise.sigma = config["noise"]["sigma"].get<double>();
        if (config["noise"].contains("seed"))
            noise.seed = config["noise"]["seed"].get<std::uint64_t>();
        if (config["noise"].contains("generator"))
            noise.generator = config["noise"]["generator"].get<std::string>();
    }
    if (seed_given) noise.seed = seed_override;

    const Spectrum spectrum = simulate_spectrum(model, grid, noise);
    save_spectrum(paths.out_dir / "simulated_spectrum.csv", spectrum);

    json record = make_record_header("simulate", digest_file(params_path),
                                     digest_bytes(config.dump()), paths.timestamp);
    record["seed"] = noise.seed;
    record["generator"] = noise.generator;
    record["noise_sigma"] = noise.sigma;
    record["spectrum"] = spectrum_record_payload(spectrum);
    write_json_atomic(paths.out_dir / "simulate_record.json", record);
    std::cout << "wrote " << (paths.out_dir / "simulated_spectrum.csv").string() << "\n";
    return 0;
}

int cmd_fit(const std::filesystem::path& spectrum_path, double gamma_ghz,
            const std::filesystem::path& config_path, const std::string& x_kind,
            const std::filesystem::path& calibration_path, const CommonPaths& paths) {
    json config = json::object();
    std::string config_digest = digest_bytes("{}");
    FitConfig fit_config;
    FanoFitOptions options;
    options.gamma_ghz = gamma_ghz;
    if (!config_path.empty()) {
        config = load_json(config_path);
        require_keys(config, "fit config", {"fit"});
        config_digest = digest_bytes(config.dump());
        if (config.contains("fit")) {
            const json& block = config["fit"];
            fit_config = parse_fit_block(block);
            if (block.contains("drive_s")) options.drive_s = block["drive_s"].get<double>();
            if (block.contains("gamma_free")) options.gamma_free = block["gamma_free"].get<bool>();
            if (block.contains("residual_peaks"))
                options.residual_peaks = block["residual_peaks"].get<int>();
        }
    }

    Spectrum spectrum = load_spectrum(
        spectrum_path,
        x_kind == "voltage" ? Spectrum::XKind::voltage : Spectrum::XKind::detuning);
    std::string input_digest = digest_file(spectrum_path);

    if (spectrum.x_kind == Spectrum::XKind::voltage) {
        if (calibration_path.empty())
            throw std::runtime_error("voltage-axis spectrum requires --calibration points");
        const auto cal = calibrate_voltage_to_frequency(load_calibration_points(calibration_path));
        spectrum = apply_calibration(spectrum, cal);
        input_digest = digest_bytes(input_digest + digest_file(calibration_path));
    }

    const FitResult fit = fit_fano_spectrum(spectrum, options, fit_config);

    std::vector<double> model(spectrum.size());
    for (std::size_t i = 0; i < spectrum.size(); ++i)
        model[i] = spectrum.y[i] - fit.residuals[i];
    write_fit_curve_csv(paths.out_dir / "fit_curve.csv", spectrum, model);

    json record = make_record_header("fit", input_digest, config_digest, paths.timestamp);
    record["gamma_ghz"] = gamma_ghz;
    record["drive_s"] = options.drive_s;
    record["fit"] = fit_result_to_json(fit);
    write_json_atomic(paths.out_dir / "fit_record.json", record);

    std::cout << "beta = " << fit.value("beta") << " +- " << fit.uncertainty("beta")
              << ", gamma_d = " << fit.value("gamma_d") << " GHz, xi = " << fit.value("xi")
              << (fit.converged ? "" : " (NOT converged)") << "\n";
    return fit.converged ? 0 : 1;
}

struct SeriesConfig {
    SeriesFitOptions options;
    double gamma_r = 0.0;
    std::optional<double> transition_frequency_thz;
    std::optional<double> gamma_per_ns;
};

SeriesConfig parse_series_config(const json& config) {
    require_keys(config, "series config", {"series"});
    const json& block = config.at("series");
    require_keys(block, "series",
                 {"gamma_ghz", "gamma_r", "transition_frequency_thz", "gamma_per_ns",
                  "residual_peaks", "threads", "fit"});
    SeriesConfig out;
    out.options.gamma_ghz = block.at("gamma_ghz").get<double>();
    if (block.contains("gamma_r")) out.gamma_r = block["gamma_r"].get<double>();
    if (block.contains("transition_frequency_thz"))
        out.transition_frequency_thz = block["transition_frequency_thz"].get<double>();
    if (block.contains("gamma_per_ns")) out.gamma_per_ns = block["gamma_per_ns"].get<double>();
    if (block.contains("residual_peaks"))
        out.options.residual_peaks = block["residual_peaks"].get<int>();
    if (block.contains("threads")) out.options.threads = block["threads"].get<int>();
    if (block.contains("fit")) out.options.fit = parse_fit_block(block["fit"]);
    return out;
}

int cmd_power_series(const std::filesystem::path& manifest_path,
                     const std::filesystem::path& config_path, const CommonPaths& paths) {
    const json config = load_json(config_path);
    const SeriesConfig series_config = parse_series_config(config);

    const json manifest = load_json(manifest_path);
    if (!manifest.is_array()) throw std::runtime_error("manifest must be a JSON array");

    PowerSeries series;
    std::string input_digest = digest_file(manifest_path);
    for (const auto& entry : manifest) {
        require_keys(entry, "manifest entry", {"power_nW", "path", "excluded"});
        PowerSeriesEntry e;
        e.input_power_w = entry.at("power_nW").get<double>() * 1e-9;
        const auto path =
            manifest_path.parent_path() / entry.at("path").get<std::string>();
        e.spectrum = load_spectrum(path, Spectrum::XKind::detuning);
        if (entry.contains("excluded")) e.excluded = entry["excluded"].get<bool>();
        input_digest = digest_bytes(input_digest + digest_file(path));
        series.entries.push_back(std::move(e));
    }

    const PowerSeriesAnalysis analysis = analyze_power_series(series, series_config.options);

    SaturationOptions sat_options;
    sat_options.gamma_r = series_config.gamma_r;
    sat_options.transition_frequency_thz = series_config.transition_frequency_thz;
    sat_options.gamma_per_ns = series_config.gamma_per_ns;
    const SaturationFit saturation = fit_saturation(analysis, sat_options);

    std::ostringstream rows;
    rows.precision(12);
    rows << "power_nW,t_min,rt_linewidth_ghz,xi,beta_eff,gamma_d_ghz,center_ghz,ok,excluded,"
            "predicted_linewidth_ghz\n";
    for (const auto& row : analysis.rows) {
        rows << row.input_power_w * 1e9 << ',' << row.t_min << ',' << row.rt_linewidth_ghz << ','
             << row.xi << ',' << row.beta_eff << ',' << row.gamma_d_ghz << ',' << row.center_ghz
             << ',' << (row.ok ? 1 : 0) << ',' << (row.excluded ? 1 : 0) << ','
             << saturation.predicted_linewidth_ghz(row.input_power_w,
                                                   series_config.options.gamma_ghz)
             << '\n';
    }
    write_text_atomic(paths.out_dir / "power_series_rows.csv", rows.str());

    json record = make_record_header("power-series", input_digest, digest_bytes(config.dump()),
                                     paths.timestamp);
    record["xi_mean"] = analysis.xi_mean;
    record["xi_stddev"] = analysis.xi_stddev;
    json sat;
    sat["beta_eff"] = saturation.beta_eff;
    sat["critical_input_power_nW"] = saturation.critical_input_power_w * 1e9;
    sat["gamma_r"] = saturation.gamma_r;
    sat["n_c"] = saturation.n_c;
    sat["chi_squared"] = saturation.chi_squared;
    sat["converged"] = saturation.converged;
    if (saturation.critical_waveguide_power_w)
        sat["critical_waveguide_power_nW"] = *saturation.critical_waveguide_power_w * 1e9;
    if (saturation.alpha) sat["alpha"] = *saturation.alpha;
    record["saturation"] = sat;
    write_json_atomic(paths.out_dir / "saturation_record.json", record);

    std::cout << "beta_eff = " << saturation.beta_eff << ", critical power = "
              << saturation.critical_input_power_w * 1e9 << " nW, n_c = " << saturation.n_c
              << "\n";
    return 0;
}

int cmd_temp_series(const std::filesystem::path& manifest_path,
                    const std::filesystem::path& config_path, const CommonPaths& paths) {
    const json config = load_json(config_path);
    const SeriesConfig series_config = parse_series_config(config);

    const json manifest = load_json(manifest_path);
    if (!manifest.is_array()) throw std::runtime_error("manifest must be a JSON array");

    ThermalSeries series;
    std::string input_digest = digest_file(manifest_path);
    for (const auto& entry : manifest) {
        require_keys(entry, "manifest entry", {"temperature_K", "path"});
        ThermalSeriesEntry e;
        e.temperature_k = entry.at("temperature_K").get<double>();
        const auto path =
            manifest_path.parent_path() / entry.at("path").get<std::string>();
        e.spectrum = load_spectrum(path, Spectrum::XKind::detuning);
        input_digest = digest_bytes(input_digest + digest_file(path));
        series.entries.push_back(std::move(e));
    }

    const ThermalAnalysis analysis = analyze_thermal_series(series, series_config.options);

    std::ostringstream rows;
    rows.precision(12);
    rows << "temperature_K,rt_linewidth_ghz,gamma_d_ghz,t_min,center_ghz,shift_mev,ok,masked\n";
    for (const auto& row : analysis.rows) {
        double shift = std::numeric_limits<double>::quiet_NaN();
        for (const auto& [temperature, value] : analysis.resonance_positions)
            if (temperature == row.temperature_k) shift = value;
        rows << row.temperature_k << ',' << row.rt_linewidth_ghz << ',' << row.gamma_d_ghz << ','
             << row.t_min << ',' << row.center_ghz << ',' << shift << ',' << (row.ok ? 1 : 0)
             << ',' << (row.masked ? 1 : 0) << '\n';
    }
    write_text_atomic(paths.out_dir / "temp_series_rows.csv", rows.str());

    json record = make_record_header("temp-series", input_digest, digest_bytes(config.dump()),
                                     paths.timestamp);
    const auto& positions = analysis.resonance_positions;
    const bool span_ok =
        positions.size() >= 4 &&
        positions.back().first >= 3.0 * positions.front().first;
    if (span_ok) {
        const BandEdgeFit band_edge = fit_band_edge(positions);
        json be;
        be["e_g0_mev"] = band_edge.params.e_g0_mev;
        be["eta"] = band_edge.params.eta;
        be["mean_phonon_mev"] = band_edge.params.mean_phonon_mev;
        be["chi_squared"] = band_edge.chi_squared;
        be["converged"] = band_edge.converged;
        record["band_edge"] = be;
        std::cout << "eta = " << band_edge.params.eta
                  << ", mean phonon energy = " << band_edge.params.mean_phonon_mev << " meV\n";
    } else {
        record["band_edge"] = nullptr;
        record["band_edge_skipped"] =
            "needs >= 4 fitted rows spanning a factor 3 in temperature";
    }
    write_json_atomic(paths.out_dir / "band_edge_record.json", record);
    return 0;
}

int cmd_beta_map(const std::vector<std::string>& field_paths,
                 const std::filesystem::path& config_path, const CommonPaths& paths) {
    const json config = load_json(config_path);
    require_keys(config, "beta-map config", {"modes"});
    const json& block = config.at("modes");
    require_keys(block, "modes",
                 {"frequency_thz", "dipole_z_nm", "dipole", "hom_dipole",
                  "far_field_exclusion_wavelengths", "bands"});

    ModeAnalysisOptions options;
    if (block.contains("far_field_exclusion_wavelengths"))
        options.far_field_exclusion_wavelengths =
            block["far_field_exclusion_wavelengths"].get<double>();

    std::vector<ModeBand> bands;
    for (const auto& b : block.at("bands")) {
        require_keys(b, "modes.bands", {"label", "k_center", "k_halfwidth"});
        bands.push_back({b.at("k_center").get<double>(), b.at("k_halfwidth").get<double>(),
                         b.at("label").get<std::string>()});
    }

    require_keys(block.at("dipole"), "modes.dipole", {"re", "im"});
    const std::complex<double> dipole{block["dipole"].at("re").get<double>(),
                                      block["dipole"].at("im").get<double>()};
    std::optional<std::complex<double>> hom_dipole;
    if (block.contains("hom_dipole")) {
        require_keys(block["hom_dipole"], "modes.hom_dipole", {"re", "im"});
        hom_dipole = std::complex<double>{block["hom_dipole"].at("re").get<double>(),
                                          block["hom_dipole"].at("im").get<double>()};
    }

    std::ostringstream rows;
    rows.precision(12);
    rows << "file,label,beta,window_warning\n";
    std::string input_digest = digest_bytes("");
    json per_file = json::array();
    for (const auto& field_path : field_paths) {
        const FieldLineSamples samples = load_field_line(field_path);
        input_digest = digest_bytes(input_digest + digest_file(field_path));

        ModeFieldLine line;
        line.z_nm = samples.z_nm;
        line.ex = samples.ex;
        line.dipole_value = dipole;
        line.frequency_thz = block.at("frequency_thz").get<double>();
        if (block.contains("dipole_z_nm")) line.dipole_z_nm = block["dipole_z_nm"].get<double>();

        const auto betas = beta_per_mode(line, bands, options);
        json entry;
        entry["file"] = field_path;
        json mode_list = json::array();
        double beta_sum = 0.0;
        for (const auto& b : betas) {
            rows << field_path << ',' << b.label << ',' << b.beta << ','
                 << (b.window_warning ? 1 : 0) << '\n';
            mode_list.push_back(
                {{"label", b.label}, {"beta", b.beta}, {"window_warning", b.window_warning}});
            beta_sum += b.beta;
        }
        entry["modes"] = mode_list;
        entry["beta_sum"] = beta_sum;
        entry["radiated_power"] = dipole_radiated_power(dipole, line.frequency_thz);
        if (hom_dipole) entry["purcell_factor"] = purcell_factor(dipole, *hom_dipole);
        per_file.push_back(entry);
    }
    write_text_atomic(paths.out_dir / "beta_map.csv", rows.str());

    json record = make_record_header("beta-map", input_digest, digest_bytes(config.dump()),
                                     paths.timestamp);
    record["lines"] = per_file;
    json band_meta = json::array();
    for (const auto& b : bands)
        band_meta.push_back(
            {{"label", b.label}, {"k_center", b.k_center}, {"k_halfwidth", b.k_halfwidth}});
    record["bands"] = band_meta;
    write_json_atomic(paths.out_dir / "beta_map_record.json", record);
    return 0;
}

int cmd_calibrate(const std::filesystem::path& points_path, const CommonPaths& paths) {
    const auto points = load_calibration_points(points_path);
    const LinearCalibration cal = calibrate_voltage_to_frequency(points);

    json record = make_record_header("calibrate", digest_file(points_path), digest_bytes("{}"),
                                     paths.timestamp);
    record["slope_ghz_per_v"] = cal.slope_ghz_per_v;
    record["intercept_ghz"] = cal.intercept_ghz;
    record["residual_rms_ghz"] = cal.residual_rms_ghz;
    write_json_atomic(paths.out_dir / "calibration_record.json", record);

    std::cout << "slope = " << cal.slope_ghz_per_v << " GHz/V, intercept = " << cal.intercept_ghz
              << " GHz, residual rms = " << cal.residual_rms_ghz << " GHz\n";
    return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
    CLI::App app{"Waveguide photon-emitter transmission spectroscopy toolkit"};
    app.set_version_flag("--version", version_string);

    std::string out_dir_flag;
    const char* env_out = std::getenv("WGSPEC_OUT_DIR");
    app.add_option("--out-dir", out_dir_flag, "output directory (default: $WGSPEC_OUT_DIR or .)");
    std::string timestamp_flag;
    app.add_option("--timestamp", timestamp_flag,
                   "fixed ISO timestamp for reproducible records");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic spectrum");
    std::string sim_params;
    simulate->add_option("--params", sim_params, "model/grid/noise JSON")->required();
    std::uint64_t seed_override = 0;
    auto* seed_opt = simulate->add_option("--seed", seed_override, "override the noise seed");

    // fit
    auto* fit = app.add_subcommand("fit", "fit one transmission spectrum");
    std::string fit_spectrum, fit_config_path, fit_x_kind = "detuning", fit_calibration;
    double fit_gamma = 0.0;
    fit->add_option("--spectrum", fit_spectrum, "spectrum CSV (header x,y[,sigma])")->required();
    fit->add_option("--gamma", fit_gamma, "homogeneous linewidth in GHz")->required();
    fit->add_option("--config", fit_config_path, "fit configuration JSON");
    fit->add_option("--x-kind", fit_x_kind, "x axis kind: detuning | voltage")
        ->check(CLI::IsMember({"detuning", "voltage"}));
    fit->add_option("--calibration", fit_calibration, "voltage calibration points CSV");

    // power-series
    auto* power = app.add_subcommand("power-series", "saturation analysis of a power series");
    std::string power_manifest, power_config;
    power->add_option("--manifest", power_manifest, "JSON array of {power_nW, path}")->required();
    power->add_option("--config", power_config, "series configuration JSON")->required();

    // temp-series
    auto* temp = app.add_subcommand("temp-series", "temperature series and band-edge fit");
    std::string temp_manifest, temp_config;
    temp->add_option("--manifest", temp_manifest, "JSON array of {temperature_K, path}")
        ->required();
    temp->add_option("--config", temp_config, "series configuration JSON")->required();

    // beta-map
    auto* beta = app.add_subcommand("beta-map", "mode-resolved coupling from field lines");
    std::vector<std::string> beta_fields;
    std::string beta_config;
    beta->add_option("--field", beta_fields, "field line CSV (repeatable)")->required();
    beta->add_option("--config", beta_config, "mode/band configuration JSON")->required();

    // calibrate
    auto* calibrate = app.add_subcommand("calibrate", "voltage-to-frequency line fit");
    std::string cal_points;
    calibrate->add_option("--points", cal_points, "CSV with header voltage_V,frequency_GHz")
        ->required();

    app.require_subcommand(1);

    std::vector<const char*> argv;
    argv.push_back("wgspec");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    CommonPaths paths;
    paths.out_dir = !out_dir_flag.empty() ? out_dir_flag : (env_out ? env_out : ".");
    paths.timestamp = !timestamp_flag.empty() ? timestamp_flag : iso_timestamp_now();

    try {
        if (simulate->parsed())
            return cmd_simulate(sim_params, seed_override, !seed_opt->empty(), paths);
        if (fit->parsed())
            return cmd_fit(fit_spectrum, fit_gamma, fit_config_path, fit_x_kind, fit_calibration,
                           paths);
        if (power->parsed()) return cmd_power_series(power_manifest, power_config, paths);
        if (temp->parsed()) return cmd_temp_series(temp_manifest, temp_config, paths);
        if (beta->parsed()) return cmd_beta_map(beta_fields, beta_config, paths);
        if (calibrate->parsed()) return cmd_calibrate(cal_points, paths);
    } catch (const std::exception& ex) {
        json error;
        error["error"] = ex.what();
        error["record_kind"] = "error";
        error["software_version"] = version_string;
        std::cerr << error.dump() << "\n";
        try {
            write_json_atomic(paths.out_dir / "error_record.json", error);
        } catch (...) {
            // the error report must not mask the original failure
        }
        return 1;
    }
    return 2;
}

}  // namespace wgspec
